"""Numerical laboratory for Dirichlet problems with variable exponents.

Modules: ``exponent`` (exponent fields), ``lebesgue`` (modular, Luxemburg
norm, dual norms), ``geometry`` (raster domains, Hausdorff complementary
distance, domain sequences), ``mesh`` (P1 meshes and grid functions),
``solver`` (p(x)-Laplacian energy minimization), ``capacity`` and
``experiments`` (convergence studies).  Set ``VEXLAP_NO_NUMBA=1`` to run the
pure-numpy kernels.
"""
from ._backend import BACKEND
from .capacity import (alpha_r_condition_check, capacity_comparison_check, connected_lower_bound_check,
                       relative_capacity, sobolev_capacity)
from .experiments import ConvergenceTable, ExperimentConfig, run
from .exponent import ExponentField, Grid, make_exponent
from .geometry import (DomainSequence, RasterDomain, complement_components, domain_sequence,
                       hausdorff_complementary_distance, make_generator)
from .lebesgue import FieldSample, dual_norm_estimate, luxemburg_norm, modular
from .mesh import DofMap, GridFunction, Mesh, build_mesh, restrict_dofs
from .solver import SolveReport, SolverOptions, SourceTerm, solve_dirichlet

__version__ = "0.1.0"
