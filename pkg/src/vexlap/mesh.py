"""Uniform P1 triangulations, degree-of-freedom masks and nodal functions.

Every grid cell with corners ``a=(i,j), b=(i+1,j), c=(i+1,j+1), d=(i,j+1)``
is split along its ``a``–``c`` diagonal into the counter-clockwise triangles
``(a, b, c)`` and ``(a, c, d)``.  Node ``(i, j)`` has index ``j (nx+1) + i``.

The discrete space of functions vanishing off a raster domain is encoded by
a :class:`DofMap`: a node is *fixed* (pinned to zero) when any grid cell it
touches overlaps a complement pixel, and *active* otherwise.  Optionally the
mesh can be fitted to the domain boundary (:func:`fit_boundary`), which
moves nodes near the boundary onto it; node numbering is preserved, so nodal
arrays transfer between the uniform and the fitted mesh by index.
"""
from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.sparse as sp
from scipy import ndimage

from .errors import MeshError, ResolutionMismatch
from .exponent import Grid
from .lebesgue import FieldSample, luxemburg_norm


@dataclass(frozen=True, eq=False)
class Mesh:
    """Triangle mesh of a rectangular box.

    Attributes
    ----------
    nodes : (N, 2) float array
    triangles : (ne, 3) int array, counter-clockwise
    h : float
        Cell size of the underlying uniform grid.
    grid : Grid
        The node lattice the mesh was built from.
    fitted : bool
        True if nodes were moved onto a domain boundary.
    """

    nodes: np.ndarray
    triangles: np.ndarray
    h: float
    grid: Grid
    fitted: bool = False

    def __post_init__(self):
        self.nodes.setflags(write=False)
        self.triangles.setflags(write=False)

    @property
    def box(self):
        return self.grid.box

    @property
    def resolution(self):
        return 1.0 / self.h

    @property
    def n_nodes(self):
        return self.nodes.shape[0]

    @property
    def n_triangles(self):
        return self.triangles.shape[0]

    @cached_property
    def _geometry(self):
        P = self.nodes[self.triangles]
        x, y = P[..., 0], P[..., 1]
        area2 = (x[:, 1] - x[:, 0]) * (y[:, 2] - y[:, 0]) - (x[:, 2] - x[:, 0]) * (y[:, 1] - y[:, 0])
        if np.any(area2 <= 0):
            raise MeshError("mesh has degenerate or inverted triangles")
        G = np.empty((len(P), 3, 2))
        for k in range(3):
            k1, k2 = (k + 1) % 3, (k + 2) % 3
            G[:, k, 0] = (y[:, k1] - y[:, k2]) / area2
            G[:, k, 1] = (x[:, k2] - x[:, k1]) / area2
        return G, 0.5 * area2

    @property
    def basis_gradients(self):
        """Gradients of the three local hat functions, shape ``(ne, 3, 2)``."""
        return self._geometry[0]

    @property
    def areas(self):
        return self._geometry[1]

    @cached_property
    def barycenters(self):
        return self.nodes[self.triangles].mean(axis=1)

    @cached_property
    def lumped_mass(self):
        """Vertex-quadrature weights: one third of each adjacent triangle's area."""
        return np.bincount(self.triangles.ravel(), weights=np.repeat(self.areas / 3.0, 3), minlength=self.n_nodes)

    @cached_property
    def boundary_nodes(self):
        """Boolean mask of nodes on the box boundary."""
        g = self.grid
        J, I = np.divmod(np.arange(self.n_nodes), g.nx + 1)
        return (I == 0) | (I == g.nx) | (J == 0) | (J == g.ny)

    @cached_property
    def sparsity(self):
        """CSR pattern of the P1 stiffness matrix and the scatter map from
        element-local ``(ne, 3, 3)`` entries into its data array."""
        t = self.triangles
        rows = np.repeat(t, 3, axis=1).ravel()
        cols = np.tile(t, (1, 3)).ravel()
        n = self.n_nodes
        key = rows.astype(np.int64) * n + cols
        uniq, scatter = np.unique(key, return_inverse=True)
        r, c = np.divmod(uniq, n)
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.add.at(indptr, r + 1, 1)
        np.cumsum(indptr, out=indptr)
        return indptr, c.astype(np.int64), scatter.ravel()

    def assemble_matrix(self, local):
        """Sum element matrices ``local`` (``(ne, 3, 3)``) into a CSR matrix."""
        indptr, indices, scatter = self.sparsity
        data = np.bincount(scatter, weights=np.asarray(local).ravel(), minlength=len(indices))
        return sp.csr_matrix((data, indices, indptr), shape=(self.n_nodes, self.n_nodes))

    def stiffness(self, coef=None):
        """P1 matrix of ``sum_T coef_T |T| grad(phi_i) . grad(phi_j)``."""
        G, A = self.basis_gradients, self.areas
        w = A if coef is None else A * np.asarray(coef, dtype=float)
        return self.assemble_matrix(w[:, None, None] * np.einsum("ekd,emd->ekm", G, G))

    def mass(self):
        """Consistent P1 mass matrix."""
        local = np.array([[2.0, 1.0, 1.0], [1.0, 2.0, 1.0], [1.0, 1.0, 2.0]]) / 12.0
        return self.assemble_matrix(self.areas[:, None, None] * local[None])


def build_mesh(box, resolution):
    """Uniform right-isosceles triangulation of ``box`` with ``resolution`` cells per unit.

    Raises ``MeshError`` for fewer than two cells per unit length.
    """
    if resolution < 2:
        raise MeshError(f"resolution must be at least 2 cells per unit, got {resolution}")
    grid = Grid.from_box(box, resolution)
    if grid.nx < 1 or grid.ny < 1:
        raise MeshError(f"box {box} has no cells at resolution {resolution}")
    nx, ny = grid.nx, grid.ny
    I, J = np.meshgrid(np.arange(nx), np.arange(ny))
    a = (J * (nx + 1) + I).ravel()
    b, c, d = a + 1, a + nx + 2, a + nx + 1
    tris = np.empty((2 * nx * ny, 3), dtype=np.int64)
    tris[0::2] = np.column_stack([a, b, c])
    tris[1::2] = np.column_stack([a, c, d])
    return Mesh(grid.coordinates(), tris, grid.h, grid)


@dataclass(frozen=True, eq=False)
class DofMap:
    """Partition of mesh nodes into active (free) and fixed (pinned to 0)."""

    mesh: Mesh
    active: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.active, dtype=bool)
        if a.shape != (self.mesh.n_nodes,):
            raise ValueError("active mask must have one entry per node")
        a.setflags(write=False)
        object.__setattr__(self, "active", a)

    @property
    def fixed(self):
        return ~self.active

    @property
    def n_active(self):
        return int(self.active.sum())

    @cached_property
    def active_indices(self):
        return np.flatnonzero(self.active)


@dataclass(frozen=True, eq=False)
class GridFunction:
    """Nodal values of a P1 function on ``mesh``."""

    values: np.ndarray
    mesh: Mesh

    def __post_init__(self):
        v = np.array(self.values, dtype=float).reshape(-1)
        if v.shape != (self.mesh.n_nodes,):
            raise ValueError(f"expected {self.mesh.n_nodes} nodal values, got {v.shape}")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @classmethod
    def from_function(cls, func, mesh):
        xy = mesh.nodes
        return cls(np.broadcast_to(np.asarray(func(xy[:, 0], xy[:, 1]), dtype=float), (mesh.n_nodes,)), mesh)

    @classmethod
    def zeros(cls, mesh):
        return cls(np.zeros(mesh.n_nodes), mesh)

    def respects(self, dofs, value=0.0):
        """True if the function equals ``value`` exactly on every fixed dof."""
        return bool(np.all(self.values[dofs.fixed] == value))

    def __add__(self, other):
        return GridFunction(self.values + _vals(other, self.mesh), self.mesh)

    def __sub__(self, other):
        return GridFunction(self.values - _vals(other, self.mesh), self.mesh)

    def __mul__(self, alpha):
        return GridFunction(float(alpha) * self.values, self.mesh)

    __rmul__ = __mul__

    def __neg__(self):
        return GridFunction(-self.values, self.mesh)

    def to_csv(self, path):
        from .io import write_gridfunction_csv

        write_gridfunction_csv(self, path)

    def to_vtk(self, path, name="u"):
        from .io import write_gridfunction_vtk

        write_gridfunction_vtk(self, path, name=name)


def _vals(other, mesh):
    if isinstance(other, GridFunction):
        if other.mesh.n_nodes != mesh.n_nodes:
            raise ValueError("grid functions live on different meshes")
        return other.values
    return float(other)


def _check_box(mesh, domain):
    if not np.allclose(mesh.box, domain.box, rtol=0, atol=1e-12 * max(1.0, np.ptp(mesh.box))):
        raise ResolutionMismatch(f"mesh box {mesh.box} differs from domain box {domain.box}")


def _cut_cells(mesh, domain):
    """Boolean ``(ny, nx)`` array of grid cells overlapping a complement pixel."""
    g = mesh.grid
    comp = ~domain.mask
    sat = np.zeros((comp.shape[0] + 1, comp.shape[1] + 1), dtype=np.int64)
    sat[1:, 1:] = comp.cumsum(0).cumsum(1)

    def pixel_range(n_cells, n_pix):
        ratio = n_pix / n_cells
        edges = np.arange(n_cells + 1) * ratio
        lo = np.floor(edges[:-1] + 1e-9).astype(int)
        hi = np.ceil(edges[1:] - 1e-9).astype(int)
        return np.clip(lo, 0, n_pix), np.clip(hi, 0, n_pix)

    x0, x1 = pixel_range(g.nx, comp.shape[1])
    y0, y1 = pixel_range(g.ny, comp.shape[0])
    Y0, X0 = np.meshgrid(y0, x0, indexing="ij")
    Y1, X1 = np.meshgrid(y1, x1, indexing="ij")
    count = sat[Y1, X1] - sat[Y0, X1] - sat[Y1, X0] + sat[Y0, X0]
    return count > 0


def restrict_dofs(mesh, domain):
    """Active/fixed partition encoding zero values off ``domain``.

    A node is fixed when it lies on the box boundary or is a corner of a
    grid cell that overlaps at least one complement pixel; every triangle
    touching the complement therefore has all its nodes fixed.
    """
    _check_box(mesh, domain)
    if mesh.fitted:
        raise MeshError("restrict_dofs expects an unfitted mesh; use fit_boundary")
    g = mesh.grid
    cut = _cut_cells(mesh, domain)
    fixed = np.zeros((g.ny + 1, g.nx + 1), dtype=bool)
    fixed[:-1, :-1] |= cut
    fixed[:-1, 1:] |= cut
    fixed[1:, :-1] |= cut
    fixed[1:, 1:] |= cut
    fixed = fixed.ravel() | mesh.boundary_nodes
    return DofMap(mesh, ~fixed)


def signed_distance(domain):
    """Signed distance to the raster boundary, sampled at pixel centres.

    Negative inside the domain.  The boundary is placed half a pixel
    outside the last inside pixel; the box edge itself is not treated as
    boundary.
    """
    m = np.pad(domain.mask, 1, mode="edge")
    px = 1.0 / domain.resolution
    if m.all():
        return np.full(domain.mask.shape, -np.inf)
    if not m.any():
        return np.full(domain.mask.shape, np.inf)
    d_in = ndimage.distance_transform_edt(m) * px
    d_out = ndimage.distance_transform_edt(~m) * px
    phi = np.where(m, -(d_in - 0.5 * px), d_out - 0.5 * px)
    return phi[1:-1, 1:-1]


def fit_boundary(mesh, domain, theta=0.4, iterations=3, min_area=0.05):
    """Move nodes near the domain boundary onto it.

    Nodes whose signed distance is below ``theta * h`` in magnitude are
    projected onto the zero level set (``iterations`` Newton-type steps on
    the bilinearly interpolated distance).  Projected nodes and all nodes
    outside are fixed.  Triangles made degenerate by the projection (area
    below ``min_area * h**2``) are dropped; they must consist of fixed
    nodes only.

    Returns
    -------
    (Mesh, DofMap)
        The fitted mesh (same node numbering) and its dof partition.
    """
    _check_box(mesh, domain)
    h = mesh.h
    phi = signed_distance(domain)
    fixed = mesh.boundary_nodes.copy()
    nodes = mesh.nodes.copy()
    if np.isfinite(phi).any():
        px = 1.0 / domain.resolution
        x0, y0 = domain.box[0], domain.box[1]

        def to_index(xy):
            return np.vstack([(xy[:, 1] - y0) / px - 0.5, (xy[:, 0] - x0) / px - 0.5])

        gy, gx = np.gradient(phi, px)

        def sample(field, xy):
            return ndimage.map_coordinates(field, to_index(xy), order=1, mode="nearest")

        ph = sample(phi, nodes)
        near = np.abs(ph) < theta * h
        fixed |= ph >= -theta * h
        sel = np.flatnonzero(near & ~mesh.boundary_nodes)
        for _ in range(iterations):
            if not len(sel):
                break
            q = nodes[sel]
            grad = np.column_stack([sample(gx, q), sample(gy, q)])
            norm = np.linalg.norm(grad, axis=1)
            ok = norm > 0
            step = np.zeros_like(q)
            step[ok] = (sample(phi, q)[ok] / norm[ok])[:, None] * (grad[ok] / norm[ok, None])
            nodes[sel] = q - step
        box = mesh.box
        nodes[:, 0] = np.clip(nodes[:, 0], box[0], box[2])
        nodes[:, 1] = np.clip(nodes[:, 1], box[1], box[3])
    elif np.all(phi > 0):
        fixed[:] = True
    tris = mesh.triangles
    P = nodes[tris]
    area = 0.5 * ((P[:, 1, 0] - P[:, 0, 0]) * (P[:, 2, 1] - P[:, 0, 1])
                  - (P[:, 2, 0] - P[:, 0, 0]) * (P[:, 1, 1] - P[:, 0, 1]))
    bad = area < min_area * h * h
    if np.any(bad & ~fixed[tris].all(axis=1)):
        raise MeshError("boundary fitting degenerated a triangle with a free node; lower theta")
    fitted = Mesh(nodes, tris[~bad].copy(), h, mesh.grid, fitted=True)
    return fitted, DofMap(fitted, ~fixed)


def gradient(u):
    """Elementwise-constant gradient of a P1 function as a vector FieldSample."""
    m = u.mesh
    g = np.einsum("ek,ekd->ed", u.values[m.triangles], m.basis_gradients)
    return FieldSample(g, m.areas, m.barycenters)


def nodal_sample(u):
    """Nodal values with lumped (vertex) quadrature weights."""
    m = u.mesh
    w = m.lumped_mass
    keep = w > 0
    return FieldSample(u.values[keep], w[keep], m.nodes[keep])


def _poincare_candidates(mesh, dofs, trials, rng):
    idx = dofs.active_indices
    x0, y0, x1, y1 = mesh.box
    X = (mesh.nodes[:, 0] - x0) / (x1 - x0)
    Y = (mesh.nodes[:, 1] - y0) / (y1 - y0)
    for k in range(1, 4):
        for l in range(1, 4):
            v = np.zeros(mesh.n_nodes)
            v[idx] = np.sin(k * np.pi * X[idx]) * np.sin(l * np.pi * Y[idx])
            yield v
    for _ in range(trials):
        v = np.zeros(mesh.n_nodes)
        v[idx] = rng.standard_normal(len(idx))
        yield v
        # a smoothed candidate: a few Jacobi sweeps of the graph Laplacian
        w = v.copy()
        for _ in range(20):
            w[idx] = 0.5 * w[idx] + 0.5 * _neighbour_mean(mesh, w)[idx]
        yield w


def _neighbour_mean(mesh, v):
    t = mesh.triangles
    s = np.zeros(mesh.n_nodes)
    c = np.zeros(mesh.n_nodes)
    for k in range(3):
        for m in range(3):
            if k != m:
                s += np.bincount(t[:, k], weights=v[t[:, m]], minlength=mesh.n_nodes)
                c += np.bincount(t[:, k], minlength=mesh.n_nodes)
    return s / np.maximum(c, 1)


def poincare_check(mesh, dofs, p, trials=20, seed=0):
    """Empirical Poincaré constant ``max ||u||_{p(x)} / ||grad u||_{p(x)}``.

    Candidates are low sine modes restricted to the active dofs plus
    ``trials`` random and smoothed-random active-dof functions.  The
    returned constant is a lower bound for the sharp one.

    Returns
    -------
    dict with keys ``c_emp``, ``candidates``, ``ratios``.
    """
    if dofs.n_active == 0:
        raise ValueError("poincare_check needs at least one active dof")
    rng = np.random.default_rng(seed)
    ratios = []
    for v in _poincare_candidates(mesh, dofs, trials, rng):
        u = GridFunction(v, mesh)
        gn = luxemburg_norm(gradient(u), p)
        if gn == 0.0:
            continue
        ratios.append(luxemburg_norm(nodal_sample(u), p) / gn)
    return {"c_emp": float(max(ratios)), "candidates": len(ratios), "ratios": ratios}
