"""Scripted domain-convergence experiments producing CSV tables.

Each ``run_*`` function takes an :class:`ExperimentConfig` and returns a
:class:`ConvergenceTable` (or a report-like table for the perforated-square
run) whose ``assertions`` dict records every pass/fail verdict.  Tables are
written with ``%.17g`` formatting, so identical configs give identical bytes.
"""
import csv
import math
import sys
from dataclasses import dataclass, field

import numpy as np

from . import descriptors, kernels
from .capacity import alpha_r_condition_check, calibrate_alpha, relative_capacity
from .errors import (ComponentBudgetExceeded, ConditionCheckFailed, DescriptorError, PreconditionViolated)
from .exponent import make_exponent
from .geometry import (RasterDomain, cioranescu_murat_domain, complement_components,
                       hausdorff_complementary_distance, make_generator)
from .lebesgue import luxemburg_norm, modular
from .mesh import GridFunction, build_mesh, gradient, nodal_sample, restrict_dofs
from .solver import SolverOptions, SourceTerm, minimize_modular, solve_on_dofs

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover - exercised on 3.10
    import tomli as tomllib

KINDS = ("sverak", "capcond", "cm", "indep", "alpha")


# ---------------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------------


@dataclass
class ExperimentConfig:
    """Experiment description, usually loaded from TOML.

    Keys: ``kind``, ``exponent``, ``source``, ``sequence``, ``box``,
    ``resolution`` (mesh cells per unit), ``mask_resolution`` (pixels per
    unit, defaults to ``resolution``), ``indices``, ``out``; optional
    ``component_budget``, ``sources`` (independence run), ``alpha``,
    ``r0``, ``holder_delta``, ``assert_trend``, ``capacity_samples``,
    ``capacity_resolution`` and a ``[solver]`` table.
    """

    kind: str
    exponent: str = "constant(2)"
    source: str = "constant(1)"
    sequence: str = "constant(full)"
    box: tuple = (0.0, 0.0, 1.0, 1.0)
    resolution: int = 64
    mask_resolution: int = None
    indices: tuple = (1,)
    out: str = None
    component_budget: int = None
    sources: tuple = ("constant(1)", "bump(0.5, 0.5, 0.15)", "sines(1, 2)", "dx(bump(0.5, 0.5, 0.2))")
    alpha: float = None
    r0: float = 0.08
    holder_delta: float = 0.5
    holder_factor: float = 2.0
    assert_trend: bool = True
    capacity_samples: int = 4
    capacity_resolution: int = None
    solver: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown experiment kind {self.kind!r}; expected one of {KINDS}")
        self.box = tuple(float(b) for b in self.box)
        self.indices = tuple(int(n) for n in self.indices)
        if not self.indices:
            raise ValueError("indices must be nonempty")
        if any(b <= a for a, b in zip(self.indices, self.indices[1:])):
            raise ValueError("indices must be strictly increasing")
        if self.mask_resolution is None:
            self.mask_resolution = self.resolution
        if self.mask_resolution % self.resolution:
            raise ValueError("mask_resolution must be a multiple of resolution")
        self.sources = tuple(self.sources)

    @classmethod
    def from_dict(cls, d):
        return cls(**d)

    @classmethod
    def from_toml(cls, path, **overrides):
        with open(path, "rb") as fh:
            d = tomllib.load(fh)
        d.update({k: v for k, v in overrides.items() if v is not None})
        return cls.from_dict(d)

    @property
    def solver_options(self):
        return SolverOptions.from_dict(self.solver)


# ---------------------------------------------------------------------------
# sources
# ---------------------------------------------------------------------------


def _scalar_function(tree):
    if isinstance(tree, float):
        return lambda x, y: np.full_like(x, tree)
    name, args = tree
    if name == "constant":
        (c,) = descriptors.numbers(args, name, 1)
        return lambda x, y: np.full_like(x, c)
    if name == "bump":
        cx, cy, w = descriptors.numbers(args, name, 3)
        return lambda x, y: np.exp(-((x - cx) ** 2 + (y - cy) ** 2) / w**2)
    if name == "sines":
        k, l = descriptors.numbers(args, name, 2)
        return lambda x, y: np.sin(k * np.pi * x) * np.sin(l * np.pi * y)
    if name == "affine":
        a, b, c = descriptors.numbers(args, name, 3)
        return lambda x, y: a + b * x + c * y
    raise DescriptorError(f"unknown source {name!r}")


def make_source(desc, mesh):
    """Source term from a descriptor.

    ``constant(c)``, ``bump(cx, cy, w)`` (Gaussian), ``sines(k, l)``
    (``sin(k pi x) sin(l pi y)``), ``affine(a, b, c)``; ``dx(g)`` and
    ``dy(g)`` give the divergence-form sources ``d1 g`` and ``d2 g``;
    ``sum(a, b, ...)`` adds sources.
    """
    tree = descriptors.parse(desc) if isinstance(desc, str) else desc
    if isinstance(tree, tuple) and tree[0] in ("dx", "dy"):
        if len(tree[1]) != 1:
            raise DescriptorError(f"{tree[0]} takes one argument")
        g = _scalar_function(tree[1][0])
        if tree[0] == "dx":
            return SourceTerm.from_functions(mesh, f1=g)
        return SourceTerm.from_functions(mesh, f2=g)
    if isinstance(tree, tuple) and tree[0] == "sum":
        parts = [make_source(a, mesh) for a in tree[1]]
        out = parts[0]
        for s in parts[1:]:
            out = out + s
        return out
    return SourceTerm.from_functions(mesh, f0=_scalar_function(tree))


# ---------------------------------------------------------------------------
# tables
# ---------------------------------------------------------------------------


class ConvergenceTable:
    """Rows keyed by ``n`` plus the verdicts of the run's assertions."""

    def __init__(self, columns, name=""):
        self.columns = list(columns)
        self.rows = {}
        self.name = name
        self.assertions = {}
        self.info = {}

    def add(self, n, **values):
        missing = set(self.columns) - {"n"} - set(values)
        if missing:
            raise ValueError(f"missing columns {sorted(missing)}")
        self.rows[int(n)] = {"n": int(n), **values}

    def column(self, name):
        return np.array([self.rows[n][name] for n in sorted(self.rows)], dtype=float)

    @property
    def ns(self):
        return sorted(self.rows)

    @property
    def passed(self):
        return all(bool(v) for v in self.assertions.values())

    def to_csv(self, path=None):
        lines = [",".join(self.columns)]
        for n in sorted(self.rows):
            row = self.rows[n]
            lines.append(",".join(_fmt(row[c]) for c in self.columns))
        text = "\n".join(lines) + "\n"
        if path is not None:
            with open(path, "w", newline="") as fh:
                fh.write(text)
        return text

    def report(self):
        return {"experiment": self.name, "passed": self.passed,
                "assertions": {k: bool(v) for k, v in self.assertions.items()}, "info": _plain(self.info)}


def _fmt(v):
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return "%.17g" % float(v)


def _plain(v):
    if isinstance(v, dict):
        return {k: _plain(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_plain(x) for x in v]
    if isinstance(v, np.generic):
        return v.item()
    if isinstance(v, float) and not math.isfinite(v):
        return str(v)
    return v


def read_table_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def trend_decreases(values, floor=0.0):
    """Last-third mean of ``values - floor`` at most half the first-third mean."""
    v = np.asarray(values, dtype=float) - floor
    k = max(1, len(v) // 3)
    first, last = float(np.mean(v[:k])), float(np.mean(v[-k:]))
    return bool(last <= 0.5 * first), first, last


# ---------------------------------------------------------------------------
# shared machinery
# ---------------------------------------------------------------------------


class _Setup:
    def __init__(self, cfg):
        self.cfg = cfg
        self.mesh = build_mesh(cfg.box, cfg.resolution)
        self.p = make_exponent(cfg.exponent, self.mesh)
        self.opts = cfg.solver_options

    def solve(self, domain, f):
        dofs = restrict_dofs(self.mesh, domain)
        if dofs.n_active == 0:
            return GridFunction.zeros(self.mesh)
        return solve_on_dofs(dofs, f, self.p, self.opts)[0]

    def errors(self, u, u_inf):
        d = u - u_inf
        return modular(gradient(d), self.p), luxemburg_norm(nodal_sample(d), self.p), modular(gradient(u), self.p)


def _floor_run(setup, domain, f, u_ref):
    """Error of re-solving on the limit domain: the discretization floor."""
    u = setup.solve(domain, f)
    return setup.errors(u, u_ref)[0]


def run_sverak(cfg):
    """Domain sequence with a bounded number of complement components.

    Checks the component budget for every index before solving, then
    tabulates distances and errors against the limit-domain solution.
    Asserts the trend of the gradient-modular error column.
    """
    setup = _Setup(cfg)
    gen = make_generator(cfg.sequence, cfg.mask_resolution, cfg.box)
    domains = {n: gen.domain(n) for n in cfg.indices}
    comps = {n: complement_components(o) for n, o in domains.items()}
    budget = cfg.component_budget if cfg.component_budget is not None else max(comps.values())
    over = {n: c for n, c in comps.items() if c > budget}
    if over:
        raise ComponentBudgetExceeded(f"complement components exceed budget {budget}: {over}")
    limit = gen.limit()
    f = make_source(cfg.source, setup.mesh)
    u_inf = setup.solve(limit, f)
    table = ConvergenceTable(["n", "dH", "components", "rho_grad_err", "lp_err", "grad_modular"], "sverak")
    for n in cfg.indices:
        u = setup.solve(domains[n], f)
        e_grad, e_lp, gm = setup.errors(u, u_inf)
        table.add(n, dH=float(hausdorff_complementary_distance(domains[n], limit)), components=comps[n],
                  rho_grad_err=e_grad, lp_err=e_lp, grad_modular=gm)
    floor = _floor_run(setup, limit, f, u_inf)
    table.info.update({"floor": floor, "component_budget": budget, "limit_note": gen.limit_note,
                       "h": setup.mesh.h, "pixel": 1.0 / cfg.mask_resolution})
    if cfg.assert_trend and len(cfg.indices) > 1:
        ok, first, last = trend_decreases(table.column("rho_grad_err"), floor)
        table.assertions["rho_grad_err_trend"] = ok
        table.info["rho_grad_err_thirds"] = [first, last]
        ok, first, last = trend_decreases(table.column("lp_err"), floor)
        table.assertions["lp_err_trend"] = ok
        table.info["lp_err_thirds"] = [first, last]
    table.info["lp_err_strictly_decreasing"] = bool(np.all(np.diff(table.column("lp_err")) < 0))
    table.assertions["floor_is_zero"] = floor <= setup.opts.tol
    return table


def run_capacity_condition(cfg):
    """Pair ``cap(Omega_n \\ Omega, D)`` with the solution errors.

    ``D`` is the full box.  With ``assert_trend`` both columns must
    decrease; otherwise (e.g. for the perforated square, whose removed sets
    keep their capacity) the table only records the behaviour.
    """
    setup = _Setup(cfg)
    gen = make_generator(cfg.sequence, cfg.mask_resolution, cfg.box)
    limit = gen.limit()
    full = RasterDomain.full(cfg.box, cfg.mask_resolution)
    f = make_source(cfg.source, setup.mesh)
    u_inf = setup.solve(limit, f)
    table = ConvergenceTable(["n", "dH", "components", "cap", "rho_grad_err", "lp_err", "grad_modular"], "capcond")
    for n in cfg.indices:
        o = gen.domain(n)
        extra = o - limit
        cap = 0.0
        if extra.mask.any():
            cap = relative_capacity(extra, full, setup.p, setup.mesh, setup.opts).value
        u = setup.solve(o, f)
        e_grad, e_lp, gm = setup.errors(u, u_inf)
        table.add(n, dH=float(hausdorff_complementary_distance(o, limit)), components=complement_components(o),
                  cap=cap, rho_grad_err=e_grad, lp_err=e_lp, grad_modular=gm)
    caps = table.column("cap")
    table.info["capacity_to_zero"] = bool(len(caps) > 1 and trend_decreases(caps)[0]) or bool(np.all(caps == 0))
    table.info["limit_note"] = gen.limit_note
    if cfg.assert_trend and len(cfg.indices) > 1:
        errs = table.column("rho_grad_err")
        if np.all(caps == 0):
            table.assertions["zero_columns"] = bool(np.all(errs <= setup.opts.tol))
        else:
            table.assertions["cap_trend"] = trend_decreases(caps)[0]
            table.assertions["rho_grad_err_trend"] = trend_decreases(errs)[0]
    return table


def _limit_with_mass(mesh, f, coef):
    """Solve ``-Laplace u + coef u = f`` on the box (zero on its boundary)."""
    free = ~mesh.boundary_nodes
    pT = np.full(mesh.n_triangles, 2.0)
    u, _ = minimize_modular(mesh, free, np.zeros(mesh.n_nodes), mesh.areas / 2.0, pT, f.load_vector(),
                            c=mesh.lumped_mass * (coef / 2.0), q=np.full(mesh.n_nodes, 2.0))
    return GridFunction(u, mesh)


def _l2(u):
    m = u.mesh.lumped_mass
    return math.sqrt(math.fsum(m * u.values**2))


def run_cioranescu_murat(cfg):
    """Perforated square with holes of radius ``n**-2``.

    Solves on each ``Omega_n``, on the full square (``u_D``) and the
    limit problem with zeroth-order coefficient ``2/pi`` (``u*``).  Asserts
    that at the largest ``n`` the solution is closer to ``u*`` than to ``u_D``.
    """
    setup = _Setup(cfg)
    if setup.p.p_minus != 2.0 or setup.p.p_plus != 2.0:
        raise PreconditionViolated("the perforated-square limit is stated for p = 2")
    if cfg.box != (0.0, 0.0, 1.0, 1.0):
        raise PreconditionViolated("the perforated square lives in the unit box")
    domains = {n: cioranescu_murat_domain(n, cfg.mask_resolution) for n in cfg.indices}
    f = make_source(cfg.source, setup.mesh)
    full = RasterDomain.full(cfg.box, cfg.mask_resolution)
    if f.is_zero():
        u_D = u_star = GridFunction.zeros(setup.mesh)
    else:
        u_D = setup.solve(full, f)
        u_star = _limit_with_mass(setup.mesh, f, 2.0 / math.pi)
    table = ConvergenceTable(["n", "holes", "components", "dist_u_star", "dist_u_D", "l2_u_n"], "cm")
    for n in cfg.indices:
        u = setup.solve(domains[n], f)
        table.add(n, holes=(n - 1) ** 2, components=complement_components(domains[n]),
                  dist_u_star=_l2(u - u_star), dist_u_D=_l2(u - u_D), l2_u_n=_l2(u))
    last = table.rows[table.ns[-1]]
    table.info.update({"l2_u_star": _l2(u_star), "l2_u_D": _l2(u_D), "h": setup.mesh.h,
                       "pixel": 1.0 / cfg.mask_resolution})
    if f.is_zero():
        table.assertions["zero_source_zero_distances"] = last["dist_u_star"] == 0.0 and last["dist_u_D"] == 0.0
    else:
        table.assertions["closer_to_strange_term_limit"] = last["dist_u_star"] < last["dist_u_D"]
    return table


def _label(desc):
    return "".join(ch if ch.isalnum() else "_" for ch in desc).strip("_")


def run_independence(cfg):
    """Run one domain sequence with several sources.

    The first source is the reference (``cfg.source``); every other
    source's error column must show the same verdict (decrease or not)
    as the reference column.
    """
    setup = _Setup(cfg)
    gen = make_generator(cfg.sequence, cfg.mask_resolution, cfg.box)
    limit = gen.limit()
    srcs = [cfg.source] + [s for s in cfg.sources if s != cfg.source]
    labels = [_label(s) for s in srcs]
    table = ConvergenceTable(["n", "dH"] + [f"err_{l}" for l in labels], "indep")
    domains = {n: gen.domain(n) for n in cfg.indices}
    cols = {}
    for desc, lab in zip(srcs, labels):
        f = make_source(desc, setup.mesh)
        u_inf = setup.solve(limit, f)
        cols[lab] = [setup.errors(setup.solve(domains[n], f), u_inf)[0] for n in cfg.indices]
    for k, n in enumerate(cfg.indices):
        table.add(n, dH=float(hausdorff_complementary_distance(domains[n], limit)),
                  **{f"err_{l}": cols[l][k] for l in labels})
    if len(cfg.indices) > 1:
        verdicts = {l: trend_decreases(cols[l])[0] for l in labels}
        table.info["decreases"] = verdicts
        ref = verdicts[labels[0]]
        table.assertions["consistent_with_reference"] = all(v == ref for v in verdicts.values())
        if cfg.assert_trend:
            table.assertions["reference_decreases"] = ref
    return table


def run_alpha_class(cfg):
    """Domains satisfying a uniform capacity density condition.

    ``alpha`` defaults to half the minimum sampled capacity of the limit
    domain.  Every ``Omega_n`` must pass the condition (else
    ``ConditionCheckFailed``).  Adds the discrete Hölder seminorm of each
    solution and asserts it stays within ``holder_factor`` times that of
    the limit solution.
    """
    setup = _Setup(cfg)
    gen = make_generator(cfg.sequence, cfg.mask_resolution, cfg.box)
    limit = gen.limit()
    cres = cfg.capacity_resolution or cfg.resolution
    alpha = cfg.alpha
    if alpha is None:
        alpha = calibrate_alpha(limit, setup.p, cfg.r0, cfg.capacity_samples, cres, setup.opts)
    checks = {}
    for n in cfg.indices:
        rep = alpha_r_condition_check(gen.domain(n), setup.p, alpha, cfg.r0, cfg.capacity_samples, cres, setup.opts)
        checks[n] = rep.min_capacity
        if not rep.passed:
            raise ConditionCheckFailed(f"domain n={n} fails the capacity density condition: "
                                       f"min capacity {rep.min_capacity:.4g} < alpha {alpha:.4g}")
    f = make_source(cfg.source, setup.mesh)
    u_inf = setup.solve(limit, f)
    nodes = setup.mesh.nodes
    hold_inf = kernels.holder_seminorm(nodes, u_inf.values, cfg.holder_delta)
    table = ConvergenceTable(["n", "dH", "components", "rho_grad_err", "lp_err", "grad_modular", "min_cap", "holder"],
                             "alpha")
    for n in cfg.indices:
        o = gen.domain(n)
        u = setup.solve(o, f)
        e_grad, e_lp, gm = setup.errors(u, u_inf)
        table.add(n, dH=float(hausdorff_complementary_distance(o, limit)), components=complement_components(o),
                  rho_grad_err=e_grad, lp_err=e_lp, grad_modular=gm, min_cap=checks[n],
                  holder=kernels.holder_seminorm(nodes, u.values, cfg.holder_delta))
    table.info.update({"alpha": alpha, "r0": cfg.r0, "holder_limit": hold_inf, "delta": cfg.holder_delta})
    hold = table.column("holder")
    table.assertions["holder_bounded"] = bool(np.all(hold <= cfg.holder_factor * max(hold_inf, hold.min())))
    errs = table.column("rho_grad_err")
    if cfg.assert_trend and len(cfg.indices) > 1:
        if np.all(errs == 0):
            table.assertions["zero_errors"] = True
        else:
            table.assertions["rho_grad_err_trend"] = trend_decreases(errs)[0]
    return table


RUNNERS = {
    "sverak": run_sverak,
    "capcond": run_capacity_condition,
    "cm": run_cioranescu_murat,
    "indep": run_independence,
    "alpha": run_alpha_class,
}


def run(cfg):
    return RUNNERS[cfg.kind](cfg)
