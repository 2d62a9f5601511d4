"""Energy-minimization solver for the Dirichlet p(x)-Laplacian.

The discrete problem minimizes

    I(u) = sum_T |T| / p_T |grad u|_T^{p_T} - <f, u>

over P1 functions vanishing on fixed dofs, with ``p_T`` the exponent at the
element barycenter.  The singular/degenerate density is regularized as
``(|grad u|^2 + eps^2)^{p/2}`` and ``eps`` is driven to zero by continuation;
each stage runs a damped Newton method with an Armijo line search.

The same core (:func:`minimize_modular`) serves the capacity problems,
which add pinned nonzero values, unit element weights and nodal mass terms.
"""
import json
import math
import warnings
from dataclasses import asdict, dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from . import kernels
from .errors import DegeneratePair, NoActiveDofs, NonConvergence
from .exponent import ExponentField
from .lebesgue import dual_norm_estimate, modular
from .mesh import DofMap, GridFunction, fit_boundary, gradient, restrict_dofs
from .report import Report

DEFAULT_EPS_SCHEDULE = tuple(10.0 ** -k for k in range(2, 11))
ARMIJO_C = 1e-4
#: energy may rise by this relative amount on a step accepted for its residual
ENERGY_SLACK = 1e-14


@dataclass(frozen=True, eq=False)
class SourceTerm:
    """Right-hand side ``f = f0 + d1 f1 + d2 f2``.

    The pairing with a test function is ``int f0 u - sum_i int f_i d_i u``,
    evaluated with vertex quadrature for ``f0`` and element means of the
    nodal ``f_i`` for the divergence part.
    """

    f0: GridFunction = None
    fvec: tuple = None

    def __post_init__(self):
        if self.f0 is None and self.fvec is None:
            raise ValueError("a source term needs f0 or fvec")
        if self.fvec is not None and len(self.fvec) != 2:
            raise ValueError("fvec must be a pair (f1, f2)")

    @property
    def mesh(self):
        return self.f0.mesh if self.f0 is not None else self.fvec[0].mesh

    @classmethod
    def constant(cls, c, mesh):
        return cls(GridFunction(np.full(mesh.n_nodes, float(c)), mesh))

    @classmethod
    def from_functions(cls, mesh, f0=None, f1=None, f2=None):
        """Build from vectorized callables ``f(x, y)``."""
        g0 = GridFunction.from_function(f0, mesh) if f0 is not None else None
        fv = None
        if f1 is not None or f2 is not None:
            zero = lambda x, y: np.zeros_like(x)  # noqa: E731
            fv = (GridFunction.from_function(f1 or zero, mesh), GridFunction.from_function(f2 or zero, mesh))
        return cls(g0, fv)

    def on(self, mesh):
        """The same nodal data attached to ``mesh`` (same node numbering)."""
        g0 = GridFunction(self.f0.values, mesh) if self.f0 is not None else None
        fv = tuple(GridFunction(g.values, mesh) for g in self.fvec) if self.fvec is not None else None
        return SourceTerm(g0, fv)

    def load_vector(self):
        """Nodal vector ``b`` with ``<f, u> = b @ u``."""
        m = self.mesh
        b = np.zeros(m.n_nodes)
        if self.f0 is not None:
            b += m.lumped_mass * self.f0.values
        if self.fvec is not None:
            t = m.triangles
            fbar = np.column_stack([g.values[t].mean(axis=1) for g in self.fvec])
            local = m.areas[:, None] * np.einsum("ekd,ed->ek", m.basis_gradients, fbar)
            b -= np.bincount(t.ravel(), weights=local.ravel(), minlength=m.n_nodes)
        return b

    def is_zero(self):
        parts = ([self.f0] if self.f0 is not None else []) + list(self.fvec or ())
        return all(not np.any(g.values) for g in parts)

    def _combine(self, other, alpha):
        def add(x, y):
            if x is None and y is None:
                return None
            if x is None:
                return alpha * y
            if y is None:
                return x
            return x + alpha * y

        fv = None
        if self.fvec is not None or other.fvec is not None:
            a = self.fvec or (None, None)
            b = other.fvec or (None, None)
            fv = (add(a[0], b[0]), add(a[1], b[1]))
        return SourceTerm(add(self.f0, other.f0), fv)

    def __add__(self, other):
        return self._combine(other, 1.0)

    def __sub__(self, other):
        return self._combine(other, -1.0)

    def __mul__(self, alpha):
        return SourceTerm(alpha * self.f0 if self.f0 is not None else None,
                          tuple(alpha * g for g in self.fvec) if self.fvec is not None else None)

    __rmul__ = __mul__


@dataclass
class SolverOptions:
    """Solver configuration.

    Attributes
    ----------
    tol : float
        Target for the residual measured in the dual norm of the discrete
        Dirichlet inner product, on the final continuation stage.
    max_iter : int
        Newton iterations allowed per continuation stage.
    eps_schedule : tuple of float
        Regularization levels; skipped for purely quadratic problems.
    boundary : {"pin", "fit"}
        ``"pin"`` fixes every node touching the complement on the uniform
        mesh; ``"fit"`` first moves near-boundary nodes onto the boundary.
    fit_theta : float
        Snapping band, in units of h, for ``boundary="fit"``.
    u0 : array, optional
        Initial nodal values on active dofs (zero by default).
    """

    tol: float = 1e-8
    max_iter: int = 200
    eps_schedule: tuple = DEFAULT_EPS_SCHEDULE
    boundary: str = "pin"
    fit_theta: float = 0.4
    u0: np.ndarray = None

    @classmethod
    def from_dict(cls, d):
        d = dict(d or {})
        if "eps_schedule" in d:
            d["eps_schedule"] = tuple(float(e) for e in d["eps_schedule"])
        known = {k: d[k] for k in ("tol", "max_iter", "eps_schedule", "boundary", "fit_theta") if k in d}
        unknown = set(d) - set(known) - {"u0"}
        if unknown:
            raise ValueError(f"unknown solver options: {sorted(unknown)}")
        return cls(**known)


@dataclass
class SolveReport:
    iterations: int = 0
    final_energy: float = 0.0
    residual_dual_estimate: float = 0.0
    energy_trace: list = field(default_factory=list)
    epsilon_schedule: list = field(default_factory=list)
    stage_iterations: list = field(default_factory=list)
    unregularized_residual: float = 0.0
    converged: bool = True
    fallback_steps: int = 0

    def to_dict(self):
        return asdict(self)

    def to_json(self, path=None):
        text = json.dumps(self.to_dict(), indent=2)
        if path is not None:
            with open(path, "w") as fh:
                fh.write(text + "\n")
        return text


# ---------------------------------------------------------------------------
# core minimizer
# ---------------------------------------------------------------------------


class _Problem:
    """sum_T a_T (|g|^2+eps^2)^{p_T/2} + sum_i c_i (u_i^2+eps^2)^{q_i/2} - b.u
    over ``u[free]`` with ``u[~free] = pinned[~free]``."""

    def __init__(self, mesh, free, pinned, aT, pT, b, c=None, q=None):
        self.mesh = mesh
        self.free = np.flatnonzero(free)
        self.base = np.asarray(pinned, dtype=float).copy()
        self.b = b
        if c is not None:
            n = mesh.n_nodes
            c = np.broadcast_to(np.asarray(c, dtype=float), (n,))
            q = np.broadcast_to(np.asarray(2.0 if q is None else q, dtype=float), (n,))
        self.c, self.q = c, q
        # elements with at least one free node carry all the variation;
        # the rest only add a constant
        t = mesh.triangles
        keep = free[t].any(axis=1)
        self.tris = t[keep]
        self.G = mesh.basis_gradients[keep]
        self.aT, self.pT = aT[keep], pT[keep]
        self.const_tris = (t[~keep], mesh.basis_gradients[~keep], aT[~keep], pT[~keep])
        self.quadratic = bool(np.all(pT == 2.0)) and (c is None or bool(np.all(q == 2.0)))
        K = mesh.stiffness()
        self.K = K[self.free][:, self.free].tocsc()
        self._Klu = None
        indptr, indices, scatter = mesh.sparsity
        keep_entries = np.repeat(keep, 9)
        self._scatter = scatter[keep_entries]
        self._pattern = (indptr, indices)

    @property
    def Klu(self):
        if self._Klu is None:
            self._Klu = spla.splu(self.K)
        return self._Klu

    def full(self, x):
        u = self.base.copy()
        u[self.free] = x
        return u

    def energy(self, x, eps):
        u = self.full(x)
        terms, _, _ = kernels.assemble(u, self.tris, self.G, self.aT, self.pT, eps, want_hess=False)
        parts = [math.fsum(terms), -math.fsum(self.b * u)]
        t, G, a, p = self.const_tris
        if len(t):
            parts.append(math.fsum(kernels.assemble(u, t, G, a, p, eps, want_hess=False)[0]))
        if self.c is not None:
            parts.append(math.fsum(self.c * (u * u + eps * eps) ** (0.5 * self.q)))
        return math.fsum(parts)

    def gradient(self, x, eps, want_hess):
        u = self.full(x)
        _, g, hloc = kernels.assemble(u, self.tris, self.G, self.aT, self.pT, eps, want_hess=want_hess)
        g = g - self.b
        diag = None
        if self.c is not None:
            s = u * u + eps * eps
            pos = s > 0
            d1 = np.zeros_like(u)
            d1[pos] = self.c[pos] * self.q[pos] * s[pos] ** (0.5 * self.q[pos] - 1.0)
            d1[~pos & (self.q == 2.0)] = 2.0 * self.c[~pos & (self.q == 2.0)]
            g = g + d1 * u
            if want_hess:
                d2 = np.zeros_like(u)
                d2[pos] = self.c[pos] * self.q[pos] * (self.q[pos] - 2.0) * s[pos] ** (0.5 * self.q[pos] - 2.0)
                diag = d1 + d2 * u * u
        gf = g[self.free]
        if not want_hess:
            return gf, None
        indptr, indices = self._pattern
        n = self.mesh.n_nodes
        data = np.bincount(self._scatter, weights=hloc.ravel(), minlength=len(indices))
        H = sp.csr_matrix((data, indices, indptr), shape=(n, n))
        if diag is not None:
            H = H + sp.diags(diag)
        return gf, H[self.free][:, self.free].tocsc()

    def dual_residual(self, r):
        return float(math.sqrt(max(float(r @ self.Klu.solve(r)), 0.0)))


def _newton_direction(H, r, K):
    """Solve ``H d = -r``; if ``H`` is numerically singular (vanishing
    gradients with tiny eps), shift it by a small multiple of ``K``."""
    scale = abs(H.diagonal()).max() / abs(K.diagonal()).max()
    for shift in (0.0, 1e-12, 1e-8, 1e-4):
        A = H if shift == 0.0 else (H + (shift * scale) * K).tocsc()
        try:
            with warnings.catch_warnings():
                warnings.simplefilter("error", spla.MatrixRankWarning)
                d = spla.splu(A).solve(-r)
        except (RuntimeError, spla.MatrixRankWarning):
            continue
        if np.all(np.isfinite(d)):
            return d
    return None


def _newton_stage(prob, x, eps, tol, max_iter, trace, stats):
    E = prob.energy(x, eps)
    trace.append(E)
    r, H = prob.gradient(x, eps, True)
    res = prob.dual_residual(r)
    it = 0
    while res > tol and it < max_iter:
        it += 1
        d = _newton_direction(H, r, prob.K)
        if d is None or not np.all(np.isfinite(d)) or float(r @ d) >= 0.0:
            d = -prob.Klu.solve(r)
            stats["fallback"] += 1
        slope = float(r @ d)
        alpha, accepted = 1.0, False
        for _ in range(50):
            xt = x + alpha * d
            Et = prob.energy(xt, eps)
            if Et <= E + ARMIJO_C * alpha * slope:
                accepted = True
                break
            alpha *= 0.5
        if not accepted:
            # energy differences are below rounding: take the full step if
            # it reduces the residual without measurably raising the energy
            xt = x + d
            Et = prob.energy(xt, eps)
            rt, _ = prob.gradient(xt, eps, False)
            if Et <= E + ENERGY_SLACK * max(1.0, abs(E)) and prob.dual_residual(rt) < res:
                accepted = True
            else:
                break
        x, E = xt, Et
        trace.append(E)
        r, H = prob.gradient(x, eps, True)
        res = prob.dual_residual(r)
    return x, res, it


def minimize_modular(mesh, free, pinned, aT, pT, b, c=None, q=None, opts=None):
    """Run the continuation/Newton solver on a generic modular energy.

    Returns ``(u, SolveReport)`` with ``u`` the full nodal vector.
    Raises ``NonConvergence`` when the final stage misses ``opts.tol``.
    """
    opts = opts or SolverOptions()
    free = np.asarray(free, dtype=bool)
    if not free.any():
        raise NoActiveDofs("no active degrees of freedom")
    prob = _Problem(mesh, free, pinned, aT, pT, b, c, q)
    schedule = [0.0] if prob.quadratic else [float(e) for e in opts.eps_schedule]
    x = np.zeros(len(prob.free)) if opts.u0 is None else np.asarray(opts.u0, dtype=float)[prob.free].copy()
    report = SolveReport(epsilon_schedule=schedule)
    stats = {"fallback": 0}
    res = np.inf
    for k, eps in enumerate(schedule):
        last = k == len(schedule) - 1
        stage_tol = opts.tol if last else max(opts.tol, 0.1 * eps)
        x, res, it = _newton_stage(prob, x, eps, stage_tol, opts.max_iter, report.energy_trace, stats)
        report.stage_iterations.append(it)
        report.iterations += it
    report.residual_dual_estimate = res
    report.final_energy = report.energy_trace[-1]
    report.fallback_steps = stats["fallback"]
    r0, _ = prob.gradient(x, 0.0, False)
    report.unregularized_residual = prob.dual_residual(r0) if np.all(np.isfinite(r0)) else float("inf")
    report.converged = res <= opts.tol
    if not report.converged:
        raise NonConvergence(report.iterations, res)
    return prob.full(x), report


# ---------------------------------------------------------------------------
# Dirichlet problem
# ---------------------------------------------------------------------------


def _element_exponent(p, mesh):
    if isinstance(p, ExponentField):
        return p.at(mesh.barycenters)
    return np.full(mesh.n_triangles, float(p))


def energy(u, f, p):
    """Discrete ``I(u) = sum_T |T|/p_T |grad u|^{p_T} - <f, u>``."""
    m = u.mesh
    pT = _element_exponent(p, m)
    g = gradient(u)
    dirichlet = math.fsum(g.weights / pT * g.magnitude ** pT)
    return math.fsum([dirichlet, -math.fsum(f.on(m).load_vector() * u.values)])


def residual(u, f, p, dofs=None):
    """``<-div(|grad u|^{p-2} grad u) - f, phi_i>`` for every hat ``phi_i``
    (or only the active ones when ``dofs`` is given); the gradient of
    :func:`energy`."""
    m = u.mesh
    pT = _element_exponent(p, m)
    _, g, _ = kernels.assemble(u.values, m.triangles, m.basis_gradients, m.areas / pT, pT, 0.0, want_hess=False)
    r = g - f.on(m).load_vector()
    return r if dofs is None else r[dofs.active]


def _discretize(o, f, opts):
    mesh = f.mesh
    if opts.boundary == "fit":
        mesh, dofs = fit_boundary(mesh, o, theta=opts.fit_theta)
        f = f.on(mesh)
    elif opts.boundary == "pin":
        dofs = restrict_dofs(mesh, o)
    else:
        raise ValueError(f"unknown boundary treatment {opts.boundary!r}")
    return mesh, dofs, f


def solve_on_dofs(dofs, f, p, opts=None):
    """Minimize the Dirichlet energy over functions vanishing on fixed dofs."""
    opts = opts or SolverOptions()
    mesh = dofs.mesh
    if dofs.n_active == 0:
        raise NoActiveDofs("domain has no active degrees of freedom at this resolution")
    f = f.on(mesh)
    if f.is_zero():
        rep = SolveReport(epsilon_schedule=[], energy_trace=[0.0])
        return GridFunction.zeros(mesh), rep
    pT = _element_exponent(p, mesh)
    b = f.load_vector()
    u, rep = minimize_modular(mesh, dofs.active, np.zeros(mesh.n_nodes), mesh.areas / pT, pT, b, opts=opts)
    u[dofs.fixed] = 0.0
    return GridFunction(u, mesh), rep


def solve_dirichlet(o, f, p, opts=None):
    """Solve ``-div(|grad u|^{p(x)-2} grad u) = f`` in ``o``, ``u = 0`` outside.

    Parameters
    ----------
    o : RasterDomain
        Domain; its box must match the mesh of ``f``.
    f : SourceTerm
    p : ExponentField
    opts : SolverOptions

    Returns
    -------
    (GridFunction, SolveReport)
    """
    opts = opts or SolverOptions()
    mesh, dofs, f = _discretize(o, f, opts)
    return solve_on_dofs(dofs, f, p, opts)


# ---------------------------------------------------------------------------
# checks
# ---------------------------------------------------------------------------


def a_priori_bound_check(u, f, p, dofs=None):
    """Check ``rho(grad u) <= max(1, ||f||^{p-/(p- - 1)})``.

    ``||f||`` is the dual-norm estimate, which is a lower bound; the
    solution itself is added to the estimator's dictionary so the chain
    ``rho = <f,u> <= ||f|| ||grad u||`` holds for the estimate as well.
    """
    m = u.mesh
    rho = modular(gradient(u), p)
    if f.is_zero():
        fn = 0.0
    else:
        fn = dual_norm_estimate(f.on(m), p, m, dofs=dofs, candidates=[u.values])
    pm = p.p_minus if isinstance(p, ExponentField) else float(p)
    bound = max(1.0, fn ** (pm / (pm - 1.0)))
    passed = rho <= bound * (1.0 + 1e-9)
    return Report("a_priori_bound", passed, {
        "modular_gradient": rho, "dual_norm_estimate": fn, "bound": bound,
        "margin": (bound - rho) / bound,
        "caveat": "dual norm is a lower estimate; the bound is a one-sided sanity check",
    })


def _simon_lhs(a, b, p):
    na = np.linalg.norm(a, axis=-1, keepdims=True)
    nb = np.linalg.norm(b, axis=-1, keepdims=True)
    with np.errstate(divide="ignore", invalid="ignore"):
        fa = np.where(na > 0, na ** (p - 2.0) * a, 0.0)
        fb = np.where(nb > 0, nb ** (p - 2.0) * b, 0.0)
    return np.einsum("...d,...d->...", fb - fa, b - a)


def _simon_rhs_unit(a, b, p):
    d = np.linalg.norm(b - a, axis=-1)
    if p >= 2.0:
        return d ** p
    s = np.linalg.norm(a, axis=-1) + np.linalg.norm(b, axis=-1)
    return d * d / s ** (2.0 - p)


def calibrate_simon_constant(p, samples=100_000, seed=0, dim=2):
    """Half the smallest observed ratio lhs / rhs over random vector pairs."""
    rng = np.random.default_rng(seed)
    # mix scales so that both the near-zero and the large regimes are probed
    scale_a = 10.0 ** rng.uniform(-3, 3, size=(samples, 1))
    a = rng.standard_normal((samples, dim)) * scale_a
    b = a + rng.standard_normal((samples, dim)) * scale_a * 10.0 ** rng.uniform(-3, 1, size=(samples, 1))
    rhs = _simon_rhs_unit(a, b, p)
    ok = rhs > 0
    ratio = _simon_lhs(a, b, p)[ok] / rhs[ok]
    return 0.5 * float(ratio.min()), float(ratio.min())


def simon_inequality_check(a, b, p, c1=None):
    """Check the monotonicity inequality for ``|x|^{p-2} x``.

    ``(|b|^{p-2} b - |a|^{p-2} a).(b - a) >= c1 |b - a|^p`` for ``p >= 2`` and
    ``>= c1 |b - a|^2 / (|a| + |b|)^{2-p}`` for ``p < 2``.  ``a`` and ``b``
    may be single vectors or stacks of vectors.  When ``c1`` is not given it
    is calibrated as half the minimum ratio over random pairs.
    """
    a = np.atleast_2d(np.asarray(a, dtype=float))
    b = np.atleast_2d(np.asarray(b, dtype=float))
    p = float(p)
    if p <= 1.0:
        raise ValueError("p must exceed 1")
    if p < 2.0:
        s = np.linalg.norm(a, axis=-1) + np.linalg.norm(b, axis=-1)
        if np.any(s == 0):
            raise DegeneratePair("a = b = 0 makes the p < 2 right-hand side 0/0")
    if c1 is None:
        c1 = 1.0 if p == 2.0 else calibrate_simon_constant(p)[0]
    lhs = _simon_lhs(a, b, p)
    rhs = c1 * _simon_rhs_unit(a, b, p)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(rhs > 0, lhs / np.where(rhs > 0, rhs, 1.0), np.inf)
    passed = bool(np.all(lhs >= rhs * (1.0 - 1e-12) - 1e-300))
    return Report("simon_inequality", passed, {
        "c1": c1, "lhs": lhs, "rhs": rhs, "min_ratio": float(ratio.min()) if ratio.size else np.inf,
    })


def compare_solutions(u, v, tol=1e-8):
    """Report ``max(u - v)`` over nodes; passes when it is at most ``tol``."""
    if u.mesh.n_nodes != v.mesh.n_nodes:
        raise ValueError("solutions must live on the same mesh")
    d = u.values - v.values
    k = int(np.argmax(d))
    return Report("comparison", bool(d[k] <= tol), {
        "max_violation": float(d[k]), "argmax_node": k, "tol": tol,
        "point": u.mesh.nodes[k].tolist(),
    })


def default_stability_beta(p):
    """Exponent beta of the stability estimate derived from the proof.

    Regions with p >= 2 contribute the conjugate exponent of p_+ (at least
    that of the largest exponent present), regions with p < 2 contribute
    p_- / 2; the smallest active contribution is used.
    """
    pm, pp = (p.p_minus, p.p_plus) if isinstance(p, ExponentField) else (float(p), float(p))
    cands = []
    if pp >= 2.0:
        cands.append(pp / (pp - 1.0))
    if pm < 2.0:
        cands.append(pm / 2.0)
    return min(cands)


def stability_check(f1, f2, o, p, opts=None, beta=None):
    """Compare ``rho(grad u1 - grad u2)`` with ``d + d**beta``, ``d`` the dual-norm
    estimate of ``f1 - f2``.  Returns the ratio; the boundedness verdict is
    made along a sequence by :func:`stability_sequence`."""
    opts = opts or SolverOptions()
    beta = default_stability_beta(p) if beta is None else float(beta)
    mesh, dofs, f1 = _discretize(o, f1, opts)
    f2 = f2.on(mesh)
    u1, _ = solve_on_dofs(dofs, f1, p, opts)
    u2, _ = solve_on_dofs(dofs, f2, p, opts)
    lhs = modular(gradient(u1 - u2), p)
    df = f1 - f2
    d = 0.0 if df.is_zero() else dual_norm_estimate(df, p, mesh, dofs=dofs, candidates=[(u1 - u2).values])
    denom = d + d ** beta
    ratio = lhs / denom if denom > 0 else (0.0 if lhs == 0 else np.inf)
    return Report("stability", bool(np.isfinite(ratio)), {
        "lhs": lhs, "dual_norm_estimate": d, "beta": beta, "ratio": ratio,
    })


def stability_sequence(f, g, o, p, ts=None, opts=None, beta=None, bound=50.0, normalize=True):
    """Run :func:`stability_check` on ``(f, f + t g)`` for each ``t``.

    With ``normalize`` the perturbation ``g`` is first scaled to unit
    dual-norm estimate.  Passes when max/min of the ratio sequence is at
    most ``bound``.
    """
    opts = opts or SolverOptions()
    ts = [2.0 ** -k for k in range(7)] if ts is None else list(ts)
    mesh, dofs, f = _discretize(o, f, opts)
    g = g.on(mesh)
    if normalize:
        gn = dual_norm_estimate(g, p, mesh, dofs=dofs)
        if gn > 0:
            g = (1.0 / gn) * g
    beta = default_stability_beta(p) if beta is None else float(beta)
    u1, _ = solve_on_dofs(dofs, f, p, opts)
    rows = []
    for t in ts:
        f2 = f + t * g
        u2, _ = solve_on_dofs(dofs, f2, p, opts)
        du = u2 - u1
        lhs = modular(gradient(du), p)
        d = dual_norm_estimate(t * g, p, mesh, dofs=dofs, candidates=[du.values])
        rows.append({"t": t, "lhs": lhs, "dual_norm_estimate": d, "ratio": lhs / (d + d ** beta)})
    ratios = np.array([r["ratio"] for r in rows])
    spread = float(ratios.max() / ratios.min()) if ratios.min() > 0 else np.inf
    return Report("stability_sequence", spread <= bound, {
        "beta": beta, "rows": rows, "spread": spread, "bound": bound,
    })
