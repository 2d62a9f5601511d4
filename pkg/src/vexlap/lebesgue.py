"""Modulars and Luxemburg norms of sampled fields.

A :class:`FieldSample` is a quadrature rule (points, positive weights)
together with the integrand values at its points.  Vector-valued samples
(gradients) are reduced to their Euclidean magnitudes.  All sums use
compensated summation (:func:`math.fsum`) so results do not depend on the
order of the quadrature points.
"""
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .errors import IncompatibleSampling
from .exponent import ExponentField
from .report import Report

#: relative slack used by the inequality checks
CHECK_RTOL = 1e-9


@dataclass(frozen=True, eq=False)
class FieldSample:
    """Integrand values at quadrature points.

    Parameters
    ----------
    values : (n,) or (n, d) array
    weights : (n,) array of positive quadrature weights
    points : (n, 2) array of quadrature point coordinates
    """

    values: np.ndarray
    weights: np.ndarray
    points: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        w = np.asarray(self.weights, dtype=float).reshape(-1)
        x = np.asarray(self.points, dtype=float).reshape(-1, 2)
        if v.shape[0] != w.shape[0] or x.shape[0] != w.shape[0]:
            raise IncompatibleSampling("values, weights and points must have the same length")
        if v.ndim not in (1, 2):
            raise ValueError("values must be scalar or vector per point")
        if np.any(w <= 0) or not np.all(np.isfinite(w)):
            raise ValueError("quadrature weights must be positive and finite")
        for a in (v, w, x):
            a.setflags(write=False)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "points", x)

    @property
    def magnitude(self):
        v = self.values
        return np.abs(v) if v.ndim == 1 else np.sqrt(np.einsum("nd,nd->n", v, v))

    @property
    def measure(self):
        return math.fsum(self.weights)

    def scaled(self, alpha):
        return FieldSample(alpha * self.values, self.weights, self.points)

    def to_csv(self, path):
        from .io import write_fieldsample_csv

        write_fieldsample_csv(self, path)


def exponent_at(f, p):
    """Exponent values at the quadrature points of ``f``."""
    if isinstance(p, ExponentField):
        return p.at(f.points)
    q = np.broadcast_to(np.asarray(p, dtype=float), f.weights.shape)
    if q.shape != f.weights.shape:
        raise IncompatibleSampling("exponent samples do not match quadrature points")
    return q


def _modular(mag, w, q, lam=1.0):
    if lam != 1.0:
        mag = mag / lam
    return math.fsum(w * mag ** q)


def modular(f, p):
    """``sum_k w_k |f_k|^{p(x_k)}``, the discrete modular."""
    return _modular(f.magnitude, f.weights, exponent_at(f, p))


def _luxemburg(mag, w, q):
    rho = _modular(mag, w, q)
    if rho == 0.0:
        return 0.0
    qmin, qmax = float(q.min()), float(q.max())
    if qmin == qmax:
        return rho ** (1.0 / qmin)
    a, b = sorted((rho ** (1.0 / qmin), rho ** (1.0 / qmax)))

    def phi(lam):
        return _modular(mag, w, q, lam) - 1.0

    # the bracket is exact in exact arithmetic; widen if rounding spoils it
    for _ in range(60):
        if phi(a) >= 0.0:
            break
        a *= 1.0 - 1e-12
    for _ in range(60):
        if phi(b) <= 0.0:
            break
        b *= 1.0 + 1e-12
    if a == b:
        return a
    return brentq(phi, a, b, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=200)


def luxemburg_norm(f, p):
    """Luxemburg norm: the ``lam > 0`` with ``modular(f / lam) = 1``.

    Found by a bracketed root search on the decreasing map
    ``lam -> modular(f / lam)``; the bracket comes from the modular–norm
    relation ``min(rho^{1/p-}, rho^{1/p+}) <= ||f|| <= max(...)``.
    Returns 0 for the zero field and the classical L^p norm for constant p.
    """
    return float(_luxemburg(f.magnitude, f.weights, exponent_at(f, p)))


def check_modular_norm_sandwich(f, p):
    """Check ``min(N^p-, N^p+) <= rho <= max(N^p-, N^p+)`` with ``N = ||f||``."""
    q = exponent_at(f, p)
    pm, pp = float(q.min()), float(q.max())
    rho = modular(f, p)
    N = luxemburg_norm(f, p)
    lo, hi = min(N ** pm, N ** pp), max(N ** pm, N ** pp)
    scale = max(rho, hi, np.finfo(float).tiny)
    margin_lo = (rho - lo) / scale
    margin_hi = (hi - rho) / scale
    passed = margin_lo >= -CHECK_RTOL and margin_hi >= -CHECK_RTOL
    return Report("modular_norm_sandwich", passed, {
        "modular": rho, "norm": N, "lower": lo, "upper": hi,
        "margin_lower": margin_lo, "margin_upper": margin_hi, "p_minus": pm, "p_plus": pp,
    })


def check_holder(u, v, p):
    """Check ``int |u v| <= 2 ||u||_{p(x)} ||v||_{p'(x)}``."""
    if u.weights.shape != v.weights.shape or not (np.array_equal(u.weights, v.weights)
                                                  and np.array_equal(u.points, v.points)):
        raise IncompatibleSampling("u and v must share one quadrature rule")
    q = exponent_at(u, p)
    qc = q / (q - 1.0)
    mu, mv = u.magnitude, v.magnitude
    lhs = math.fsum(u.weights * mu * mv)
    nu = _luxemburg(mu, u.weights, q)
    nv = _luxemburg(mv, v.weights, qc)
    rhs = 2.0 * nu * nv
    passed = lhs <= rhs * (1.0 + CHECK_RTOL)
    margin = (rhs - lhs) / rhs if rhs > 0 else 0.0
    return Report("holder", passed, {"lhs": lhs, "rhs": rhs, "margin": margin,
                                     "norm_u": nu, "norm_v_conjugate": nv})


# ---------------------------------------------------------------------------
# dual norm estimate
# ---------------------------------------------------------------------------


def _gradient_norm_and_derivative(u, mesh, pT):
    """Luxemburg norm of grad u and its derivative with respect to nodal values."""
    G, A, t = mesh.basis_gradients, mesh.areas, mesh.triangles
    g = np.einsum("ek,ekd->ed", u[t], G)
    mag = np.sqrt(np.einsum("ed,ed->e", g, g))
    N = _luxemburg(mag, A, pT)
    if N == 0.0:
        return 0.0, np.zeros_like(u)
    z = g / N
    zm = mag / N
    with np.errstate(divide="ignore", invalid="ignore"):
        c = np.where(zm > 0, A * pT * zm ** (pT - 2.0), 0.0)
    denom = math.fsum(A * pT * zm ** pT)
    contrib = c[:, None] * np.einsum("ekd,ed->ek", G, z)
    dN = np.bincount(t.ravel(), weights=contrib.ravel(), minlength=len(u)) / denom
    return N, dN


def dual_norm_estimate(f, p, mesh, dofs=None, iterations=40, candidates=None):
    """Lower estimate of the dual norm ``sup <f, u> / ||grad u||_{p(x)}``.

    The supremum is taken over a dictionary — the Riesz representer of
    ``f`` for the Dirichlet inner product and low sine modes — followed by
    a preconditioned ascent on the Rayleigh-type quotient.  The result is
    a lower bound of the discrete dual norm (and is exact for constant
    p = 2 up to solver precision).

    Parameters
    ----------
    f : SourceTerm
        Anything with a ``load_vector()`` returning the nodal pairing vector.
    p : ExponentField
    mesh : Mesh
    dofs : DofMap, optional
        Admissible test functions; defaults to zero on the box boundary.
    candidates : list of nodal arrays, optional
        Extra trial functions added to the dictionary.
    """
    import scipy.sparse.linalg as spla

    b_full = np.asarray(f.load_vector(), dtype=float)
    active = ~mesh.boundary_nodes if dofs is None else dofs.active
    idx = np.flatnonzero(active)
    b = b_full[idx]
    bnorm = float(np.linalg.norm(b))
    if bnorm == 0.0 or len(idx) == 0:
        return 0.0
    bh = b / bnorm
    pT = p.at(mesh.barycenters) if isinstance(p, ExponentField) else np.full(mesh.n_triangles, float(p))
    K = mesh.stiffness()[idx][:, idx].tocsc()
    lu = spla.splu(K)

    def lift(v):
        u = np.zeros(mesh.n_nodes)
        u[idx] = v
        return u

    def quotient(v):
        N, dN = _gradient_norm_and_derivative(lift(v), mesh, pT)
        if N == 0.0:
            return 0.0, None, 0.0
        return abs(float(bh @ v)) / N, dN[idx], N

    cands = [lu.solve(bh)]
    x0, y0, x1, y1 = mesh.box
    X = (mesh.nodes[idx, 0] - x0) / (x1 - x0)
    Y = (mesh.nodes[idx, 1] - y0) / (y1 - y0)
    for k in range(1, 4):
        for l in range(1, 4):
            cands.append(np.sin(k * np.pi * X) * np.sin(l * np.pi * Y))
    for c in candidates or ():
        cands.append(np.asarray(c, dtype=float)[idx])
    best_v, best_J = None, -1.0
    for v in cands:
        J = quotient(v)[0]
        if J > best_J:
            best_v, best_J = v, J
    v = -best_v if bh @ best_v < 0 else best_v
    J, dN, N = quotient(v)
    alpha = 0.5
    for _ in range(iterations):
        if dN is None:
            break
        s = float(bh @ v)
        gradJ = bh / N - s * dN / (N * N)
        d = lu.solve(gradJ)
        dn = np.linalg.norm(d)
        if dn == 0.0:
            break
        d *= np.linalg.norm(v) / dn
        improved = False
        for _ in range(12):
            trial = v + alpha * d
            Jt, dNt, Nt = quotient(trial)
            if Jt > J * (1.0 + 1e-13):
                v, J, dN, N = trial, Jt, dNt, Nt
                improved = True
                alpha = min(2.0 * alpha, 1.0)
                break
            alpha *= 0.5
        if not improved:
            break
    return float(max(J, best_J) * bnorm)
