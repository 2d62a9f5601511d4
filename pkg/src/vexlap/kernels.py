"""Hot numerical kernels, each in a numba-compiled loop form and a numpy form.

The public names (``assemble``, ``log_holder_sup``, ...) dispatch to the
backend chosen in :mod:`vexlap._backend`.  Both forms are importable
explicitly (``*_loop`` / ``*_numpy``) so tests can check they agree and the
benchmark can time them side by side.
"""
import numpy as np

from ._backend import HAVE_NUMBA, njit

# ---------------------------------------------------------------------------
# element assembly for  sum_T a_T (|g_T|^2 + eps^2)^{p_T/2}
# ---------------------------------------------------------------------------


def _assemble_loop(u, tris, G, a, p, eps, want_hess):
    ne = tris.shape[0]
    nn = u.shape[0]
    terms = np.empty(ne)
    grad = np.zeros(nn)
    hess = np.zeros((ne, 3, 3)) if want_hess else np.zeros((0, 3, 3))
    e2 = eps * eps
    for t in range(ne):
        i0 = tris[t, 0]
        i1 = tris[t, 1]
        i2 = tris[t, 2]
        gx = u[i0] * G[t, 0, 0] + u[i1] * G[t, 1, 0] + u[i2] * G[t, 2, 0]
        gy = u[i0] * G[t, 0, 1] + u[i1] * G[t, 1, 1] + u[i2] * G[t, 2, 1]
        s = gx * gx + gy * gy + e2
        pt = p[t]
        terms[t] = a[t] * s ** (0.5 * pt)
        if s > 0.0 or pt == 2.0:
            c = a[t] * pt * s ** (0.5 * pt - 1.0)
        else:
            c = 0.0
        for k in range(3):
            gk = G[t, k, 0] * gx + G[t, k, 1] * gy
            grad[tris[t, k]] += c * gk
        if want_hess:
            c2 = a[t] * pt * (pt - 2.0) * s ** (0.5 * pt - 2.0) if s > 0.0 else 0.0
            for k in range(3):
                gk = G[t, k, 0] * gx + G[t, k, 1] * gy
                for m in range(3):
                    gm = G[t, m, 0] * gx + G[t, m, 1] * gy
                    hess[t, k, m] = c * (G[t, k, 0] * G[t, m, 0] + G[t, k, 1] * G[t, m, 1]) + c2 * gk * gm
    return terms, grad, hess


def assemble_numpy(u, tris, G, a, p, eps, want_hess):
    g = np.einsum("ek,ekd->ed", u[tris], G)
    s = np.einsum("ed,ed->e", g, g) + eps * eps
    terms = a * s ** (0.5 * p)
    pos = s > 0.0
    lin = pos | (p == 2.0)
    c = np.zeros_like(s)
    c[lin] = a[lin] * p[lin] * s[lin] ** (0.5 * p[lin] - 1.0)
    Gg = np.einsum("ekd,ed->ek", G, g)
    grad = np.bincount(tris.ravel(), weights=(c[:, None] * Gg).ravel(), minlength=u.shape[0])
    if not want_hess:
        return terms, grad, np.zeros((0, 3, 3))
    c2 = np.zeros_like(s)
    c2[pos] = a[pos] * p[pos] * (p[pos] - 2.0) * s[pos] ** (0.5 * p[pos] - 2.0)
    GG = np.einsum("ekd,emd->ekm", G, G)
    hess = c[:, None, None] * GG + c2[:, None, None] * Gg[:, :, None] * Gg[:, None, :]
    return terms, grad, hess


# ---------------------------------------------------------------------------
# pairwise suprema over node clouds
# ---------------------------------------------------------------------------


def _log_holder_loop(xy, vals):
    n = xy.shape[0]
    best = 0.0
    for i in range(n):
        for j in range(i + 1, n):
            dx = xy[i, 0] - xy[j, 0]
            dy = xy[i, 1] - xy[j, 1]
            d = np.sqrt(dx * dx + dy * dy)
            if d > 0.0 and d < 1.0:
                v = -np.log(d) * abs(vals[i] - vals[j])
                if v > best:
                    best = v
    return best


def log_holder_numpy(xy, vals, chunk=512):
    best = 0.0
    n = xy.shape[0]
    for s in range(0, n, chunk):
        blk = slice(s, min(s + chunk, n))
        d = np.sqrt(((xy[blk, None, :] - xy[None, :, :]) ** 2).sum(-1))
        ok = (d > 0.0) & (d < 1.0)
        if not ok.any():
            continue
        dv = np.abs(vals[blk, None] - vals[None, :])
        v = np.where(ok, -np.log(np.where(ok, d, 1.0)) * dv, 0.0)
        best = max(best, float(v.max()))
    return best


def _holder_seminorm_loop(xy, vals, delta):
    n = xy.shape[0]
    best = 0.0
    for i in range(n):
        for j in range(i + 1, n):
            dx = xy[i, 0] - xy[j, 0]
            dy = xy[i, 1] - xy[j, 1]
            d2 = dx * dx + dy * dy
            if d2 > 0.0:
                v = abs(vals[i] - vals[j]) / d2 ** (0.5 * delta)
                if v > best:
                    best = v
    return best


def holder_seminorm_numpy(xy, vals, delta, chunk=512):
    best = 0.0
    n = xy.shape[0]
    for s in range(0, n, chunk):
        blk = slice(s, min(s + chunk, n))
        d2 = ((xy[blk, None, :] - xy[None, :, :]) ** 2).sum(-1)
        ok = d2 > 0.0
        dv = np.abs(vals[blk, None] - vals[None, :])
        v = np.where(ok, dv / np.where(ok, d2, 1.0) ** (0.5 * delta), 0.0)
        best = max(best, float(v.max()))
    return best


def _directed_hausdorff_loop(A, B):
    best = 0.0
    for i in range(A.shape[0]):
        near = np.inf
        for j in range(B.shape[0]):
            dx = A[i, 0] - B[j, 0]
            dy = A[i, 1] - B[j, 1]
            d2 = dx * dx + dy * dy
            if d2 < near:
                near = d2
                if near == 0.0:
                    break
        if near > best:
            best = near
    return np.sqrt(best)


def directed_hausdorff_numpy(A, B, chunk=1024):
    best = 0.0
    for s in range(0, A.shape[0], chunk):
        d2 = ((A[s:s + chunk, None, :] - B[None, :, :]) ** 2).sum(-1)
        best = max(best, float(d2.min(axis=1).max()))
    return float(np.sqrt(best))


if HAVE_NUMBA:
    assemble_loop = njit(_assemble_loop)
    log_holder_loop = njit(_log_holder_loop)
    holder_seminorm_loop = njit(_holder_seminorm_loop)
    directed_hausdorff_loop = njit(_directed_hausdorff_loop)
else:
    assemble_loop = _assemble_loop
    log_holder_loop = _log_holder_loop
    holder_seminorm_loop = _holder_seminorm_loop
    directed_hausdorff_loop = _directed_hausdorff_loop


def _f64(x):
    return np.ascontiguousarray(x, dtype=np.float64)


def assemble(u, tris, G, a, p, eps, want_hess=True):
    """Energy terms, nodal gradient and local Hessians of the element sum.

    Returns ``(terms, grad, hess)`` with ``terms[t] = a_t s_t^{p_t/2}``,
    ``s_t = |g_t|^2 + eps^2`` and ``hess`` of shape ``(ne, 3, 3)`` (empty
    when ``want_hess`` is false).  At ``eps = 0`` elements with zero
    gradient get a zero first Hessian coefficient unless ``p = 2``.
    """
    args = (_f64(u), np.ascontiguousarray(tris, dtype=np.int64), _f64(G), _f64(a), _f64(p), float(eps), bool(want_hess))
    if HAVE_NUMBA:
        return assemble_loop(*args)
    return assemble_numpy(*args)


def log_holder_sup(xy, vals):
    """max of log(1/|x-y|) |p(x)-p(y)| over pairs with 0 < |x-y| < 1."""
    if HAVE_NUMBA:
        return float(log_holder_loop(_f64(xy), _f64(vals)))
    return log_holder_numpy(_f64(xy), _f64(vals))


def holder_seminorm(xy, vals, delta):
    """max of |u(x)-u(y)| / |x-y|^delta over distinct pairs."""
    if HAVE_NUMBA:
        return float(holder_seminorm_loop(_f64(xy), _f64(vals), float(delta)))
    return holder_seminorm_numpy(_f64(xy), _f64(vals), float(delta))


def directed_hausdorff(A, B):
    """sup over a in A of the distance from a to B (brute force)."""
    if len(A) == 0:
        return 0.0
    if len(B) == 0:
        return float("inf")
    if HAVE_NUMBA:
        return float(directed_hausdorff_loop(_f64(A), _f64(B)))
    return directed_hausdorff_numpy(_f64(A), _f64(B))
