"""Relative and Sobolev p(x)-capacities of raster sets.

Capacities are computed by minimizing the gradient modular (plus the
zeroth-order modular for the Sobolev capacity) over P1 functions that equal
1 on the nodes of every grid cell meeting the set ``E`` and vanish on the
fixed dofs of the reference domain.  Zero pinning wins where both apply.
Right-isosceles meshes have the property that truncating a P1 function at
0 and 1 never increases any element's gradient, so the discrete potential
stays in [0, 1].
"""
import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage
from scipy.spatial import ConvexHull, QhullError

from .errors import EmptyConstraintSet, PreconditionViolated, ResolutionTooCoarse
from .exponent import ExponentField
from .geometry import Disk, RasterDomain
from .lebesgue import modular
from .mesh import GridFunction, _cut_cells, build_mesh, gradient, nodal_sample, restrict_dofs
from .report import Report
from .solver import SolverOptions, minimize_modular


@dataclass
class CapacityResult:
    """Capacity value with its potential and solver diagnostics."""

    value: float
    potential: GridFunction
    converged: bool = True
    iterations: int = 0
    resolved: bool = True
    gradient_part: float = 0.0
    details: dict = field(default_factory=dict)

    def to_dict(self):
        return {"value": self.value, "converged": self.converged, "iterations": self.iterations,
                "resolved": self.resolved, "gradient_part": self.gradient_part, **self.details}

    def to_json(self, path=None):
        text = json.dumps(self.to_dict(), indent=2)
        if path is not None:
            with open(path, "w") as fh:
                fh.write(text + "\n")
        return text


def _as_set_mask(e, mesh):
    if e.box != tuple(float(b) for b in mesh.box):
        raise ValueError(f"set box {e.box} differs from mesh box {mesh.box}")
    return e


def _one_nodes(mesh, e):
    """Nodes of grid cells that overlap a pixel of ``e``."""
    g = mesh.grid
    touched = _cut_cells(mesh, e.with_mask(~e.mask))
    ones = np.zeros((g.ny + 1, g.nx + 1), dtype=bool)
    ones[:-1, :-1] |= touched
    ones[:-1, 1:] |= touched
    ones[1:, :-1] |= touched
    ones[1:, 1:] |= touched
    return ones.ravel()


def _resolved(e, mesh):
    """False if some component of ``e`` spans fewer than two mesh cells."""
    lab, n = ndimage.label(e.mask, structure=np.ones((3, 3), dtype=bool))
    if n == 0:
        return True
    for sl in ndimage.find_objects(lab):
        ext = max(sl[0].stop - sl[0].start, sl[1].stop - sl[1].start) * e.h
        if ext < 2.0 * mesh.h:
            return False
    return True


def _constrained_minimum(mesh, zero_free, e, p, opts, sobolev):
    ones = _one_nodes(mesh, e) & zero_free
    if not ones.any():
        raise EmptyConstraintSet("no mesh node can be pinned to 1 (E is empty at this resolution or lies off the domain)")
    free = zero_free & ~ones
    pinned = ones.astype(float)
    pT = p.at(mesh.barycenters)
    c = q = None
    if sobolev:
        c = mesh.lumped_mass
        q = p.at(mesh.nodes)
    opts = opts or SolverOptions()
    if free.any():
        u, rep = minimize_modular(mesh, free, pinned, mesh.areas.copy(), pT, np.zeros(mesh.n_nodes), c, q, opts)
        iters, conv = rep.iterations, rep.converged
    else:
        u, iters, conv = pinned, 0, True
    pot = GridFunction(u, mesh)
    grad_part = modular(gradient(pot), p)
    value = grad_part
    if sobolev:
        value = math.fsum([grad_part, modular(nodal_sample(pot), p)])
    return CapacityResult(value, pot, conv, iters, _resolved(e, mesh), grad_part,
                          {"pinned_to_one": int(ones.sum()), "free": int(free.sum())})


def relative_capacity(e, d, p, mesh, opts=None):
    """Capacity of ``e`` relative to the open set ``d``.

    Minimizes ``rho_{p(x)}(grad u)`` over P1 functions vanishing on the fixed
    dofs of ``d`` and equal to 1 on the nodes of cells meeting ``e``.

    Raises
    ------
    EmptyConstraintSet
        If no node ends up pinned to 1.
    """
    _as_set_mask(e, mesh)
    dofs = restrict_dofs(mesh, d)
    return _constrained_minimum(mesh, dofs.active, e, p, opts, sobolev=False)


def sobolev_capacity(e, p, mesh, opts=None):
    """Sobolev capacity: minimizes ``rho(u) + rho(grad u)`` with ``u = 1`` on ``e``.

    The mesh box acts as the ambient space (zero on its boundary), so the
    value decreases towards the whole-plane capacity as the box grows.
    Returns value 0 for an empty set.
    """
    _as_set_mask(e, mesh)
    if not e.mask.any():
        return CapacityResult(0.0, GridFunction.zeros(mesh), True, 0, True, 0.0, {"empty_set": True})
    return _constrained_minimum(mesh, ~mesh.boundary_nodes, e, p, opts, sobolev=True)


def comparison_constants(rho, theta, K):
    """``B = max_{0<=s<=rho} (rho - s + K s^theta)`` and ``C = B / rho^theta``."""
    if rho <= 0:
        return 0.0, 1.0
    if theta >= 1.0:
        return K * rho, K
    s_star = (K * theta) ** (1.0 / (1.0 - theta))
    s = min(s_star, rho)
    B = rho - s + K * s**theta
    return B, B / rho**theta


def _constant_like(p, value):
    return ExponentField(np.full(p.grid.shape, value), p.grid)


def capacity_comparison_check(e, d, p, mesh=None, opts=None):
    """Check ``cap_{p-}(E, D) <= C cap_{p(x)}(E, D)^beta``.

    Splitting the potential's gradient at 1 and applying Hölder's
    inequality on the part below 1 gives, with ``theta = p-/p+`` and
    ``K = |D|^{1-theta}``, ``cap_{p-} <= B(cap_p)`` where
    ``B(rho) = max_{0<=s<=rho} (rho - s + K s^theta)``.  The report states
    ``beta = theta`` and ``C = B / cap_p^theta``.
    """
    mesh = mesh or build_mesh(d.box, d.resolution)
    cap_p = relative_capacity(e, d, p, mesh, opts)
    pm, pp = p.p_minus, p.p_plus
    cap_m = relative_capacity(e, d, _constant_like(p, pm), mesh, opts)
    theta = pm / pp
    area = float(d.mask.sum()) * d.h**2
    K = area ** (1.0 - theta)
    B, C = comparison_constants(cap_p.value, theta, K)
    passed = cap_m.value <= B * (1.0 + 1e-9)
    return Report("capacity_comparison", passed, {
        "cap_p_minus": cap_m.value, "cap_p": cap_p.value, "bound": B, "C": C, "beta": theta,
        "margin": (B - cap_m.value) / B if B > 0 else 0.0, "realized_ratio": cap_m.value / B if B > 0 else 0.0,
    })


# ---------------------------------------------------------------------------
# local capacities on balls
# ---------------------------------------------------------------------------


def _local_problem(o_box, res_px, x, r, mesh_resolution):
    """Sub-box around B(x, 2r), aligned with both pixels and mesh cells."""
    step = 1.0 / math.gcd(int(round(res_px)), int(round(mesh_resolution))) if float(res_px).is_integer() and float(mesh_resolution).is_integer() else None
    if step is None:
        raise ValueError("pixel and mesh resolutions must be integers")
    x0, y0, x1, y1 = o_box
    R = 2.0 * r + 2.0 / mesh_resolution
    bx0 = x0 + math.floor((x[0] - R - x0) / step) * step
    by0 = y0 + math.floor((x[1] - R - y0) / step) * step
    bx1 = x0 + math.ceil((x[0] + R - x0) / step) * step
    by1 = y0 + math.ceil((x[1] + R - y0) / step) * step
    return (max(bx0, x0), max(by0, y0), min(bx1, x1), min(by1, y1))


def crop(o, box):
    """Restrict a raster domain to a pixel-aligned sub-box."""
    i0 = int(round((box[0] - o.box[0]) * o.resolution))
    j0 = int(round((box[1] - o.box[1]) * o.resolution))
    i1 = int(round((box[2] - o.box[0]) * o.resolution))
    j1 = int(round((box[3] - o.box[1]) * o.resolution))
    x0 = o.box[0] + i0 * o.h
    y0 = o.box[1] + j0 * o.h
    return RasterDomain((x0, y0, x0 + (i1 - i0) * o.h, y0 + (j1 - j0) * o.h), o.resolution, o.mask[j0:j1, i0:i1])


def ball_capacity(k, x, r, p, mesh_resolution=None, opts=None):
    """``cap_{p(x)}(K ∩ B̄(x, r), B(x, 2r))`` on a local mesh around ``x``.

    ``k`` is a raster set (True = in K).  Returns a CapacityResult.
    """
    mesh_resolution = k.resolution if mesh_resolution is None else mesh_resolution
    box = _local_problem(k.box, k.resolution, x, r, mesh_resolution)
    kk = crop(k, box)
    X, Y = kk.pixel_centers()
    e = kk.with_mask(kk.mask & (np.hypot(X - x[0], Y - x[1]) <= r))
    ball = RasterDomain.from_shape(Disk(x[0], x[1], 2.0 * r), kk.box, kk.resolution)
    mesh = build_mesh(kk.box, mesh_resolution)
    return relative_capacity(e, ball, p, mesh, opts)


def _diameter(points):
    if len(points) < 2:
        return 0.0
    pts = points
    if len(points) > 3:
        try:
            pts = points[ConvexHull(points).vertices]
        except QhullError:
            pass
    d2 = ((pts[:, None, :] - pts[None, :, :]) ** 2).sum(-1)
    return float(np.sqrt(d2.max()))


def connected_lower_bound_check(k, x, r, p, kappa=0.0, mesh_resolution=None, opts=None):
    """Capacity of a connected compact near one of its points.

    Verifies that ``K`` is connected (8-connectivity), that ``x`` lies on
    ``K`` and that ``2h <= r < diam(K)/2``, then computes
    ``cap_{p(x)}(K ∩ B̄(x, r), B(x, 2r))`` and passes when it exceeds ``kappa``.
    """
    n = int(ndimage.label(k.mask, structure=np.ones((3, 3), dtype=bool))[1])
    if n != 1:
        raise PreconditionViolated(f"K must be connected and nonempty, found {n} components")
    X, Y = k.pixel_centers()
    pts = np.column_stack([X[k.mask], Y[k.mask]])
    dist_to_k = float(np.min(np.hypot(pts[:, 0] - x[0], pts[:, 1] - x[1])))
    if dist_to_k > k.h:
        raise PreconditionViolated(f"x is {dist_to_k:.3g} away from K")
    diam = _diameter(pts)
    mres = k.resolution if mesh_resolution is None else mesh_resolution
    a = 2.0 / min(mres, k.resolution)
    if not (a <= r < 0.5 * diam):
        raise PreconditionViolated(f"radius {r} outside [{a:.3g}, diam/2 = {0.5 * diam:.3g})")
    cap = ball_capacity(k, x, r, p, mres, opts)
    return Report("connected_lower_bound", cap.value > kappa, {
        "capacity": cap.value, "kappa": kappa, "diameter": diam, "resolved": cap.resolved,
    })


def _boundary_samples(o, r_max, samples):
    """Up to ``samples`` boundary points per complement component, evenly
    spread along each component's boundary, with ``B(x, 2 r_max)`` in the box."""
    m = o.mask
    grown = ndimage.binary_dilation(m, structure=ndimage.generate_binary_structure(2, 1))
    edge = grown & ~m
    lab, n = ndimage.label(~m, structure=np.ones((3, 3), dtype=bool))
    X, Y = o.pixel_centers()
    x0, y0, x1, y1 = o.box
    rr = 2.0 * r_max
    fits = (X - rr >= x0) & (X + rr <= x1) & (Y - rr >= y0) & (Y + rr <= y1)
    out = []
    for k in range(1, n + 1):
        sel = edge & fits & (lab == k)
        pts = np.column_stack([X[sel], Y[sel]])
        if len(pts) > samples:
            pts = pts[np.linspace(0, len(pts) - 1, samples).round().astype(int)]
        out.append(pts)
    return np.concatenate(out) if out else np.zeros((0, 2))


def alpha_r_condition_check(o, p, alpha, r0, samples=12, mesh_resolution=None, opts=None):
    """Sample the capacity density condition on the boundary of ``o``.

    For boundary pixels ``x`` (complement pixels next to ``o`` whose ball
    ``B(x, 2 r0)`` stays inside the box; up to ``samples`` per complement
    component) and ``r in {r0, r0/2, r0/4}``,
    computes ``cap_{p(x)}(D \\ o ∩ B̄(x, r), B(x, 2r))``; passes when the
    minimum is at least ``alpha``.  An empty sample passes vacuously and is
    flagged.  Raises ``ResolutionTooCoarse`` when ``r0 / 4`` spans fewer than
    two mesh cells or pixels.
    """
    mres = o.resolution if mesh_resolution is None else mesh_resolution
    if r0 / 4.0 < 2.0 / min(mres, o.resolution):
        raise ResolutionTooCoarse(f"smallest probe radius {r0 / 4:g} is below two cells at resolution {mres}")
    comp = o.with_mask(~o.mask)
    pts = _boundary_samples(o, r0, samples)
    if len(pts) == 0:
        return Report("alpha_r_condition", True, {"vacuous": True, "min_capacity": np.inf, "alpha": alpha,
                                                  "samples": 0})
    caps = []
    for x in pts:
        for r in (r0, r0 / 2.0, r0 / 4.0):
            caps.append(ball_capacity(comp, x, r, p, mesh_resolution, opts).value)
    cmin = float(min(caps))
    return Report("alpha_r_condition", cmin >= alpha, {
        "vacuous": False, "min_capacity": cmin, "alpha": alpha, "samples": int(len(pts)), "r0": r0,
    })


def calibrate_alpha(o, p, r0, samples=12, mesh_resolution=None, opts=None, safety=0.5):
    """``safety`` times the minimum sampled capacity, for use as ``alpha``."""
    rep = alpha_r_condition_check(o, p, 0.0, r0, samples, mesh_resolution, opts)
    return safety * rep.min_capacity
