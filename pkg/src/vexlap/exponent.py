"""Variable exponents sampled on a uniform grid.

An :class:`ExponentField` stores nodal values of p(x) on a regular grid of
spacing ``h`` and interpolates them piecewise-linearly on the same
right-isosceles triangulation the finite element mesh uses, so the value at
an element barycenter is the mean of its three vertex values.
"""
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from . import descriptors, kernels
from .errors import IncompatibleSampling, NonAdmissibleExponent

#: p_minus below 1 + ADMISSIBILITY_MARGIN is rejected.
ADMISSIBILITY_MARGIN = 1e-6


@dataclass(frozen=True)
class Grid:
    """Uniform node lattice ``x0 + i h, y0 + j h`` for ``0 <= i <= nx``, ``0 <= j <= ny``."""

    x0: float
    y0: float
    h: float
    nx: int
    ny: int

    @classmethod
    def from_box(cls, box, resolution):
        x0, y0, x1, y1 = map(float, box)
        res = float(resolution)
        if res <= 0 or x1 < x0 or y1 < y0:
            raise ValueError(f"bad box/resolution: {box}, {resolution}")
        fx, fy = (x1 - x0) * res, (y1 - y0) * res
        nx, ny = int(round(fx)), int(round(fy))
        if abs(fx - nx) > 1e-9 * max(1.0, fx) or abs(fy - ny) > 1e-9 * max(1.0, fy):
            raise ValueError(f"box {box} is not a whole number of cells at resolution {resolution}")
        return cls(x0, y0, 1.0 / res, nx, ny)

    @property
    def box(self):
        return (self.x0, self.y0, self.x0 + self.nx * self.h, self.y0 + self.ny * self.h)

    @property
    def shape(self):
        """Shape of nodal arrays, ``(ny + 1, nx + 1)``."""
        return (self.ny + 1, self.nx + 1)

    def coordinates(self):
        """Node coordinates as an ``(N, 2)`` array, x fastest."""
        xs = self.x0 + self.h * np.arange(self.nx + 1)
        ys = self.y0 + self.h * np.arange(self.ny + 1)
        X, Y = np.meshgrid(xs, ys)
        return np.column_stack([X.ravel(), Y.ravel()])


def _grid_of(grid):
    if isinstance(grid, Grid):
        return grid
    g = getattr(grid, "grid", None)
    if isinstance(g, Grid):
        return g
    box, resolution = grid
    return Grid.from_box(box, resolution)


@dataclass(frozen=True, eq=False)
class ExponentField:
    """Nodal exponent values on a :class:`Grid`.

    ``values`` has shape ``grid.shape``.  The field is immutable; the
    nodal array is made read-only on construction.
    """

    values: np.ndarray
    grid: Grid
    p_minus: float = field(init=False)
    p_plus: float = field(init=False)

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.shape != self.grid.shape:
            raise ValueError(f"values shape {v.shape} does not match grid shape {self.grid.shape}")
        if not np.all(np.isfinite(v)):
            raise NonAdmissibleExponent("exponent must be finite everywhere")
        lo, hi = float(v.min()), float(v.max())
        if lo < 1.0 + ADMISSIBILITY_MARGIN:
            raise NonAdmissibleExponent(f"p_minus = {lo!r} is not > 1 (margin {ADMISSIBILITY_MARGIN})")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "p_minus", lo)
        object.__setattr__(self, "p_plus", hi)

    @property
    def resolution(self):
        return self.grid.h

    @property
    def is_constant(self):
        return self.p_minus == self.p_plus

    @cached_property
    def nodes(self):
        return self.grid.coordinates()

    def at(self, points):
        """Piecewise-linear interpolation at ``points`` (``(M, 2)``)."""
        pts = np.asarray(points, dtype=float).reshape(-1, 2)
        g = self.grid
        if self.is_constant:
            self._check_inside(pts)
            return np.full(len(pts), self.p_minus)
        if g.nx == 0 or g.ny == 0:
            return self._at_degenerate(pts)
        self._check_inside(pts)
        fx = (pts[:, 0] - g.x0) / g.h
        fy = (pts[:, 1] - g.y0) / g.h
        i = np.clip(np.floor(fx).astype(int), 0, g.nx - 1)
        j = np.clip(np.floor(fy).astype(int), 0, g.ny - 1)
        s = np.clip(fx - i, 0.0, 1.0)
        t = np.clip(fy - j, 0.0, 1.0)
        V = self.values
        pa, pb, pc, pd = V[j, i], V[j, i + 1], V[j + 1, i + 1], V[j + 1, i]
        lower = s >= t
        # lower triangle (a, b, c), upper triangle (a, c, d)
        return np.where(lower, (1 - s) * pa + (s - t) * pb + t * pc, (1 - t) * pa + (t - s) * pd + s * pc)

    def _check_inside(self, pts):
        x0, y0, x1, y1 = self.grid.box
        tol = 1e-9 * max(1.0, x1 - x0, y1 - y0)
        if len(pts) and (pts[:, 0].min() < x0 - tol or pts[:, 0].max() > x1 + tol
                         or pts[:, 1].min() < y0 - tol or pts[:, 1].max() > y1 + tol):
            raise IncompatibleSampling(f"sample points leave the exponent grid box {self.grid.box}")

    def _at_degenerate(self, pts):
        nodes = self.nodes
        d2 = ((pts[:, None, :] - nodes[None, :, :]) ** 2).sum(-1)
        k = d2.argmin(axis=1)
        if np.any(d2[np.arange(len(pts)), k] > (1e-9 * self.grid.h) ** 2):
            raise IncompatibleSampling("degenerate exponent grid can only be sampled at its nodes")
        return self.values.ravel()[k]

    def with_values(self, values):
        return ExponentField(values, self.grid)


def _descriptor_function(desc, grid):
    if callable(desc):
        return desc
    if isinstance(desc, (int, float)):
        c = float(desc)
        return lambda x, y: np.full_like(x, c)
    tree = descriptors.parse(desc)
    if isinstance(tree, float):
        return lambda x, y: np.full_like(x, tree)
    name, args = tree
    if name == "constant":
        (c,) = descriptors.numbers(args, name, 1)
        return lambda x, y: np.full_like(x, c)
    if name == "affine":
        a, b, c = descriptors.numbers(args, name, 3)
        return lambda x, y: a + b * x + c * y
    if name == "radial":
        vals = descriptors.numbers(args, name, 2, 4)
        if len(vals) == 3:
            raise descriptors.DescriptorError("radial() takes (a, b) or (a, b, x0, y0)")
        a, b = vals[:2]
        if len(vals) == 4:
            cx, cy = vals[2:]
        else:
            x0, y0, x1, y1 = grid.box
            cx, cy = 0.5 * (x0 + x1), 0.5 * (y0 + y1)
        return lambda x, y: a + b * np.hypot(x - cx, y - cy)
    raise descriptors.DescriptorError(f"unknown exponent descriptor {name!r}")


def make_exponent(expr, grid):
    """Sample an exponent descriptor on a grid.

    Parameters
    ----------
    expr : str, float or callable
        ``"constant(c)"``, ``"affine(a, b, c)"`` (a + b x + c y),
        ``"radial(a, b[, x0, y0])"`` (a + b |x - x0|, centre defaults to the
        box centre), a number, or a vectorised callable ``f(x, y)``.
    grid : Grid, Mesh, or (box, resolution)

    Raises
    ------
    NonAdmissibleExponent
        If any sample is not > 1.
    """
    g = _grid_of(grid)
    f = _descriptor_function(expr, g)
    xy = g.coordinates()
    vals = np.asarray(f(xy[:, 0], xy[:, 1]), dtype=float)
    return ExponentField(np.broadcast_to(vals, (len(xy),)).reshape(g.shape), g)


def log_holder_modulus(p):
    """Discrete log-Hölder modulus of ``p``.

    The supremum of ``log(1/|x-y|) |p(x) - p(y)|`` over node pairs with
    ``0 < |x - y| < 1``.  It is a diagnostic, not a certificate of
    log-Hölder continuity.
    """
    if p.values.size < 2:
        raise ValueError("log-Hölder modulus needs at least two nodes")
    if p.is_constant:
        return 0.0
    return kernels.log_holder_sup(p.nodes, p.values.ravel())


def conjugate(p):
    """Nodewise conjugate exponent p / (p - 1)."""
    v = p.values
    return ExponentField(v / (v - 1.0), p.grid)
