"""Raster domains inside a box, complementary Hausdorff distance and
domain-sequence generators.

Shapes are signed-distance functions (negative inside) combined by CSG.
A :class:`RasterDomain` stores a boolean pixel mask (row 0 at the bottom
of the box).  Rasterizing an open set is conservative: a pixel belongs to
the domain only if the whole pixel does, judged by the signed distance at
its centre against the half pixel diagonal.
"""
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from . import descriptors, kernels
from .errors import ResolutionMismatch, ResolutionTooCoarse, UnknownGenerator
from .exponent import Grid

UNIT_BOX = (0.0, 0.0, 1.0, 1.0)

# ---------------------------------------------------------------------------
# shapes
# ---------------------------------------------------------------------------


class Shape:
    """Base class: a signed distance ``sdf(x, y)``, negative inside."""

    def sdf(self, x, y):
        raise NotImplementedError

    def __or__(self, other):
        return _Combine(np.minimum, self, other)

    def __and__(self, other):
        return _Combine(np.maximum, self, other)

    def __sub__(self, other):
        return self & ~other

    def __invert__(self):
        return _Complement(self)


class _Combine(Shape):
    def __init__(self, op, a, b):
        self.op, self.a, self.b = op, a, b

    def sdf(self, x, y):
        return self.op(self.a.sdf(x, y), self.b.sdf(x, y))


class _Complement(Shape):
    def __init__(self, a):
        self.a = a

    def sdf(self, x, y):
        return -self.a.sdf(x, y)


class Everything(Shape):
    def sdf(self, x, y):
        return np.full(np.broadcast(x, y).shape, -np.inf)


class Nothing(Shape):
    def sdf(self, x, y):
        return np.full(np.broadcast(x, y).shape, np.inf)


@dataclass(frozen=True)
class Disk(Shape):
    cx: float
    cy: float
    r: float

    def sdf(self, x, y):
        return np.hypot(x - self.cx, y - self.cy) - self.r


@dataclass(frozen=True)
class Rect(Shape):
    x0: float
    y0: float
    x1: float
    y1: float

    def sdf(self, x, y):
        cx, cy = 0.5 * (self.x0 + self.x1), 0.5 * (self.y0 + self.y1)
        qx = np.abs(x - cx) - 0.5 * (self.x1 - self.x0)
        qy = np.abs(y - cy) - 0.5 * (self.y1 - self.y0)
        outside = np.hypot(np.maximum(qx, 0.0), np.maximum(qy, 0.0))
        return outside + np.minimum(np.maximum(qx, qy), 0.0)


def Square(cx, cy, half):
    return Rect(cx - half, cy - half, cx + half, cy + half)


@dataclass(frozen=True)
class Segment(Shape):
    """Closed segment of zero thickness: the sdf is the distance to it."""

    ax: float
    ay: float
    bx: float
    by: float

    def sdf(self, x, y):
        dx, dy = self.bx - self.ax, self.by - self.ay
        L2 = dx * dx + dy * dy
        t = np.zeros(np.broadcast(x, y).shape) if L2 == 0 else np.clip(((x - self.ax) * dx + (y - self.ay) * dy) / L2, 0.0, 1.0)
        return np.hypot(x - self.ax - t * dx, y - self.ay - t * dy)


class ConvexPolygon(Shape):
    """Convex polygon with counter-clockwise ``vertices``.

    Inside, the sdf is the exact (negative) distance to the boundary;
    outside it is the distance to the nearest supporting line, a lower
    bound of the true distance, which is all conservative rasterization
    needs.
    """

    def __init__(self, vertices):
        v = np.asarray(vertices, dtype=float)
        e = np.roll(v, -1, axis=0) - v
        self.v = v
        self.n = np.column_stack([e[:, 1], -e[:, 0]]) / np.linalg.norm(e, axis=1)[:, None]

    def sdf(self, x, y):
        x, y = np.broadcast_arrays(np.asarray(x, float), np.asarray(y, float))
        d = np.full(x.shape, -np.inf)
        for (vx, vy), (nx, ny) in zip(self.v, self.n):
            d = np.maximum(d, (x - vx) * nx + (y - vy) * ny)
        return d


def regular_polygon(cx, cy, R, n, phase=0.5 * np.pi):
    """Regular n-gon inscribed in the circle of radius R."""
    a = phase + 2.0 * np.pi * np.arange(n) / n
    return ConvexPolygon(np.column_stack([cx + R * np.cos(a), cy + R * np.sin(a)]))


_SHAPES = {
    "disk": (Disk, 3, 3),
    "rect": (Rect, 4, 4),
    "square": (Square, 3, 3),
    "segment": (Segment, 4, 4),
}


def shape_from_descriptor(desc):
    """Build a shape from ``disk(cx,cy,r)``, ``rect(x0,y0,x1,y1)``,
    ``square(cx,cy,half)``, ``segment(ax,ay,bx,by)``, ``polygon(cx,cy,R,n)``,
    ``full`` or ``empty``; ``union(a, b, ...)`` and ``minus(a, b)`` combine."""
    tree = descriptors.parse(desc) if isinstance(desc, str) else desc
    if isinstance(tree, float):
        raise descriptors.DescriptorError("a shape descriptor cannot be a number")
    name, args = tree
    if name in _SHAPES:
        cls, lo, hi = _SHAPES[name]
        return cls(*descriptors.numbers(args, name, lo, hi))
    if name == "polygon":
        cx, cy, R, n = descriptors.numbers(args, name, 4)
        return regular_polygon(cx, cy, R, int(n))
    if name == "full":
        return Everything()
    if name == "empty":
        return Nothing()
    if name == "union" and args:
        out = shape_from_descriptor(args[0])
        for a in args[1:]:
            out = out | shape_from_descriptor(a)
        return out
    if name == "minus" and len(args) == 2:
        return shape_from_descriptor(args[0]) - shape_from_descriptor(args[1])
    raise descriptors.DescriptorError(f"unknown shape {name!r}")


# ---------------------------------------------------------------------------
# raster domains
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class RasterDomain:
    """Boolean pixel mask of a subset of the box ``D``.

    ``mask[j, i]`` covers ``[x0 + i/res, x0 + (i+1)/res] x [y0 + j/res, ...]``;
    True means inside.
    """

    box: tuple
    resolution: float
    mask: np.ndarray

    def __post_init__(self):
        g = Grid.from_box(self.box, self.resolution)
        m = np.array(self.mask, dtype=bool)
        if m.shape != (g.ny, g.nx):
            raise ValueError(f"mask shape {m.shape} does not match box at resolution {self.resolution}: {(g.ny, g.nx)}")
        m.setflags(write=False)
        object.__setattr__(self, "box", tuple(float(b) for b in self.box))
        object.__setattr__(self, "resolution", float(self.resolution))
        object.__setattr__(self, "mask", m)

    @property
    def h(self):
        """Pixel size."""
        return 1.0 / self.resolution

    @property
    def shape(self):
        return self.mask.shape

    @property
    def complement(self):
        return ~self.mask

    def pixel_centers(self):
        """Pixel centre coordinates ``(X, Y)``, each of shape ``mask.shape``."""
        ny, nx = self.mask.shape
        xs = self.box[0] + (np.arange(nx) + 0.5) * self.h
        ys = self.box[1] + (np.arange(ny) + 0.5) * self.h
        return np.meshgrid(xs, ys)

    def with_mask(self, mask):
        return RasterDomain(self.box, self.resolution, mask)

    @classmethod
    def full(cls, box, resolution):
        g = Grid.from_box(box, resolution)
        return cls(box, resolution, np.ones((g.ny, g.nx), dtype=bool))

    @classmethod
    def empty(cls, box, resolution):
        g = Grid.from_box(box, resolution)
        return cls(box, resolution, np.zeros((g.ny, g.nx), dtype=bool))

    @classmethod
    def from_shape(cls, shape, box=UNIT_BOX, resolution=256, mode="interior"):
        """Rasterize ``shape``.

        ``mode="interior"`` keeps pixels entirely inside (open sets, the
        default); ``"center"`` keeps pixels whose centre is inside;
        ``"cover"`` keeps every pixel meeting the closed set (compacts).
        The box edge is never treated as boundary.
        """
        if isinstance(shape, str):
            shape = shape_from_descriptor(shape)
        g = Grid.from_box(box, resolution)
        xs = g.x0 + (np.arange(g.nx) + 0.5) * g.h
        ys = g.y0 + (np.arange(g.ny) + 0.5) * g.h
        X, Y = np.meshgrid(xs, ys)
        phi = shape.sdf(X, Y)
        half_diag = np.sqrt(0.5) * g.h
        if mode == "interior":
            mask = phi < -half_diag
        elif mode == "center":
            mask = phi < 0.0
        elif mode == "cover":
            mask = phi <= half_diag
        else:
            raise ValueError(f"unknown rasterization mode {mode!r}")
        return cls(box, resolution, mask)

    def __or__(self, other):
        _check_compatible(self, other)
        return self.with_mask(self.mask | other.mask)

    def __and__(self, other):
        _check_compatible(self, other)
        return self.with_mask(self.mask & other.mask)

    def __sub__(self, other):
        _check_compatible(self, other)
        return self.with_mask(self.mask & ~other.mask)

    def __le__(self, other):
        _check_compatible(self, other)
        return bool(np.all(~self.mask | other.mask))

    def __eq__(self, other):
        return (isinstance(other, RasterDomain) and self.box == other.box
                and self.resolution == other.resolution and np.array_equal(self.mask, other.mask))

    __hash__ = None

    def is_empty(self):
        return not self.mask.any()

    def boundary_points(self):
        """Centres of complement pixels 4-adjacent to the domain (a raster ∂Ω)."""
        m = self.mask
        grown = ndimage.binary_dilation(m, structure=ndimage.generate_binary_structure(2, 1))
        X, Y = self.pixel_centers()
        sel = grown & ~m
        return np.column_stack([X[sel], Y[sel]])

    def components(self):
        """Number of 4-connected components of the domain."""
        return int(ndimage.label(self.mask, structure=ndimage.generate_binary_structure(2, 1))[1])


def _check_compatible(a, b):
    if a.box != b.box or a.resolution != b.resolution or a.mask.shape != b.mask.shape:
        raise ResolutionMismatch("domains must share box and resolution")


class Length(float):
    """A float carrying the pixel size ``h`` it was measured at."""

    def __new__(cls, value, h):
        obj = super().__new__(cls, value)
        obj.h = float(h)
        return obj


def _closed_complement(o):
    """Complement within the closed box: complement pixels plus a one-pixel
    ring standing for the box boundary."""
    return np.pad(~o.mask, 1, mode="constant", constant_values=True)


def hausdorff_complementary_distance(a, b):
    """Hausdorff distance between ``D \\ a`` and ``D \\ b``.

    Both complements include the box boundary (a one-pixel ring just outside
    the box), so the distance is finite even when one domain is the whole
    box.  Exact Euclidean distance transforms give the same value as the
    brute-force pixel-centre computation.  The result is a :class:`Length`
    whose ``h`` attribute is the pixel size.
    """
    _check_compatible(a, b)
    A, B = _closed_complement(a), _closed_complement(b)
    if np.array_equal(A, B):
        return Length(0.0, a.h)
    dB = ndimage.distance_transform_edt(~B)
    dA = ndimage.distance_transform_edt(~A)
    d = max(float(dB[A].max()), float(dA[B].max()))
    return Length(d * a.h, a.h)


def complement_point_cloud(o):
    """Pixel centres of the closed complement (including the boundary ring)."""
    C = _closed_complement(o)
    ny, nx = C.shape
    xs = o.box[0] + (np.arange(nx) - 0.5) * o.h
    ys = o.box[1] + (np.arange(ny) - 0.5) * o.h
    X, Y = np.meshgrid(xs, ys)
    return np.column_stack([X[C], Y[C]])


def hausdorff_bruteforce(a, b):
    """O(n^2) pixel-pair evaluation of the complementary Hausdorff distance."""
    _check_compatible(a, b)
    A, B = complement_point_cloud(a), complement_point_cloud(b)
    return max(kernels.directed_hausdorff(A, B), kernels.directed_hausdorff(B, A))


def complement_components(o):
    """Number of 8-connected components of the closed complement of ``o``.

    The box boundary belongs to the complement, so the full box has one
    component and every hole not touching the boundary adds one.
    """
    C = _closed_complement(o)
    return int(ndimage.label(C, structure=np.ones((3, 3), dtype=bool))[1])


# ---------------------------------------------------------------------------
# generators
# ---------------------------------------------------------------------------


def cioranescu_murat_domain(n, resolution):
    """Unit square minus the closed disks of radius ``n**-2`` at ``(i/n, j/n)``,
    ``1 <= i, j <= n - 1``.

    Raises ``ResolutionTooCoarse`` when the radius is below two pixels.
    """
    n = int(n)
    if n < 1:
        raise ValueError("n must be a positive integer")
    r = 1.0 / n**2
    if n > 1 and r * resolution < 2.0:
        raise ResolutionTooCoarse(f"hole radius {r:g} is below 2 pixels at resolution {resolution}")
    dom = RasterDomain.full(UNIT_BOX, resolution)
    if n == 1:
        return dom
    X, Y = dom.pixel_centers()
    ix = np.clip(np.rint(X * n), 1, n - 1)
    iy = np.clip(np.rint(Y * n), 1, n - 1)
    dist = np.hypot(X - ix / n, Y - iy / n)
    return dom.with_mask(dist > r + np.sqrt(0.5) * dom.h)


class DomainSequence:
    """A deterministic family ``n -> Omega_n`` with a raster limit.

    Attributes
    ----------
    name : str
    box : tuple
    resolution : float
    limit_note : str
        How the limit relates to the sequence (e.g. unresolved point holes).
    """

    def __init__(self, name, build, limit, box, resolution, limit_note="", n_min=1):
        self.name = name
        self._build = build
        self._limit = limit
        self.box = tuple(box)
        self.resolution = float(resolution)
        self.limit_note = limit_note
        self.n_min = n_min

    def domain(self, n):
        if n < self.n_min:
            raise ValueError(f"{self.name} needs n >= {self.n_min}")
        return self._build(int(n))

    def limit(self):
        return self._limit()

    def __call__(self, n):
        return self.domain(n)


def _raster(shape, box, res):
    return lambda: RasterDomain.from_shape(shape, box, res)


def make_generator(kind, resolution=256, box=UNIT_BOX):
    """Parse a generator descriptor into a :class:`DomainSequence`.

    Recognised descriptors (all lengths in box units):

    ``polygon_exhaustion(shape)``
        inscribed regular n-gons of ``disk(cx,cy,R)``; limit the disk.
    ``shrinking_crack(scale)`` / ``shrinking_crack(cx, cy, scale)``
        box minus a horizontal segment of length ``scale/n``; the limit is
        the box minus the segment's centre point.
    ``perforated``
        the perforated square of :func:`cioranescu_murat_domain`; the
        holes become dense and the Hausdorff-complementary limit is empty.
    ``translated_hole(delta0, radius)``
        box minus a disk centred ``delta0 / n`` right of the box centre.
    ``square_exhaustion(a, b)``
        centred squares of half-side ``a + b/n``; limit half-side ``a``.
    ``attached_bump(shape, size)``
        ``shape`` union a square of side ``size/n`` attached to the right
        of its bounding position (``rect`` shapes only); limit ``shape``.
    ``pinhole(shape, radius)``
        ``shape`` minus a disk of radius ``radius/n`` at the box centre;
        limit ``shape`` minus the centre point.
    ``constant(shape)``
        ``Omega_n = shape`` for all n.
    """
    tree = descriptors.parse(kind) if isinstance(kind, str) else kind
    if isinstance(tree, float):
        raise UnknownGenerator(f"not a generator: {kind!r}")
    name, args = tree
    box = tuple(float(b) for b in box)
    bx0, by0, bx1, by1 = box
    cx, cy = 0.5 * (bx0 + bx1), 0.5 * (by0 + by1)
    res = resolution
    if name == "polygon_exhaustion":
        if len(args) != 1 or not isinstance(args[0], tuple) or args[0][0] != "disk":
            raise descriptors.DescriptorError("polygon_exhaustion takes one disk(cx, cy, R)")
        dcx, dcy, R = descriptors.numbers(args[0][1], "disk", 3)
        return DomainSequence(
            name, lambda n: RasterDomain.from_shape(regular_polygon(dcx, dcy, R, n), box, res),
            _raster(Disk(dcx, dcy, R), box, res), box, res, "inscribed regular n-gons of the disk", n_min=3)
    if name == "shrinking_crack":
        vals = descriptors.numbers(args, name, 1, 3)
        if len(vals) == 2:
            raise descriptors.DescriptorError("shrinking_crack takes (scale) or (cx, cy, scale)")
        scx, scy, scale = (cx, cy, vals[0]) if len(vals) == 1 else vals

        def crack(n):
            half = 0.5 * scale / n
            return RasterDomain.from_shape(Everything() - Segment(scx - half, scy, scx + half, scy), box, res)

        return DomainSequence(name, crack, _raster(Everything() - Disk(scx, scy, 0.0), box, res), box, res,
                              "limit is the box minus the crack centre (the pixels touching it)")
    if name == "perforated":
        descriptors.numbers(args, name, 0)
        if box != UNIT_BOX:
            raise descriptors.DescriptorError("perforated requires the unit box")
        return DomainSequence(name, lambda n: cioranescu_murat_domain(n, res),
                              lambda: RasterDomain.empty(box, res), box, res,
                              "holes become dense: Hausdorff-complementary limit is empty")
    if name == "translated_hole":
        d0, rad = descriptors.numbers(args, name, 2)
        return DomainSequence(
            name, lambda n: RasterDomain.from_shape(Everything() - Disk(cx + d0 / n, cy, rad), box, res),
            _raster(Everything() - Disk(cx, cy, rad), box, res), box, res, "hole centred in the box")
    if name == "square_exhaustion":
        a, b = descriptors.numbers(args, name, 2)
        return DomainSequence(
            name, lambda n: RasterDomain.from_shape(Square(cx, cy, a + b / n), box, res),
            _raster(Square(cx, cy, a), box, res), box, res, "centred squares of half-side a")
    if name == "attached_bump":
        if len(args) != 2 or not isinstance(args[0], tuple) or args[0][0] != "rect":
            raise descriptors.DescriptorError("attached_bump takes (rect(x0,y0,x1,y1), size)")
        x0, y0, x1, y1 = descriptors.numbers(args[0][1], "rect", 4)
        (size,) = descriptors.numbers(args[1:], name, 1)
        base = Rect(x0, y0, x1, y1)
        ym = 0.5 * (y0 + y1)

        def bumped(n):
            s = size / n
            return RasterDomain.from_shape(base | Rect(x1 - s, ym - 0.5 * s, x1 + s, ym + 0.5 * s), box, res)

        return DomainSequence(name, bumped, _raster(base, box, res), box, res,
                              "square bump of side size/n on the right edge")
    if name == "pinhole":
        if len(args) != 2 or not isinstance(args[0], tuple):
            raise descriptors.DescriptorError("pinhole takes (shape, radius)")
        base = shape_from_descriptor(args[0])
        (rad,) = descriptors.numbers(args[1:], name, 1)
        return DomainSequence(
            name, lambda n: RasterDomain.from_shape(base - Disk(cx, cy, rad / n), box, res),
            _raster(base - Disk(cx, cy, 0.0), box, res), box, res,
            "base minus the centre point (the pixels touching it); for p <= 2 the point is removable")
    if name == "constant":
        if len(args) != 1 or not isinstance(args[0], tuple):
            raise descriptors.DescriptorError("constant takes one shape")
        base = shape_from_descriptor(args[0])
        dom = RasterDomain.from_shape(base, box, res)
        return DomainSequence(name, lambda n: dom, lambda: dom, box, res, "constant sequence")
    raise UnknownGenerator(f"unknown domain generator {name!r}")


def domain_sequence(kind, index, resolution=256, box=UNIT_BOX):
    """The ``index``-th domain of the generator described by ``kind``."""
    return make_generator(kind, resolution, box).domain(index)
