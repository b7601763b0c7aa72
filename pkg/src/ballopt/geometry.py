"""Rasterized domains, distance fields, admissible center sets, blow-up grids.

Domains are vertex lattices: node k sits at ``origin + k*h`` and the interior
mask keeps the nodes strictly inside the analytic shape, so Dirichlet
conditions eliminate the boundary nodes themselves.  Distances use exact
closed forms (rectangle, disk, ellipse, L-shape, polygon via its edge
segments); the grid distance field for polygons is additionally available
through a two-pass chamfer transform, and unions of primitives use the
pointwise max of member signed distances (exact away from the overlap seams).

All objects are immutable after construction and all operations are pure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from . import _kernels
from .limit import UNIT_BALL_VOLUME, ball_radius


# ---------------------------------------------------------------------------
# Analytic shapes
# ---------------------------------------------------------------------------

class Shape:
    """Analytic domain: strict membership, distance to boundary, bbox."""

    dim: int
    tag: str

    def contains(self, pts: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def distance(self, pts: np.ndarray) -> np.ndarray:
        """Distance to the boundary for interior points, 0 outside."""
        raise NotImplementedError

    def bbox(self) -> tuple[np.ndarray, np.ndarray]:
        raise NotImplementedError

    def anchor(self) -> np.ndarray:
        """Point the lattice is aligned to (a node lands exactly here)."""
        lo, hi = self.bbox()
        return 0.5 * (lo + hi)

    def translated(self, shift) -> "Shape":
        raise NotImplementedError


def _pts2d(pts: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    pts = np.atleast_2d(np.asarray(pts, dtype=float))
    return pts[:, 0], pts[:, 1]


@dataclass(frozen=True)
class Interval(Shape):
    lo: float
    hi: float
    dim: int = 1
    tag: str = "interval"

    def contains(self, pts):
        x = np.asarray(pts, dtype=float).reshape(-1)
        return (x > self.lo) & (x < self.hi)

    def distance(self, pts):
        x = np.asarray(pts, dtype=float).reshape(-1)
        return np.maximum(np.minimum(x - self.lo, self.hi - x), 0.0)

    def bbox(self):
        return np.array([self.lo]), np.array([self.hi])

    def anchor(self):
        return np.array([0.5 * (self.lo + self.hi)])

    def translated(self, shift):
        s = float(np.asarray(shift).reshape(-1)[0])
        return Interval(self.lo + s, self.hi + s)


@dataclass(frozen=True)
class Rectangle(Shape):
    lo: tuple[float, float]
    hi: tuple[float, float]
    dim: int = 2
    tag: str = "rectangle"

    def contains(self, pts):
        x, y = _pts2d(pts)
        return (x > self.lo[0]) & (x < self.hi[0]) & (y > self.lo[1]) & (y < self.hi[1])

    def distance(self, pts):
        x, y = _pts2d(pts)
        d = np.minimum(np.minimum(x - self.lo[0], self.hi[0] - x),
                       np.minimum(y - self.lo[1], self.hi[1] - y))
        return np.maximum(d, 0.0)

    def bbox(self):
        return np.asarray(self.lo, dtype=float), np.asarray(self.hi, dtype=float)

    def anchor(self):
        return np.asarray(self.lo, dtype=float)

    def translated(self, shift):
        s = np.asarray(shift, dtype=float)
        return Rectangle(tuple(np.add(self.lo, s)), tuple(np.add(self.hi, s)))


@dataclass(frozen=True)
class Disk(Shape):
    center: tuple[float, float]
    radius: float
    dim: int = 2
    tag: str = "disk"

    def contains(self, pts):
        x, y = _pts2d(pts)
        return (x - self.center[0]) ** 2 + (y - self.center[1]) ** 2 < self.radius ** 2

    def distance(self, pts):
        x, y = _pts2d(pts)
        r = np.hypot(x - self.center[0], y - self.center[1])
        return np.maximum(self.radius - r, 0.0)

    def bbox(self):
        c = np.asarray(self.center, dtype=float)
        return c - self.radius, c + self.radius

    def anchor(self):
        return np.asarray(self.center, dtype=float)

    def translated(self, shift):
        return Disk(tuple(np.add(self.center, shift)), self.radius)


@dataclass(frozen=True)
class Ellipse(Shape):
    center: tuple[float, float]
    semi_axes: tuple[float, float]
    dim: int = 2
    tag: str = "ellipse"

    def contains(self, pts):
        x, y = _pts2d(pts)
        u = (x - self.center[0]) / self.semi_axes[0]
        v = (y - self.center[1]) / self.semi_axes[1]
        return u * u + v * v < 1.0

    def distance(self, pts):
        x, y = _pts2d(pts)
        px = np.abs(x - self.center[0])
        py = np.abs(y - self.center[1])
        out = np.zeros_like(px)
        inside = (px / self.semi_axes[0]) ** 2 + (py / self.semi_axes[1]) ** 2 < 1.0
        a, b = self.semi_axes
        for i in np.nonzero(inside)[0]:
            out[i] = _ellipse_boundary_distance(a, b, px[i], py[i])
        return out

    def bbox(self):
        c = np.asarray(self.center, dtype=float)
        s = np.asarray(self.semi_axes, dtype=float)
        return c - s, c + s

    def anchor(self):
        return np.asarray(self.center, dtype=float)

    def translated(self, shift):
        return Ellipse(tuple(np.add(self.center, shift)), self.semi_axes)


def _ellipse_boundary_distance(a: float, b: float, px: float, py: float) -> float:
    """Distance from an interior point (px, py >= 0) to the ellipse boundary.

    Minimizes |(a cos t, b sin t) - p|^2 over t in [0, pi/2] by golden-section
    (the nearest-point angle for a first-quadrant point lies in that arc).
    """
    gr = 0.5 * (math.sqrt(5.0) - 1.0)
    lo, hi = 0.0, 0.5 * math.pi

    def f(t):
        return (a * math.cos(t) - px) ** 2 + (b * math.sin(t) - py) ** 2

    c = hi - gr * (hi - lo)
    d = lo + gr * (hi - lo)
    fc, fd = f(c), f(d)
    for _ in range(90):
        if fc < fd:
            hi, d, fd = d, c, fc
            c = hi - gr * (hi - lo)
            fc = f(c)
        else:
            lo, c, fc = c, d, fd
            d = lo + gr * (hi - lo)
            fd = f(d)
    return math.sqrt(min(fc, fd))


def _segment_distance(pts: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Distance from each point to the segment [a, b]."""
    ab = b - a
    denom = float(ab @ ab)
    t = np.clip(((pts - a) @ ab) / denom, 0.0, 1.0) if denom > 0 else np.zeros(len(pts))
    proj = a + t[:, None] * ab
    return np.linalg.norm(pts - proj, axis=1)


@dataclass(frozen=True)
class Polygon(Shape):
    """Simple polygon; membership by ray casting, distance by edge segments."""

    vertices: tuple[tuple[float, float], ...]
    dim: int = 2
    tag: str = "polygon"

    def _verts(self) -> np.ndarray:
        return np.asarray(self.vertices, dtype=float)

    def contains(self, pts):
        v = self._verts()
        x, y = _pts2d(pts)
        n = len(v)
        inside = np.zeros(x.shape, dtype=bool)
        j = n - 1
        with np.errstate(divide="ignore", invalid="ignore"):
            for i in range(n):
                xi, yi = v[i]
                xj, yj = v[j]
                straddles = (yi > y) != (yj > y)
                crossing = x < (xj - xi) * (y - yi) / (yj - yi) + xi
                inside ^= straddles & np.where(np.isfinite(crossing), crossing, False)
                j = i
        return inside

    def distance(self, pts):
        p = np.atleast_2d(np.asarray(pts, dtype=float))
        v = self._verts()
        d = np.full(len(p), np.inf)
        for i in range(len(v)):
            d = np.minimum(d, _segment_distance(p, v[i], v[(i + 1) % len(v)]))
        return np.where(self.contains(p), d, 0.0)

    def bbox(self):
        v = self._verts()
        return v.min(axis=0), v.max(axis=0)

    def anchor(self):
        return self._verts().min(axis=0)

    def translated(self, shift):
        s = np.asarray(shift, dtype=float)
        return Polygon(tuple(tuple(q) for q in self._verts() + s))


def lshape(size: float = 2.0, notch: float = 1.0, origin=(0.0, 0.0)) -> Polygon:
    """L-shaped domain: [0,size]^2 minus the top-right [size-notch,size]^2 square."""
    ox, oy = origin
    s, n = size, notch
    verts = ((ox, oy), (ox + s, oy), (ox + s, oy + s - n), (ox + s - n, oy + s - n),
             (ox + s - n, oy + s), (ox, oy + s))
    return Polygon(verts, tag="L-shape")


@dataclass(frozen=True)
class ShapeUnion(Shape):
    """Union of member shapes (e.g. a dumbbell: two disks bridged by a neck).

    The distance field is the max of the members' interior distances, which is
    exact wherever the nearest boundary point of the winning member lies on
    the union's boundary; near overlap seams it is only a proxy, so admissible
    sets built from it remain conservative (ball inside the winning member).
    """

    members: tuple[Shape, ...]
    dim: int = 2
    tag: str = "disk-union"

    def contains(self, pts):
        out = np.zeros(np.atleast_2d(pts).shape[0], dtype=bool)
        for m in self.members:
            out |= m.contains(pts)
        return out

    def distance(self, pts):
        out = np.zeros(np.atleast_2d(pts).shape[0], dtype=float)
        for m in self.members:
            out = np.maximum(out, m.distance(pts))
        return out

    def bbox(self):
        los, his = zip(*(m.bbox() for m in self.members))
        return np.min(los, axis=0), np.max(his, axis=0)

    def anchor(self):
        return self.members[0].anchor()

    def translated(self, shift):
        return ShapeUnion(tuple(m.translated(shift) for m in self.members), tag=self.tag)


def dumbbell(r_big: float = 0.5, r_small: float = 0.3, gap: float = 0.3,
             neck_halfwidth: float = 0.08, origin=(0.0, 0.0)) -> ShapeUnion:
    """Two disks joined by a thin rectangular neck; incenter sits in the big disk."""
    ox, oy = origin
    c2 = ox + r_big + gap + r_small
    return ShapeUnion((
        Disk((ox, oy), r_big),
        Disk((c2, oy), r_small),
        Rectangle((ox, oy - neck_halfwidth), (c2, oy + neck_halfwidth)),
    ))


@dataclass(frozen=True)
class MappedShape(Shape):
    """Pullback of a shape under y -> center + scale*y (blow-up coordinates)."""

    base: Shape
    center: np.ndarray
    scale: float
    tag: str = "blow-up"

    @property
    def dim(self):  # type: ignore[override]
        return self.base.dim

    def _push(self, pts):
        pts = np.atleast_2d(np.asarray(pts, dtype=float)) if self.base.dim > 1 \
            else np.asarray(pts, dtype=float).reshape(-1, 1)
        return np.asarray(self.center) + self.scale * pts

    def contains(self, pts):
        return self.base.contains(self._push(pts))

    def distance(self, pts):
        return self.base.distance(self._push(pts)) / self.scale

    def bbox(self):
        lo, hi = self.base.bbox()
        c = np.asarray(self.center)
        return (lo - c) / self.scale, (hi - c) / self.scale

    def anchor(self):
        return np.zeros(self.base.dim)


SHAPE_BUILDERS = {
    "interval": lambda p: Interval(p["lo"], p["hi"]),
    "rectangle": lambda p: Rectangle(tuple(p["lo"]), tuple(p["hi"])),
    "disk": lambda p: Disk(tuple(p.get("center", (0.0, 0.0))), p["radius"]),
    "ellipse": lambda p: Ellipse(tuple(p.get("center", (0.0, 0.0))), tuple(p["semi_axes"])),
    "L-shape": lambda p: lshape(p.get("size", 2.0), p.get("notch", 1.0),
                                tuple(p.get("origin", (0.0, 0.0)))),
    "polygon": lambda p: Polygon(tuple(tuple(v) for v in p["vertices"])),
    "dumbbell": lambda p: dumbbell(p.get("r_big", 0.5), p.get("r_small", 0.3),
                                   p.get("gap", 0.3), p.get("neck_halfwidth", 0.08)),
}


# ---------------------------------------------------------------------------
# Grids
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GridSpec:
    """Vertex lattice: node k at origin + k*h along each axis."""

    dim: int
    h: float
    origin: tuple[float, ...]
    counts: tuple[int, ...]  # nodes per axis

    def __post_init__(self):
        if self.h <= 0:
            raise ValueError("grid spacing must be positive")
        if self.dim not in (1, 2):
            raise ValueError("grid domains support dimensions 1 and 2")
        if any(c < 3 for c in self.counts):
            raise ValueError("grid extents must be at least 3 nodes per axis")

    def axes(self) -> list[np.ndarray]:
        return [self.origin[d] + self.h * np.arange(self.counts[d])
                for d in range(self.dim)]

    def nodes(self) -> np.ndarray:
        """All node coordinates, shape (n_nodes, dim); 2D is row-major (y, x)."""
        if self.dim == 1:
            return self.axes()[0].reshape(-1, 1)
        ax, ay = self.axes()
        X, Y = np.meshgrid(ax, ay)
        return np.column_stack([X.ravel(), Y.ravel()])


@dataclass(frozen=True)
class GridDomain:
    """Rasterized domain: grid, interior mask, node distance field."""

    grid: GridSpec
    interior_mask: np.ndarray  # bool, shape counts[::-1] (2D: (ny, nx))
    dist: np.ndarray           # float, same shape; 0 outside interior
    shape: Shape
    shape_tag: str = field(default="")

    def __post_init__(self):
        object.__setattr__(self, "shape_tag", self.shape_tag or self.shape.tag)
        self.interior_mask.setflags(write=False)
        self.dist.setflags(write=False)

    @property
    def dim(self) -> int:
        return self.grid.dim

    @property
    def h(self) -> float:
        return self.grid.h

    def node_coords(self) -> np.ndarray:
        return self.grid.nodes()

    def interior_coords(self) -> np.ndarray:
        return self.node_coords()[self.interior_mask.ravel()]

    def interior_count(self) -> int:
        return int(self.interior_mask.sum())

    def discrete_volume(self) -> float:
        return self.interior_count() * self.h ** self.dim

    def point_distance(self, x) -> float:
        """Analytic distance to the boundary at an arbitrary point."""
        return float(self.shape.distance(np.atleast_2d(np.asarray(x, dtype=float)))[0])

    def point_inside(self, x) -> bool:
        return bool(self.shape.contains(np.atleast_2d(np.asarray(x, dtype=float)))[0])


def _connected(mask: np.ndarray) -> bool:
    if mask.ndim == 1:
        labels, n = ndimage.label(mask.astype(np.int8))
    else:
        labels, n = ndimage.label(mask.astype(np.int8),
                                  structure=np.array([[0, 1, 0], [1, 1, 1], [0, 1, 0]]))
    return n == 1


def build_domain(shape: Shape, h: float, *, chamfer: bool | None = None) -> GridDomain:
    """Rasterize an analytic shape on an h-lattice aligned to its anchor point.

    Raises ``ValueError("degenerate grid")`` when the interior nodes do not
    form a single connected component.
    """
    lo, hi = shape.bbox()
    anchor = np.asarray(shape.anchor(), dtype=float)
    # One padding node beyond the bbox on each side, lattice through the anchor.
    below = np.ceil((anchor - lo) / h - 1e-12).astype(int) + 1
    above = np.ceil((hi - anchor) / h - 1e-12).astype(int) + 1
    origin = anchor - below * h
    counts = below + above + 1
    spec = GridSpec(dim=shape.dim, h=h, origin=tuple(origin), counts=tuple(int(c) for c in counts))
    pts = spec.nodes()
    flat = pts if shape.dim > 1 else pts[:, 0]
    # nodes meant to land exactly on the boundary can leak inside by one ulp
    # of coordinate arithmetic; treat them as boundary nodes
    mask_flat = shape.contains(flat) & (shape.distance(flat) > 1e-9 * h)
    shp = tuple(spec.counts[::-1]) if shape.dim == 2 else (spec.counts[0],)
    mask = mask_flat.reshape(shp)
    if not mask.any():
        raise ValueError("degenerate grid: no interior nodes")
    if not _connected(mask):
        raise ValueError("degenerate grid: interior is disconnected at this resolution")

    use_chamfer = chamfer if chamfer is not None else isinstance(shape, Polygon) and shape.tag == "polygon"
    if use_chamfer:
        dist = _kernels.chamfer_distance(mask, h)
    else:
        dist = np.where(mask_flat, shape.distance(pts if shape.dim > 1 else pts[:, 0]), 0.0).reshape(shp)
    return GridDomain(grid=spec, interior_mask=mask, dist=np.ascontiguousarray(dist), shape=shape)


def distance_field(domain: GridDomain) -> np.ndarray:
    """Per-node distances to the boundary (0 outside the interior)."""
    return domain.dist


def chamfer_field(domain: GridDomain) -> np.ndarray:
    """Two-pass chamfer transform of the interior mask (grid fallback metric)."""
    if domain.dim == 1:
        return _kernels.chamfer_distance(domain.interior_mask.reshape(1, -1), domain.h)[0]
    return _kernels.chamfer_distance(domain.interior_mask, domain.h)


def incenter(domain: GridDomain) -> tuple[np.ndarray, float]:
    """Deepest node of the distance field and its distance.

    Exact ties (distance plateaus) are resolved to the tied node nearest the
    plateau centroid, then by lexicographic index, so symmetric domains report
    their center of symmetry and reruns are reproducible.
    """
    d = domain.dist
    d_max = float(d.max())
    # plateau detection tolerant to last-ulp noise from irrational origins
    tied = np.flatnonzero(d.ravel() >= d_max - 1e-9 * max(d_max, 1.0))
    coords = domain.node_coords()[tied]
    centroid = coords.mean(axis=0)
    off = np.linalg.norm(coords - centroid, axis=1)
    best = int(tied[np.lexsort((tied, off))[0]])
    return domain.node_coords()[best], d_max


def admissible_centers(domain: GridDomain, eps: float) -> np.ndarray:
    """Mask of nodes that can host the center of the ball of measure eps."""
    r = ball_radius(eps, domain.dim)
    mask = domain.dist >= r
    if not mask.any():
        raise ValueError("epsilon too large for domain")
    return mask


def blow_up_domain(domain: GridDomain, center, k: float, window: float,
                   h_blow: float | None = None,
                   memory_budget: int = 40_000_000) -> GridDomain:
    """Rasterize the blow-up set {y : center + k*y inside} on [-window, window]^N.

    The blow-up lattice passes through y = 0, so records evaluated at the
    origin are exact node values.  Raises with the required node count when
    the window exceeds the memory budget.
    """
    if k <= 0 or window <= 0:
        raise ValueError("blow-up scale and window must be positive")
    center = np.asarray(center, dtype=float).reshape(-1)
    if not domain.point_inside(center):
        raise ValueError("blow-up center must be interior")
    h_b = h_blow if h_blow is not None else domain.h / k
    n_side = int(math.floor(window / h_b + 1e-12))
    total = (2 * n_side + 1) ** domain.dim
    if total > memory_budget:
        raise MemoryError(
            f"blow-up window needs {total} nodes, exceeding the budget of {memory_budget}"
        )
    mapped = MappedShape(base=domain.shape, center=center, scale=k)
    origin = tuple(-n_side * h_b for _ in range(domain.dim))
    spec = GridSpec(dim=domain.dim, h=h_b, origin=origin,
                    counts=tuple(2 * n_side + 1 for _ in range(domain.dim)))
    pts = spec.nodes()
    flat = pts if domain.dim > 1 else pts[:, 0]
    dist_flat = mapped.distance(flat)
    mask_flat = mapped.contains(flat) & (dist_flat > 1e-9 * h_b)
    shp = tuple(spec.counts[::-1]) if domain.dim == 2 else (spec.counts[0],)
    mask = mask_flat.reshape(shp)
    dist = np.where(mask_flat, dist_flat, 0.0).reshape(shp)
    return GridDomain(grid=spec, interior_mask=mask, dist=np.ascontiguousarray(dist),
                      shape=mapped, shape_tag="blow-up")


def export_distance_csv(domain: GridDomain) -> str:
    """Distance field as CSV text with header ``x,y,d`` (row-major)."""
    pts = domain.node_coords()
    d = domain.dist.ravel()
    lines = ["x,y,d"] if domain.dim == 2 else ["x,d"]
    for i in range(len(d)):
        if domain.dim == 2:
            lines.append(f"{pts[i,0]:.17g},{pts[i,1]:.17g},{d[i]:.17g}")
        else:
            lines.append(f"{pts[i,0]:.17g},{d[i]:.17g}")
    return "\n".join(lines) + "\n"
