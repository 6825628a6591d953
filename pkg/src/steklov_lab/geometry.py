"""Polygonal boundaries, Koch prefractals, domains and the d-set check.

Boundaries are closed polygons carrying one mass per edge.  For a Koch
prefractal the masses follow the self-similar measure (every generation-g
segment of a base edge gets an equal share), which is the discrete stand-in
for the d-dimensional Hausdorff measure on the limit curve.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import NamedTuple, Optional, Sequence

import numpy as np
from scipy.spatial import ConvexHull

from .errors import GeometryError, ParameterError

KOCH_DIMENSION = math.log(4.0) / math.log(3.0)
MAX_KOCH_GENERATION = 8

INTERIOR = "interior"
TRUNCATED = "truncated"


class Point2(NamedTuple):
    x: float
    y: float


def _orient(ax, ay, bx, by, cx, cy):
    return (bx - ax) * (cy - ay) - (by - ay) * (cx - ax)


def _on_segment(px, py, ax, ay, bx, by):
    return ((np.minimum(ax, bx) <= px) & (px <= np.maximum(ax, bx))
            & (np.minimum(ay, by) <= py) & (py <= np.maximum(ay, by)))


def segments_intersect(p1, p2, q1, q2):
    """Vectorized closed-segment intersection test for arrays of shape (m, 2)."""
    p1, p2, q1, q2 = (np.atleast_2d(np.asarray(a, dtype=float)) for a in (p1, p2, q1, q2))
    d1 = _orient(q1[:, 0], q1[:, 1], q2[:, 0], q2[:, 1], p1[:, 0], p1[:, 1])
    d2 = _orient(q1[:, 0], q1[:, 1], q2[:, 0], q2[:, 1], p2[:, 0], p2[:, 1])
    d3 = _orient(p1[:, 0], p1[:, 1], p2[:, 0], p2[:, 1], q1[:, 0], q1[:, 1])
    d4 = _orient(p1[:, 0], p1[:, 1], p2[:, 0], p2[:, 1], q2[:, 0], q2[:, 1])
    proper = (np.sign(d1) * np.sign(d2) < 0) & (np.sign(d3) * np.sign(d4) < 0)
    touch = (
        ((d1 == 0) & _on_segment(p1[:, 0], p1[:, 1], q1[:, 0], q1[:, 1], q2[:, 0], q2[:, 1]))
        | ((d2 == 0) & _on_segment(p2[:, 0], p2[:, 1], q1[:, 0], q1[:, 1], q2[:, 0], q2[:, 1]))
        | ((d3 == 0) & _on_segment(q1[:, 0], q1[:, 1], p1[:, 0], p1[:, 1], p2[:, 0], p2[:, 1]))
        | ((d4 == 0) & _on_segment(q2[:, 0], q2[:, 1], p1[:, 0], p1[:, 1], p2[:, 0], p2[:, 1]))
    )
    return proper | touch


def _candidate_pairs(a, b, a2=None, b2=None):
    """Edge pairs whose bounding boxes share a hash-grid cell.

    With a single edge set the pairs are (i, j), i < j within that set;
    with two sets they are (i, j) across the sets.
    """
    two_sets = a2 is not None
    if two_sets:
        lengths = np.concatenate([np.linalg.norm(b - a, axis=1), np.linalg.norm(b2 - a2, axis=1)])
    else:
        lengths = np.linalg.norm(b - a, axis=1)
    cell = max(float(np.median(lengths)), 1e-300)

    def cells_of(pa, pb):
        lo = np.floor(np.minimum(pa, pb) / cell).astype(np.int64)
        hi = np.floor(np.maximum(pa, pb) / cell).astype(np.int64)
        return lo, hi

    buckets: dict = {}

    def insert(pa, pb, offset):
        lo, hi = cells_of(pa, pb)
        for i in range(len(pa)):
            for cx in range(lo[i, 0], hi[i, 0] + 1):
                for cy in range(lo[i, 1], hi[i, 1] + 1):
                    buckets.setdefault((cx, cy), []).append(i + offset)

    insert(a, b, 0)
    n_first = len(a)
    if two_sets:
        insert(a2, b2, n_first)
    pairs = set()
    for members in buckets.values():
        if len(members) < 2:
            continue
        m = np.asarray(members)
        ii, jj = np.triu_indices(len(m), 1)
        for i, j in zip(m[ii].tolist(), m[jj].tolist()):
            if i > j:
                i, j = j, i
            if two_sets:
                if i < n_first <= j:
                    pairs.add((i, j - n_first))
            else:
                pairs.add((i, j))
    if not pairs:
        return np.zeros((0, 2), dtype=np.int64)
    return np.array(sorted(pairs), dtype=np.int64)


def self_intersections(vertices: np.ndarray) -> np.ndarray:
    """Pairs (i, j) of non-adjacent edges of a closed polygon that intersect."""
    v = np.asarray(vertices, dtype=float)
    n = len(v)
    a, b = v, np.roll(v, -1, axis=0)
    pairs = _candidate_pairs(a, b)
    if len(pairs):
        i, j = pairs[:, 0], pairs[:, 1]
        adjacent = ((j - i) == 1) | ((i == 0) & (j == n - 1))
        pairs = pairs[~adjacent]
    hits = np.zeros((0, 2), dtype=np.int64)
    if len(pairs):
        mask = segments_intersect(a[pairs[:, 0]], b[pairs[:, 0]], a[pairs[:, 1]], b[pairs[:, 1]])
        hits = pairs[mask]
    # adjacent edges folding back onto each other
    e = b - a
    en = np.roll(e, -1, axis=0)
    cross = e[:, 0] * en[:, 1] - e[:, 1] * en[:, 0]
    dot = np.einsum("ij,ij->i", e, en)
    folded = np.nonzero((cross == 0) & (dot < 0))[0]
    if len(folded):
        extra = np.c_[folded, (folded + 1) % n]
        hits = np.vstack([hits, extra])
    return hits


@dataclass(frozen=True, eq=False)
class Polygon:
    """Closed simple polygon; ``vertices`` has shape (n, 2), last edge implicit."""

    vertices: np.ndarray
    check_simple: bool = field(default=True, repr=False)

    def __post_init__(self):
        v = np.array(self.vertices, dtype=float)
        if v.ndim != 2 or v.shape[1] != 2:
            raise GeometryError("polygon vertices must have shape (n, 2)")
        if len(v) < 3:
            raise GeometryError("polygon needs at least 3 vertices")
        if not np.all(np.isfinite(v)):
            raise GeometryError("polygon has non-finite coordinates")
        if np.any(np.all(v == np.roll(v, -1, axis=0), axis=1)):
            raise GeometryError("polygon has repeated consecutive vertices")
        v.setflags(write=False)
        object.__setattr__(self, "vertices", v)
        if self.check_simple:
            hits = self_intersections(v)
            if len(hits):
                i, j = hits[0]
                raise GeometryError(f"polygon is not simple: edges {i} and {j} intersect")
        if self.signed_area == 0.0:
            raise GeometryError("polygon has zero area")

    def __len__(self):
        return len(self.vertices)

    @property
    def n_edges(self) -> int:
        return len(self.vertices)

    @property
    def edge_starts(self) -> np.ndarray:
        return self.vertices

    @property
    def edge_ends(self) -> np.ndarray:
        return np.roll(self.vertices, -1, axis=0)

    @property
    def edge_lengths(self) -> np.ndarray:
        return np.linalg.norm(self.edge_ends - self.edge_starts, axis=1)

    @property
    def signed_area(self) -> float:
        x, y = self.vertices[:, 0], self.vertices[:, 1]
        return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))

    @property
    def area(self) -> float:
        return abs(self.signed_area)

    @property
    def ccw(self) -> bool:
        return self.signed_area > 0

    @property
    def perimeter(self) -> float:
        return float(self.edge_lengths.sum())

    def diameter(self) -> float:
        v = self.vertices
        if len(v) > 3:
            v = v[ConvexHull(v).vertices]
        diff = v[:, None, :] - v[None, :, :]
        return float(np.sqrt((diff ** 2).sum(-1)).max())

    def contains(self, points) -> np.ndarray:
        """Strict point-in-polygon test by even-odd ray casting."""
        p = np.atleast_2d(np.asarray(points, dtype=float))
        a, b = self.edge_starts, self.edge_ends
        inside = np.zeros(len(p), dtype=bool)
        chunk = max(1, 2_000_000 // max(len(a), 1))
        for s in range(0, len(p), chunk):
            px = p[s:s + chunk, 0:1]
            py = p[s:s + chunk, 1:2]
            ay, by = a[:, 1][None, :], b[:, 1][None, :]
            ax, bx = a[:, 0][None, :], b[:, 0][None, :]
            straddle = (ay > py) != (by > py)
            with np.errstate(divide="ignore", invalid="ignore"):
                xcross = ax + (py - ay) * (bx - ax) / (by - ay)
            inside[s:s + chunk] = np.count_nonzero(straddle & (px < xcross), axis=1) % 2 == 1
        on_boundary = distance_to_segments(p, a, b) == 0.0
        return inside & ~on_boundary

    def distance(self, points) -> np.ndarray:
        return distance_to_segments(points, self.edge_starts, self.edge_ends)

    def transformed(self, scale=1.0, shift=(0.0, 0.0)) -> "Polygon":
        return Polygon(self.vertices * scale + np.asarray(shift, dtype=float), check_simple=False)


def distance_to_segments(points, a, b) -> np.ndarray:
    """Distance from each point to the nearest of the segments a[i]-b[i]."""
    p = np.atleast_2d(np.asarray(points, dtype=float))
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    d = b - a
    dd = np.einsum("ij,ij->i", d, d)
    out = np.empty(len(p))
    chunk = max(1, 2_000_000 // max(len(a), 1))
    for s in range(0, len(p), chunk):
        q = p[s:s + chunk, None, :] - a[None, :, :]
        t = np.clip(np.einsum("pij,ij->pi", q, d) / dd, 0.0, 1.0)
        r = q - t[..., None] * d[None, :, :]
        out[s:s + chunk] = np.sqrt(np.einsum("pij,pij->pi", r, r).min(axis=1))
    return out


@dataclass(frozen=True, eq=False)
class MeasuredBoundary:
    """A polygon with one positive mass per edge and a Hausdorff dimension."""

    polygon: Polygon
    segment_masses: np.ndarray
    d: float
    total_mass: float = field(init=False)

    def __post_init__(self):
        m = np.array(self.segment_masses, dtype=float)
        if m.shape != (self.polygon.n_edges,):
            raise GeometryError(
                f"expected {self.polygon.n_edges} segment masses, got {m.shape}")
        if not np.all(m > 0):
            raise GeometryError("segment masses must be positive")
        if not (0.0 < self.d < 2.0):
            raise GeometryError(f"dimension d={self.d} outside (0, 2)")
        m.setflags(write=False)
        object.__setattr__(self, "segment_masses", m)
        object.__setattr__(self, "total_mass", float(m.sum()))

    @property
    def vertices(self) -> np.ndarray:
        return self.polygon.vertices

    @property
    def n_edges(self) -> int:
        return self.polygon.n_edges

    def inradius(self, center=(0.0, 0.0)) -> float:
        return float(self.polygon.distance(np.asarray(center, dtype=float))[0])

    def transformed(self, scale=1.0, shift=(0.0, 0.0)) -> "MeasuredBoundary":
        """Similarity image; masses rescale by scale**d."""
        return MeasuredBoundary(self.polygon.transformed(scale, shift),
                                self.segment_masses * scale ** self.d, self.d)


def arclength_boundary(polygon: Polygon) -> MeasuredBoundary:
    return MeasuredBoundary(polygon, polygon.edge_lengths, 1.0)


def koch_prefractal(base: Polygon, generation: int,
                    measure: str = "self-similar") -> MeasuredBoundary:
    """Replace every edge ``generation`` times by the four-segment Koch generator.

    Bumps point away from the enclosed region.  With ``measure="self-similar"``
    each base edge of length L carries mass L**d split evenly over its 4**g
    final segments; ``measure="arclength"`` uses Euclidean lengths and d = 1.
    """
    if generation < 0 or generation > MAX_KOCH_GENERATION:
        raise ParameterError(f"generation must be in [0, {MAX_KOCH_GENERATION}]")
    if measure not in ("self-similar", "arclength"):
        raise ParameterError(f"unknown measure '{measure}'")
    z = base.vertices[:, 0] + 1j * base.vertices[:, 1]
    # outward is to the right of the edge direction for a CCW polygon
    turn = np.exp(-1j * np.pi / 3) if base.ccw else np.exp(1j * np.pi / 3)
    for _ in range(generation):
        a = z
        b = np.roll(z, -1)
        s1 = a + (b - a) / 3.0
        s2 = a + 2.0 * (b - a) / 3.0
        tip = s1 + (s2 - s1) * turn
        z = np.column_stack([a, s1, tip, s2]).ravel()
    try:
        poly = Polygon(np.column_stack([z.real, z.imag]))
    except GeometryError as exc:
        raise GeometryError(f"Koch generation {generation} is not simple: {exc}") from exc
    if measure == "arclength":
        return MeasuredBoundary(poly, poly.edge_lengths, 1.0)
    per_base = base.edge_lengths ** KOCH_DIMENSION
    masses = np.repeat(per_base * 4.0 ** (-generation), 4 ** generation)
    return MeasuredBoundary(poly, masses, KOCH_DIMENSION)


def equilateral_triangle(side: float = 1.0, center=(0.0, 0.0)) -> Polygon:
    """CCW equilateral triangle with centroid at ``center``."""
    r = side / math.sqrt(3.0)
    t = np.pi / 2 + 2 * np.pi * np.arange(3) / 3
    return Polygon(np.column_stack([r * np.cos(t), r * np.sin(t)]) + np.asarray(center, float))


def koch_snowflake(side: float = 1.0, generation: int = 0, center=(0.0, 0.0),
                   measure: str = "self-similar") -> MeasuredBoundary:
    return koch_prefractal(equilateral_triangle(side, center), generation, measure)


def circle_polygon(radius: float, n_segments: int,
                   center: Sequence[float] = Point2(0.0, 0.0)) -> MeasuredBoundary:
    """Regular CCW n-gon inscribed in the circle, arclength masses, d = 1."""
    if not radius > 0:
        raise ParameterError("radius must be positive")
    if n_segments < 3:
        raise ParameterError("a circle polygon needs at least 3 segments")
    t = 2.0 * np.pi * np.arange(n_segments) / n_segments
    v = np.column_stack([radius * np.cos(t), radius * np.sin(t)]) + np.asarray(center, float)
    poly = Polygon(v, check_simple=False)
    masses = np.full(n_segments, 2.0 * radius * math.sin(math.pi / n_segments))
    return MeasuredBoundary(poly, masses, 1.0)


def square_polygon(half_side: float, center=(0.0, 0.0)) -> MeasuredBoundary:
    """Axis-aligned CCW square with arclength masses; inradius = half_side."""
    h = float(half_side)
    v = np.array([[-h, -h], [h, -h], [h, h], [-h, h]]) + np.asarray(center, float)
    return arclength_boundary(Polygon(v))


@dataclass(frozen=True, eq=False)
class DomainSpec:
    """Interior domain bounded by Gamma, or the region between Gamma and S."""

    kind: str
    gamma: MeasuredBoundary
    s: Optional[MeasuredBoundary] = None
    clearance: float = math.inf

    @property
    def is_truncated(self) -> bool:
        return self.kind == TRUNCATED


def boundary_clearance(gamma: MeasuredBoundary, s: MeasuredBoundary) -> float:
    g, sv = gamma.polygon, s.polygon
    d1 = distance_to_segments(g.vertices, sv.edge_starts, sv.edge_ends).min()
    d2 = distance_to_segments(sv.vertices, g.edge_starts, g.edge_ends).min()
    return float(min(d1, d2))


def _polylines_cross(p: Polygon, q: Polygon) -> bool:
    a, b = p.edge_starts, p.edge_ends
    c, d = q.edge_starts, q.edge_ends
    pairs = _candidate_pairs(a, b, c, d)
    if not len(pairs):
        return False
    return bool(segments_intersect(a[pairs[:, 0]], b[pairs[:, 0]],
                                   c[pairs[:, 1]], d[pairs[:, 1]]).any())


def make_domain(kind: str, gamma: MeasuredBoundary,
                s: Optional[MeasuredBoundary] = None) -> DomainSpec:
    if kind == INTERIOR:
        return DomainSpec(INTERIOR, gamma)
    if kind != TRUNCATED:
        raise ParameterError(f"unknown domain kind '{kind}'")
    if s is None:
        raise ParameterError("a truncated domain needs the outer boundary S")
    if not np.all(s.polygon.contains(gamma.vertices)):
        raise GeometryError("Gamma is not strictly inside S")
    if _polylines_cross(gamma.polygon, s.polygon):
        raise GeometryError("Gamma and S intersect")
    clearance = boundary_clearance(gamma, s)
    if not clearance > 0:
        raise GeometryError("Gamma and S touch (zero clearance)")
    return DomainSpec(TRUNCATED, gamma, s, clearance)


class DsetEstimate(NamedTuple):
    slope: float
    c1_hat: float
    c2_hat: float


def ball_masses(b: MeasuredBoundary, centers, radius: float) -> np.ndarray:
    """m(B_r(x) ∩ Γ) for each center, clipping each segment's mass by the
    fraction of its length inside the disk."""
    c = np.atleast_2d(np.asarray(centers, dtype=float))
    a = b.polygon.edge_starts
    d = b.polygon.edge_ends - a
    dd = np.einsum("ij,ij->i", d, d)
    out = np.empty(len(c))
    for k, x in enumerate(c):
        w = a - x
        half_b = np.einsum("ij,ij->i", d, w)
        cc = np.einsum("ij,ij->i", w, w) - radius * radius
        disc = half_b * half_b - dd * cc
        hit = disc > 0
        sq = np.sqrt(np.where(hit, disc, 0.0))
        t1 = np.clip((-half_b - sq) / dd, 0.0, 1.0)
        t2 = np.clip((-half_b + sq) / dd, 0.0, 1.0)
        frac = np.where(hit, np.maximum(t2 - t1, 0.0), 0.0)
        out[k] = float(np.dot(frac, b.segment_masses))
    return out


def sample_boundary_points(b: MeasuredBoundary, n: int, rng: np.random.Generator) -> np.ndarray:
    p = b.segment_masses / b.total_mass
    idx = rng.choice(b.n_edges, size=n, p=p)
    t = rng.random(n)
    a = b.polygon.edge_starts[idx]
    return a + t[:, None] * (b.polygon.edge_ends[idx] - a)


def dset_dimension_estimate(b: MeasuredBoundary, radii, n_centers: int = 64,
                            seed: int = 0) -> DsetEstimate:
    """Fit log m(B_r(x) ∩ Γ) against log r, pooled over random centers on Γ.

    Returns the least-squares slope and the empirical extremes of m / r**slope.
    """
    r = np.asarray(radii, dtype=float)
    if r.ndim != 1 or len(r) < 2:
        raise ParameterError("need at least two radii")
    if np.any(np.diff(r) >= 0):
        raise ParameterError("radii must be strictly decreasing")
    if np.any(r <= 0) or np.any(r > 1):
        raise ParameterError("radii must lie in (0, 1]")
    if n_centers < 8:
        raise ParameterError("n_centers must be at least 8")
    diam = b.polygon.diameter()
    if r.max() > diam:
        raise ParameterError(f"radius {r.max()} exceeds boundary diameter {diam}")
    seg = b.polygon.edge_lengths.max()
    if r.max() > diam / 3 or r.min() < 3 * seg:
        warnings.warn("radii leave the scale band [3*segment, diameter/3]; "
                      "the slope may not reflect the d-set scaling", stacklevel=2)
    rng = np.random.default_rng(seed)
    centers = sample_boundary_points(b, n_centers, rng)
    m = np.array([ball_masses(b, centers, ri) for ri in r])  # (n_radii, n_centers)
    x = np.repeat(np.log(r), n_centers)
    y = np.log(m.ravel())
    slope = float(np.polyfit(x, y, 1)[0])
    ratio = m / r[:, None] ** slope
    return DsetEstimate(slope, float(ratio.min()), float(ratio.max()))


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def write_boundary(path, b: MeasuredBoundary) -> None:
    lines = [f"MB {_fmt(b.d)} {len(b.vertices)}"]
    lines += [f"{_fmt(x)} {_fmt(y)}" for x, y in b.vertices]
    lines += [_fmt(m) for m in b.segment_masses]
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def read_boundary(path) -> MeasuredBoundary:
    with open(path) as fh:
        rows = [ln.split() for ln in fh if ln.strip()]
    if not rows or rows[0][0] != "MB" or len(rows[0]) != 3:
        raise GeometryError(f"{path}: missing 'MB <d> <n_vertices>' header")
    d = float(rows[0][1])
    n = int(rows[0][2])
    if len(rows) != 1 + 2 * n:
        raise GeometryError(f"{path}: expected {n} vertex and {n} mass lines")
    v = np.array([[float(a), float(c)] for a, c in rows[1:1 + n]])
    m = np.array([float(r[0]) for r in rows[1 + n:]])
    return MeasuredBoundary(Polygon(v), m, d)
