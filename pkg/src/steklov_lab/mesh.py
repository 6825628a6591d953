"""Conforming triangulations of the interior and truncated domains.

Boundary polygon edges are pre-split into equal pieces no longer than the
target size and frozen (no Steiner points on segments), so two meshes built
from the same Gamma and ``h_target`` share the exact same Gamma vertices, in
the same order, at the front of the vertex array.  The bulk is meshed by
Triangle (constrained Delaunay + Ruppert refinement) with a graded size field.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import NamedTuple, Optional

import numpy as np
import triangle as tr
from scipy.spatial import cKDTree

from .errors import GeometryError, MeshQualityError, MeshValidationError, ParameterError
from .geometry import INTERIOR, TRUNCATED, DomainSpec, MeasuredBoundary, Polygon

INTERIOR_TAG = 0
GAMMA = 1
S = 2
_TAG_NAMES = {INTERIOR_TAG: "I", GAMMA: "G", S: "S"}
_TAG_CODES = {v: k for k, v in _TAG_NAMES.items()}

MIN_ANGLE = 20.0


@dataclass(frozen=True, eq=False)
class Mesh:
    """Triangle mesh with tagged boundary vertices and edges.

    Per-vertex arrays: ``vertex_tag`` (0 interior, 1 Gamma, 2 S),
    ``vertex_edge`` (polygon edge index or -1) and ``vertex_param`` (position
    in [0, 1) along that edge).  Per-boundary-edge arrays: ``boundary_edges``
    (vertex pairs), ``edge_tag``, ``edge_poly`` (polygon edge index),
    ``edge_params`` (start/end parameters on that polygon edge) and
    ``edge_mass`` (the share of the polygon edge's d-mass).
    """

    vertices: np.ndarray
    triangles: np.ndarray
    vertex_tag: np.ndarray
    vertex_edge: np.ndarray
    vertex_param: np.ndarray
    boundary_edges: np.ndarray
    edge_tag: np.ndarray
    edge_poly: np.ndarray
    edge_params: np.ndarray
    edge_mass: np.ndarray
    domain: Optional[DomainSpec] = None

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_triangles(self) -> int:
        return len(self.triangles)

    @property
    def kind(self) -> str:
        if self.domain is not None:
            return self.domain.kind
        return TRUNCATED if np.any(self.vertex_tag == S) else INTERIOR

    @property
    def is_truncated(self) -> bool:
        return self.kind == TRUNCATED

    def boundary(self, which: int) -> Optional[MeasuredBoundary]:
        if self.domain is None:
            return None
        return self.domain.gamma if which == GAMMA else self.domain.s

    def signed_areas(self) -> np.ndarray:
        p = self.vertices[self.triangles]
        e1 = p[:, 1] - p[:, 0]
        e2 = p[:, 2] - p[:, 0]
        return 0.5 * (e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0])

    def total_area(self) -> float:
        return float(self.signed_areas().sum())

    def edges(self):
        """Unique undirected edges (sorted pairs) and their triangle counts."""
        t = self.triangles
        e = np.sort(np.vstack([t[:, [0, 1]], t[:, [1, 2]], t[:, [2, 0]]]), axis=1)
        uniq, counts = np.unique(e, axis=0, return_counts=True)
        return uniq, counts

    def tagged_vertices(self, which: int) -> np.ndarray:
        """Vertices carrying ``which``, ordered along the polygon."""
        idx = np.nonzero(self.vertex_tag == which)[0]
        order = np.lexsort((self.vertex_param[idx], self.vertex_edge[idx]))
        return idx[order]

    def euler_characteristic(self) -> int:
        return self.n_vertices - len(self.edges()[0]) + self.n_triangles

    def transformed(self, scale=1.0, shift=(0.0, 0.0), rotation=0.0) -> "Mesh":
        """Similarity image of the mesh; masses rescale by ``scale**d``."""
        c, s = math.cos(rotation), math.sin(rotation)
        rot = np.array([[c, -s], [s, c]])
        v = (self.vertices @ rot.T) * scale + np.asarray(shift, float)
        dom = None
        mass = self.edge_mass.copy()
        if self.domain is not None:

            def move(b):
                p = Polygon((b.vertices @ rot.T) * scale + np.asarray(shift, float),
                            check_simple=False)
                return MeasuredBoundary(p, b.segment_masses * scale ** b.d, b.d)

            g = move(self.domain.gamma)
            sb = move(self.domain.s) if self.domain.s is not None else None
            dom = DomainSpec(self.domain.kind, g, sb, self.domain.clearance * scale)
            for tag, b in ((GAMMA, self.domain.gamma), (S, self.domain.s)):
                if b is not None:
                    mass[self.edge_tag == tag] *= scale ** b.d
        return replace(self, vertices=v, edge_mass=mass, domain=dom)


class MeshQuality(NamedTuple):
    min_angle: float
    max_aspect: float
    h_max: float
    n_vertices: int
    n_triangles: int


def triangle_angles(points: np.ndarray, triangles: np.ndarray) -> np.ndarray:
    p = points[triangles]
    out = np.empty(triangles.shape)
    for k in range(3):
        u = p[:, (k + 1) % 3] - p[:, k]
        w = p[:, (k + 2) % 3] - p[:, k]
        cosang = np.einsum("ij,ij->i", u, w) / (np.linalg.norm(u, axis=1) * np.linalg.norm(w, axis=1))
        out[:, k] = np.degrees(np.arccos(np.clip(cosang, -1.0, 1.0)))
    return out


def _split_polygon(b: MeasuredBoundary, size_at) -> tuple:
    """Split every polygon edge into equal pieces of length <= local size."""
    a = b.polygon.edge_starts
    e = b.polygon.edge_ends - a
    lengths = np.linalg.norm(e, axis=1)
    pts, edge_idx, params = [], [], []
    for i in range(b.n_edges):
        h = min(size_at(a[i]), size_at(a[i] + e[i]), size_at(a[i] + 0.5 * e[i]))
        m = max(1, int(math.ceil(lengths[i] / h - 1e-9)))
        t = np.arange(m) / m
        pts.append(a[i] + t[:, None] * e[i])
        edge_idx.append(np.full(m, i))
        params.append(t)
    return np.vstack(pts), np.concatenate(edge_idx), np.concatenate(params)


def _interior_point(poly: Polygon) -> np.ndarray:
    """A point strictly inside the polygon (centroid of its largest triangle)."""
    n = len(poly.vertices)
    seg = np.c_[np.arange(n), (np.arange(n) + 1) % n]
    t = tr.triangulate(dict(vertices=np.array(poly.vertices), segments=seg), "pQ")
    p = t["vertices"][t["triangles"]]
    e1, e2 = p[:, 1] - p[:, 0], p[:, 2] - p[:, 0]
    k = int(np.argmax(np.abs(e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0])))
    return p[k].mean(axis=0)


def _areas(points, triangles):
    p = points[triangles]
    e1 = p[:, 1] - p[:, 0]
    e2 = p[:, 2] - p[:, 0]
    return 0.5 * (e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0])


def triangulate(domain: DomainSpec, h_target: float, grading: float = 0.0,
                h_max: Optional[float] = None, min_angle: float = MIN_ANGLE,
                max_rounds: int = 40) -> Mesh:
    """Mesh the domain with boundary pieces <= local size and angles >= ``min_angle``.

    The local size is ``min(h_max, h_target + grading * dist(x, Gamma))``;
    ``grading=0`` gives a quasi-uniform mesh.
    """
    if not h_target > 0:
        raise ParameterError("h_target must be positive")
    if domain.is_truncated and h_target > domain.clearance / 2:
        raise ParameterError(
            f"h_target={h_target} exceeds half the Gamma-S clearance ({domain.clearance / 2})")
    if grading < 0:
        raise ParameterError("grading must be non-negative")
    h_cap = math.inf if h_max is None else float(h_max)
    if h_cap < h_target:
        raise ParameterError("h_max must be at least h_target")

    gamma = domain.gamma
    g_pts, g_edge, g_par = _split_polygon(gamma, lambda x: h_target)
    tree = cKDTree(g_pts)

    def size_field(x):
        x = np.atleast_2d(x)
        if grading == 0.0:
            return np.full(len(x), h_target)
        dist = tree.query(x)[0]
        return np.minimum(h_cap, h_target + grading * dist)

    parts = [(g_pts, g_edge, g_par, GAMMA)]
    if domain.is_truncated:
        s_pts, s_edge, s_par = _split_polygon(domain.s, lambda x: float(size_field(x)[0]))
        parts.append((s_pts, s_edge, s_par, S))

    pts, segs, tags, vedge, vpar = [], [], [], [], []
    offset = 0
    for p, e, t, tag in parts:
        n = len(p)
        idx = offset + np.arange(n)
        pts.append(p)
        segs.append(np.c_[idx, offset + (np.arange(n) + 1) % n])
        tags.append(np.full(n, tag))
        vedge.append(e)
        vpar.append(t)
        offset += n
    pts = np.vstack(pts)
    segs = np.vstack(segs)
    n_boundary = len(pts)

    geom = dict(vertices=pts, segments=segs)
    if domain.is_truncated:
        geom["holes"] = _interior_point(gamma.polygon)[None, :]
    q = f"q{min_angle:.10g}"
    out = tr.triangulate(geom, f"p{q}YQ")

    for _ in range(max_rounds):
        P, T = out["vertices"], out["triangles"]
        area = np.abs(_areas(P, T))
        h = size_field(P[T].mean(axis=1))
        target = (math.sqrt(3) / 4.0) * h ** 2
        too_big = area > target * (1.0 + 1e-6)
        if not too_big.any():
            break
        refine_geom = dict(vertices=P, triangles=T, segments=out["segments"],
                           triangle_max_area=np.where(too_big, target, -1.0))
        if domain.is_truncated:
            refine_geom["holes"] = geom["holes"]
        out = tr.triangulate(refine_geom, f"rp{q}YQa")
    else:
        achieved = float(triangle_angles(np.asarray(out["vertices"]), out["triangles"]).min())
        raise MeshQualityError(
            f"size-field refinement did not terminate in {max_rounds} rounds "
            f"(minimum angle {achieved:.3f} deg)", achieved)

    P = np.asarray(out["vertices"], dtype=float)
    T = np.asarray(out["triangles"], dtype=np.int64)
    if not np.array_equal(P[:n_boundary], pts):
        raise GeometryError("mesher moved boundary vertices")
    neg = _areas(P, T) < 0
    T[neg] = T[neg][:, [0, 2, 1]]
    achieved = float(triangle_angles(P, T).min())
    if achieved < min_angle - 1e-6:
        raise MeshQualityError(
            f"minimum angle {achieved:.3f} deg below the {min_angle} deg bound", achieved)

    nv = len(P)
    vertex_tag = np.zeros(nv, dtype=np.int64)
    vertex_edge = np.full(nv, -1, dtype=np.int64)
    vertex_param = np.zeros(nv)
    vertex_tag[:n_boundary] = np.concatenate(tags)
    vertex_edge[:n_boundary] = np.concatenate(vedge)
    vertex_param[:n_boundary] = np.concatenate(vpar)

    be, etag, epoly, epar, emass = [], [], [], [], []
    for b, seg_block, tag in zip([domain.gamma, domain.s], np.split(segs, [len(g_pts)]), [GAMMA, S]):
        if b is None or len(seg_block) == 0:
            continue
        i, j = seg_block[:, 0], seg_block[:, 1]
        poly = vertex_edge[i]
        t0 = vertex_param[i]
        t1 = np.where(vertex_edge[j] == poly, vertex_param[j], 1.0)
        be.append(seg_block)
        etag.append(np.full(len(i), tag))
        epoly.append(poly)
        epar.append(np.c_[t0, t1])
        emass.append(b.segment_masses[poly] * (t1 - t0))
    mesh = Mesh(P, T, vertex_tag, vertex_edge, vertex_param,
                np.vstack(be), np.concatenate(etag), np.concatenate(epoly),
                np.vstack(epar), np.concatenate(emass), domain)
    return _canonical(mesh)


def _canonical(mesh: Mesh) -> Mesh:
    """Rotate each triangle to start at its smallest index and sort rows."""
    t = mesh.triangles
    k = np.argmin(t, axis=1)
    rows = np.arange(len(t))
    t = np.c_[t[rows, k], t[rows, (k + 1) % 3], t[rows, (k + 2) % 3]]
    t = t[np.lexsort((t[:, 2], t[:, 1], t[:, 0]))]
    return replace(mesh, triangles=t)


def refine(mesh: Mesh) -> Mesh:
    """Split every triangle into four through its edge midpoints."""
    t = mesh.triangles
    nv = mesh.n_vertices
    edges, _ = mesh.edges()
    lookup = {(int(a), int(b)): nv + k for k, (a, b) in enumerate(edges)}

    def mid(a, b):
        lo = np.minimum(a, b)
        hi = np.maximum(a, b)
        return np.array([lookup[(x, y)] for x, y in zip(lo.tolist(), hi.tolist())], dtype=np.int64)

    a, b, c = t[:, 0], t[:, 1], t[:, 2]
    mab, mbc, mca = mid(a, b), mid(b, c), mid(c, a)
    new_t = np.vstack([np.c_[a, mab, mca], np.c_[b, mbc, mab], np.c_[c, mca, mbc], np.c_[mab, mbc, mca]])
    new_v = np.vstack([mesh.vertices, 0.5 * (mesh.vertices[edges[:, 0]] + mesh.vertices[edges[:, 1]])])

    tag = np.concatenate([mesh.vertex_tag, np.zeros(len(edges), dtype=np.int64)])
    vedge = np.concatenate([mesh.vertex_edge, np.full(len(edges), -1, dtype=np.int64)])
    vpar = np.concatenate([mesh.vertex_param, np.zeros(len(edges))])

    be = mesh.boundary_edges
    m = mid(be[:, 0], be[:, 1])
    tmid = 0.5 * (mesh.edge_params[:, 0] + mesh.edge_params[:, 1])
    tag[m] = mesh.edge_tag
    vedge[m] = mesh.edge_poly
    vpar[m] = tmid
    # boundary midpoints sit exactly on the straight polygon edge
    if mesh.domain is not None:
        for which in (GAMMA, S):
            bnd = mesh.boundary(which)
            sel = mesh.edge_tag == which
            if bnd is None or not sel.any():
                continue
            pa = bnd.polygon.edge_starts[mesh.edge_poly[sel]]
            pb = bnd.polygon.edge_ends[mesh.edge_poly[sel]]
            new_v[m[sel]] = pa + tmid[sel][:, None] * (pb - pa)

    new_be = np.vstack([np.c_[be[:, 0], m], np.c_[m, be[:, 1]]])
    new_tag = np.concatenate([mesh.edge_tag, mesh.edge_tag])
    new_poly = np.concatenate([mesh.edge_poly, mesh.edge_poly])
    new_par = np.vstack([np.c_[mesh.edge_params[:, 0], tmid], np.c_[tmid, mesh.edge_params[:, 1]]])
    if mesh.domain is not None:
        masses = np.zeros(len(new_be))
        for which in (GAMMA, S):
            bnd = mesh.boundary(which)
            sel = new_tag == which
            if bnd is not None and sel.any():
                masses[sel] = bnd.segment_masses[new_poly[sel]] * (new_par[sel, 1] - new_par[sel, 0])
    else:
        half = 0.5 * mesh.edge_mass
        masses = np.concatenate([half, half])
    out = Mesh(new_v, new_t, tag, vedge, vpar, new_be, new_tag, new_poly, new_par, masses, mesh.domain)
    return _canonical(out)


def validate_mesh(mesh: Mesh) -> MeshQuality:
    """Check orientation, conformity, tags and mass partition; return quality.

    Raises MeshValidationError listing every violated invariant.
    """
    problems = []
    areas = mesh.signed_areas()
    for i in np.nonzero(areas <= 0)[0]:
        problems.append(f"triangle {i} has non-positive orientation (area {areas[i]:.3e})")

    edges, counts = mesh.edges()
    for i in np.nonzero(counts > 2)[0]:
        problems.append(f"edge {tuple(edges[i])} shared by {counts[i]} triangles")
    open_edges = {tuple(e) for e in edges[counts == 1].tolist()}
    tagged = {tuple(sorted(e)) for e in mesh.boundary_edges.tolist()}
    for e in sorted(open_edges - tagged):
        problems.append(f"boundary edge {e} is not tagged")
    for e in sorted(tagged - open_edges):
        problems.append(f"tagged edge {e} is not on the mesh boundary")

    for k, (i, j) in enumerate(mesh.boundary_edges):
        tag = mesh.edge_tag[k]
        if mesh.vertex_tag[i] != tag or mesh.vertex_tag[j] != tag:
            problems.append(f"boundary edge {k} ({i}, {j}) has vertices with inconsistent tags")

    if mesh.domain is not None:
        for which in (GAMMA, S):
            bnd = mesh.boundary(which)
            if bnd is None:
                continue
            idx = np.nonzero(mesh.vertex_tag == which)[0]
            pa = bnd.polygon.edge_starts[mesh.vertex_edge[idx]]
            pb = bnd.polygon.edge_ends[mesh.vertex_edge[idx]]
            expected = pa + mesh.vertex_param[idx][:, None] * (pb - pa)
            off = np.linalg.norm(mesh.vertices[idx] - expected, axis=1)
            scale = max(1.0, float(np.abs(bnd.vertices).max()))
            for v in idx[off > 1e-12 * scale]:
                problems.append(f"vertex {v} is off its recorded {_TAG_NAMES[which]} polygon edge")
            sel = mesh.edge_tag == which
            sums = np.bincount(mesh.edge_poly[sel], weights=mesh.edge_mass[sel], minlength=bnd.n_edges)
            rel = np.abs(sums - bnd.segment_masses) / bnd.segment_masses
            for e in np.nonzero(rel > 1e-12)[0]:
                problems.append(
                    f"mass partition of {_TAG_NAMES[which]} edge {e} sums to "
                    f"{sums[e] / bnd.segment_masses[e]:.6g} of its segment mass")
    if problems:
        raise MeshValidationError(problems)

    ang = triangle_angles(mesh.vertices, mesh.triangles)
    p = mesh.vertices[mesh.triangles]
    lens = np.linalg.norm(p - np.roll(p, -1, axis=1), axis=2)
    perim = lens.sum(axis=1)
    inr = 2.0 * areas / perim
    circ = lens.prod(axis=1) / (4.0 * areas)
    return MeshQuality(float(ang.min()), float((circ / (2.0 * inr)).max()), float(lens.max()),
                       mesh.n_vertices, mesh.n_triangles)


def from_triangles(vertices, triangles, boundary_tag: int = GAMMA,
                   masses=None) -> Mesh:
    """Wrap a raw triangulation; every open edge gets ``boundary_tag``.

    Open edges are treated as the edges of one polygon, with mass equal to
    their length unless ``masses`` (keyed by sorted vertex pair) is given.
    """
    v = np.asarray(vertices, dtype=float)
    t = np.asarray(triangles, dtype=np.int64)
    tmp = Mesh(v, t, np.zeros(len(v), dtype=np.int64), np.full(len(v), -1), np.zeros(len(v)),
               np.zeros((0, 2), dtype=np.int64), np.zeros(0, dtype=np.int64),
               np.zeros(0, dtype=np.int64), np.zeros((0, 2)), np.zeros(0))
    edges, counts = tmp.edges()
    # keep the orientation in which the open edge appears in its triangle
    directed = {}
    for tri in t.tolist():
        for k in range(3):
            a, b = tri[k], tri[(k + 1) % 3]
            directed[(min(a, b), max(a, b))] = (a, b)
    open_e = np.array([directed[tuple(e)] for e in edges[counts == 1].tolist()], dtype=np.int64)
    tag = np.zeros(len(v), dtype=np.int64)
    vedge = np.full(len(v), -1, dtype=np.int64)
    tag[open_e[:, 0]] = boundary_tag
    vedge[open_e[:, 0]] = np.arange(len(open_e))
    lens = np.linalg.norm(v[open_e[:, 1]] - v[open_e[:, 0]], axis=1)
    if masses is not None:
        lens = np.array([masses[tuple(sorted(e))] for e in open_e.tolist()])
    return Mesh(v, t, tag, vedge, np.zeros(len(v)), open_e,
                np.full(len(open_e), boundary_tag), np.arange(len(open_e)),
                np.tile([0.0, 1.0], (len(open_e), 1)), lens)


def _build_neighbors(triangles: np.ndarray) -> np.ndarray:
    """neighbors[t, k] = triangle across the edge opposite vertex k, or -1."""
    nt = len(triangles)
    nbr = np.full((nt, 3), -1, dtype=np.int64)
    owner = {}
    for ti, tri in enumerate(triangles.tolist()):
        for k in range(3):
            a, b = tri[(k + 1) % 3], tri[(k + 2) % 3]
            key = (a, b) if a < b else (b, a)
            if key in owner:
                tj, kj = owner.pop(key)
                nbr[ti, k] = tj
                nbr[tj, kj] = ti
            else:
                owner[key] = (ti, k)
    return nbr


def _barycentric(mesh: Mesh, t: int, x: np.ndarray) -> np.ndarray:
    p = mesh.vertices[mesh.triangles[t]]
    m = np.array([[p[0, 0] - p[2, 0], p[1, 0] - p[2, 0]],
                  [p[0, 1] - p[2, 1], p[1, 1] - p[2, 1]]])
    l01 = np.linalg.solve(m, x - p[2])
    return np.array([l01[0], l01[1], 1.0 - l01[0] - l01[1]])


def locate(mesh: Mesh, points, tol: float = 1e-10):
    """Containing triangle and barycentric weights for each point.

    Starts at the triangle whose centroid is nearest and walks across the
    edge with the most negative weight; falls back to a full scan when the
    walk hits the boundary (holes make the mesh non-convex).
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    nbr = _build_neighbors(mesh.triangles)
    centroids = mesh.vertices[mesh.triangles].mean(axis=1)
    start = cKDTree(centroids).query(pts)[1]
    tri_idx = np.empty(len(pts), dtype=np.int64)
    bary = np.empty((len(pts), 3))
    for i, x in enumerate(pts):
        t = int(start[i])
        found = False
        for _ in range(4 * int(math.sqrt(mesh.n_triangles)) + 10):
            lam = _barycentric(mesh, t, x)
            k = int(np.argmin(lam))
            if lam[k] >= -tol:
                found = True
                break
            if nbr[t, k] < 0:
                break
            t = int(nbr[t, k])
        if not found:
            for t in range(mesh.n_triangles):
                lam = _barycentric(mesh, t, x)
                if lam.min() >= -tol:
                    found = True
                    break
        if not found:
            raise ParameterError(f"point {tuple(x)} lies outside the mesh")
        tri_idx[i] = t
        bary[i] = lam
    return tri_idx, bary


def interpolate(mesh: Mesh, nodal: np.ndarray, points) -> np.ndarray:
    """Evaluate a P1 field at arbitrary points by barycentric interpolation."""
    t, lam = locate(mesh, points)
    return np.einsum("ij,ij->i", lam, np.asarray(nodal)[mesh.triangles[t]])


def _fmt(x) -> str:
    return format(float(x), ".17g")


def write_mesh(path, mesh: Mesh) -> None:
    """Text MESH2 format with lexicographically sorted triangles and edges."""
    tri = _canonical(mesh).triangles
    be_order = np.lexsort((mesh.boundary_edges[:, 1], mesh.boundary_edges[:, 0]))
    lines = [f"MESH2 {mesh.n_vertices} {len(tri)} {len(mesh.boundary_edges)}"]
    for i, (x, y) in enumerate(mesh.vertices):
        tag = int(mesh.vertex_tag[i])
        row = f"{_fmt(x)} {_fmt(y)} {_TAG_NAMES[tag]}"
        if tag != INTERIOR_TAG:
            row += f" {int(mesh.vertex_edge[i])} {_fmt(mesh.vertex_param[i])}"
        lines.append(row)
    lines += [f"{a} {b} {c}" for a, b, c in tri.tolist()]
    for k in be_order:
        i, j = mesh.boundary_edges[k]
        lines.append(f"{i} {j} {_TAG_NAMES[int(mesh.edge_tag[k])]} {_fmt(mesh.edge_mass[k])}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def read_mesh(path, domain: Optional[DomainSpec] = None) -> Mesh:
    with open(path) as fh:
        rows = [ln.split() for ln in fh if ln.strip()]
    head = rows[0]
    if head[0] != "MESH2" or len(head) != 4:
        raise ParameterError(f"{path}: missing 'MESH2 <nv> <nt> <nbe>' header")
    nv, nt, nb = (int(x) for x in head[1:])
    vrows = rows[1:1 + nv]
    trows = rows[1 + nv:1 + nv + nt]
    brows = rows[1 + nv + nt:1 + nv + nt + nb]
    v = np.array([[float(r[0]), float(r[1])] for r in vrows])
    tag = np.array([_TAG_CODES[r[2]] for r in vrows], dtype=np.int64)
    vedge = np.array([int(r[3]) if len(r) > 3 else -1 for r in vrows], dtype=np.int64)
    vpar = np.array([float(r[4]) if len(r) > 4 else 0.0 for r in vrows])
    t = np.array([[int(x) for x in r] for r in trows], dtype=np.int64)
    be = np.array([[int(r[0]), int(r[1])] for r in brows], dtype=np.int64).reshape(-1, 2)
    etag = np.array([_TAG_CODES[r[2]] for r in brows], dtype=np.int64)
    emass = np.array([float(r[3]) for r in brows])
    n_poly = {w: int(vedge[tag == w].max()) + 1 if np.any(tag == w) else 0 for w in (GAMMA, S)}
    epoly = np.empty(len(be), dtype=np.int64)
    epar = np.empty((len(be), 2))
    for k, (i, j) in enumerate(be):
        n = n_poly[int(etag[k])]
        if vedge[i] == vedge[j]:
            epoly[k], epar[k] = vedge[i], (vpar[i], vpar[j])
        elif vpar[j] == 0.0 and vedge[j] == (vedge[i] + 1) % n:
            epoly[k], epar[k] = vedge[i], (vpar[i], 1.0)
        elif vpar[i] == 0.0 and vedge[i] == (vedge[j] + 1) % n:
            epoly[k], epar[k] = vedge[j], (1.0, vpar[j])
        else:
            raise ParameterError(f"{path}: boundary edge {k} spans non-adjacent polygon edges")
    return Mesh(v, t, tag, vedge, vpar, be, etag, epoly, epar, emass, domain)
