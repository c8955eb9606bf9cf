"""Conforming triangulations of simple polygons over given scattered points.

``triangulate`` builds a constrained Delaunay triangulation whose vertex set
is exactly the input: polygon vertices plus interior points, no Steiner
points.  The steps are

1. Bowyer-Watson insertion of every point inside a large enclosing triangle,
2. recovery of missing polygon edges by edge flips (Sloan's method),
3. Lawson flips to restore the Delaunay property away from the constraints,
4. flood-fill removal of everything outside the polygon.

All orientation and in-circle decisions go through exact-sign predicates.
"""

from collections import deque
from dataclasses import dataclass
from functools import cached_property
import json
import math

import numpy as np
from scipy.spatial import cKDTree

from .errors import DegenerateInput, DuplicatePoint, InputError, PointOnBoundary, PointOutsidePolygon
from .geometry import Polygon, Triangle, incircle, orient2d, orient2d_many, segments_intersect

POINT_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class ScatteredSet:
    """Polygon plus interior points; the polygon vertices belong to the set."""

    polygon: Polygon
    interior_points: np.ndarray

    def __post_init__(self):
        poly = self.polygon if isinstance(self.polygon, Polygon) else Polygon(self.polygon)
        pts = np.array(self.interior_points, dtype=float).reshape(-1, 2)
        if not np.all(np.isfinite(pts)):
            raise InputError("interior points must be finite")
        if poly.area <= 0.0:
            raise DegenerateInput("polygon has zero area")
        diag = self.diameter_scale(poly)
        for k, p in enumerate(pts):
            if poly.boundary_distance(p) <= POINT_TOL * diag:
                raise PointOnBoundary(f"interior point {k} {tuple(p)} lies on the polygon boundary")
            if not poly.contains(p):
                raise PointOutsidePolygon(f"interior point {k} {tuple(p)} lies outside the polygon")
        allpts = np.vstack([poly.vertices, pts])
        pairs = cKDTree(allpts).query_pairs(POINT_TOL * diag)
        if pairs:
            i, j = min(pairs)
            raise DuplicatePoint(f"points {i} and {j} coincide")
        pts.flags.writeable = False
        object.__setattr__(self, "polygon", poly)
        object.__setattr__(self, "interior_points", pts)

    @staticmethod
    def diameter_scale(poly):
        lo = poly.vertices.min(axis=0)
        hi = poly.vertices.max(axis=0)
        return float(np.hypot(*(hi - lo)))

    @property
    def points(self):
        return np.vstack([self.polygon.vertices, self.interior_points])

    @classmethod
    def from_json(cls, obj):
        return cls(Polygon(obj["polygon"]), np.array(obj.get("interior", []), dtype=float).reshape(-1, 2))

    def to_json(self):
        return {"polygon": self.polygon.vertices.tolist(), "interior": self.interior_points.tolist()}


@dataclass(frozen=True, eq=False)
class Mesh:
    """Vertices ``(m, 2)`` and counter-clockwise index triples ``(n, 3)``."""

    vertices: np.ndarray
    triangles: np.ndarray

    def __post_init__(self):
        v = np.array(self.vertices, dtype=float).reshape(-1, 2)
        tri = np.array(self.triangles, dtype=np.int64).reshape(-1, 3)
        if len(tri) == 0:
            raise DegenerateInput("mesh has no triangles")
        if tri.min() < 0 or tri.max() >= len(v):
            raise InputError("triangle index out of range")
        v.flags.writeable = False
        tri.flags.writeable = False
        object.__setattr__(self, "vertices", v)
        object.__setattr__(self, "triangles", tri)

    @cached_property
    def corners(self):
        """Triangle vertex coordinates, shape ``(n, 3, 2)``."""
        return self.vertices[self.triangles]

    @cached_property
    def areas(self):
        c = self.corners
        e1 = c[:, 1] - c[:, 0]
        e2 = c[:, 2] - c[:, 0]
        return 0.5 * (e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0])

    @cached_property
    def longest_edges(self):
        c = self.corners
        lengths = np.linalg.norm(c - np.roll(c, -1, axis=1), axis=2)
        return lengths.max(axis=1)

    @property
    def size(self):
        return float(self.longest_edges.max())

    @property
    def count(self):
        return len(self.triangles)

    @property
    def gamma(self):
        smallest = int(np.argmin(self.areas))
        return self.size / self.triangle(smallest).inradius

    @property
    def area(self):
        return math.fsum(self.areas)

    def triangle(self, i):
        return Triangle.from_array(self.corners[i])

    def to_json(self):
        return {"vertices": self.vertices.tolist(), "triangles": self.triangles.tolist()}

    @classmethod
    def from_json(cls, obj):
        return cls(obj["vertices"], obj["triangles"])

    def save(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_json(), fh)


def mesh_metrics(m):
    """Return ``(size, count, gamma)`` of a mesh."""
    return m.size, m.count, m.gamma


# -- triangulation -----------------------------------------------------------


class _Triangulation:
    """Mutable triangle soup with directed-edge adjacency."""

    def __init__(self, points):
        self.pts = [tuple(map(float, p)) for p in points]
        self.tris = {}
        self.owner = {}
        self._next = 0

    def add(self, a, b, c):
        tid = self._next
        self._next += 1
        self.tris[tid] = (a, b, c)
        self.owner[(a, b)] = tid
        self.owner[(b, c)] = tid
        self.owner[(c, a)] = tid
        return tid

    def remove(self, tid):
        a, b, c = self.tris.pop(tid)
        for e in ((a, b), (b, c), (c, a)):
            if self.owner.get(e) == tid:
                del self.owner[e]

    def opposite(self, u, v):
        """Vertex opposite the directed edge ``u -> v``, or None."""
        tid = self.owner.get((u, v))
        if tid is None:
            return None
        a, b, c = self.tris[tid]
        return ({a, b, c} - {u, v}).pop()

    def orient(self, a, b, c):
        return orient2d(self.pts[a], self.pts[b], self.pts[c])

    def locate(self, p, start):
        tid = start if start in self.tris else next(iter(self.tris))
        pt = self.pts[p]
        for _ in range(4 * len(self.tris) + 10):
            a, b, c = self.tris[tid]
            for u, v in ((a, b), (b, c), (c, a)):
                if orient2d(self.pts[u], self.pts[v], pt) < 0:
                    nxt = self.owner.get((v, u))
                    if nxt is None:
                        raise DegenerateInput("point outside the enclosing triangle")
                    tid = nxt
                    break
            else:
                return tid
        for tid, (a, b, c) in self.tris.items():
            if min(self.orient(a, b, p), self.orient(b, c, p), self.orient(c, a, p)) >= 0:
                return tid
        raise DegenerateInput("point location failed")

    def insert(self, p, start):
        first = self.locate(p, start)
        pt = self.pts[p]
        cavity = {first}
        todo = [first]
        seen = {first}
        while todo:
            a, b, c = self.tris[todo.pop()]
            for u, v in ((a, b), (b, c), (c, a)):
                nb = self.owner.get((v, u))
                if nb is None or nb in seen:
                    continue
                seen.add(nb)
                x, y, z = self.tris[nb]
                if incircle(self.pts[x], self.pts[y], self.pts[z], pt) > 0:
                    cavity.add(nb)
                    todo.append(nb)
        rim = []
        for tid in sorted(cavity):
            a, b, c = self.tris[tid]
            for u, v in ((a, b), (b, c), (c, a)):
                if self.owner.get((v, u)) not in cavity:
                    rim.append((u, v))
        for tid in cavity:
            self.remove(tid)
        last = None
        for u, v in rim:
            last = self.add(u, v, p)
        return last

    def flip(self, u, v):
        """Flip the diagonal shared by ``(u, v, w1)`` and ``(v, u, w2)``."""
        w1 = self.opposite(u, v)
        w2 = self.opposite(v, u)
        self.remove(self.owner[(u, v)])
        self.remove(self.owner[(v, u)])
        self.add(u, w2, w1)
        self.add(v, w1, w2)
        return w1, w2

    def flippable(self, u, v):
        w1 = self.opposite(u, v)
        w2 = self.opposite(v, u)
        if w1 is None or w2 is None:
            return False
        return self.orient(w1, w2, u) * self.orient(w1, w2, v) < 0

    def edges(self):
        return sorted({(min(u, v), max(u, v)) for u, v in self.owner})

    def recover(self, a, b, constrained):
        constrained.add((min(a, b), max(a, b)))
        if (a, b) in self.owner or (b, a) in self.owner:
            return
        pa, pb = self.pts[a], self.pts[b]
        queue = deque(
            (u, v)
            for u, v in self.edges()
            if a not in (u, v) and b not in (u, v) and segments_intersect(pa, pb, self.pts[u], self.pts[v], proper=True)
        )
        stalled = 0
        while queue:
            u, v = queue.popleft()
            if not self.flippable(u, v):
                queue.append((u, v))
                stalled += 1
                if stalled > len(queue) + 1:
                    raise DegenerateInput(f"cannot recover boundary edge {a}-{b}")
                continue
            stalled = 0
            w1, w2 = self.flip(u, v)
            if a not in (w1, w2) and b not in (w1, w2) and segments_intersect(
                pa, pb, self.pts[w1], self.pts[w2], proper=True
            ):
                queue.append((w1, w2))
        if (a, b) not in self.owner and (b, a) not in self.owner:
            raise DegenerateInput(f"boundary edge {a}-{b} missing after recovery")

    def restore_delaunay(self, constrained):
        stack = [e for e in self.edges() if e not in constrained]
        while stack:
            u, v = stack.pop()
            if (min(u, v), max(u, v)) in constrained:
                continue
            w1 = self.opposite(u, v)
            w2 = self.opposite(v, u)
            if w1 is None or w2 is None:
                continue
            p = self.pts
            if incircle(p[u], p[v], p[w1], p[w2]) > 0 and self.flippable(u, v):
                self.flip(u, v)
                stack.extend([(u, w2), (w2, v), (v, w1), (w1, u)])


def triangulate(s):
    """Constrained Delaunay triangulation of a :class:`ScatteredSet`."""
    pts = s.points
    n = len(pts)
    nb = len(s.polygon)
    lo = pts.min(axis=0)
    hi = pts.max(axis=0)
    center = 0.5 * (lo + hi)
    span = max(float(np.max(hi - lo)), 1e-300)
    r = 64.0 * span
    outer = [
        (center[0] - 2 * r, center[1] - r),
        (center[0] + 2 * r, center[1] - r),
        (center[0], center[1] + 2 * r),
    ]
    tr = _Triangulation(list(pts) + outer)
    last = tr.add(n, n + 1, n + 2)
    for p in range(n):
        last = tr.insert(p, last)

    constrained = set()
    for i in range(nb):
        tr.recover(i, (i + 1) % nb, constrained)
    tr.restore_delaunay(constrained)

    # flood fill from the enclosing triangle's corners, never crossing the boundary
    outside = {tid for tid, tri in tr.tris.items() if max(tri) >= n}
    todo = list(outside)
    while todo:
        a, b, c = tr.tris[todo.pop()]
        for u, v in ((a, b), (b, c), (c, a)):
            if (min(u, v), max(u, v)) in constrained:
                continue
            nb_tid = tr.owner.get((v, u))
            if nb_tid is not None and nb_tid not in outside:
                outside.add(nb_tid)
                todo.append(nb_tid)
    kept = [_canonical(tr.tris[t]) for t in tr.tris if t not in outside]
    kept.sort()
    mesh = Mesh(pts, kept)
    used = np.zeros(n, dtype=bool)
    used[mesh.triangles.ravel()] = True
    if not used.all():
        raise DegenerateInput(f"points {np.flatnonzero(~used).tolist()} were not triangulated")
    return mesh


def _canonical(tri):
    k = tri.index(min(tri))
    return tri[k:] + tri[:k]


def refine_uniform(m, levels=1):
    """Split every triangle into four similar children, ``levels`` times.

    Midpoints are shared between neighbours and appended after the existing
    vertices in order of first appearance.
    """
    if levels < 0:
        raise InputError("levels must be >= 0")
    for _ in range(levels):
        verts = [tuple(v) for v in m.vertices]
        mids = {}

        def midpoint(a, b):
            key = (min(a, b), max(a, b))
            if key not in mids:
                pa, pb = verts[a], verts[b]
                mids[key] = len(verts)
                verts.append((0.5 * (pa[0] + pb[0]), 0.5 * (pa[1] + pb[1])))
            return mids[key]

        tris = []
        for a, b, c in m.triangles.tolist():
            ab, bc, ca = midpoint(a, b), midpoint(b, c), midpoint(c, a)
            tris.extend([(a, ab, ca), (ab, b, bc), (ca, bc, c), (ab, bc, ca)])
        m = Mesh(np.array(verts), tris)
    return m


# -- validation --------------------------------------------------------------


def conformity_violations(m, limit=10):
    """Pairs of triangles whose intersection is not empty, a shared vertex or a shared edge.

    Exhaustive over all pairs with overlapping bounding boxes.  Each pair is
    checked for properly crossing edges and for a non-shared vertex of one
    triangle lying in the closed other triangle.  Returns at most ``limit``
    offending index pairs; ``(i, i)`` flags a triangle that is not strictly
    counter-clockwise.
    """
    tris = m.triangles
    pts = m.vertices
    corners = m.corners
    bad = [(int(i), int(i)) for i in np.flatnonzero(_signs(corners[:, 0], corners[:, 1], corners[:, 2]) <= 0)]
    I, J = _candidate_pairs(corners)
    if len(I):
        t1, t2 = tris[I], tris[J]
        same = t1[:, :, None] == t2[:, None, :]
        violation = same.sum(axis=(1, 2)) == 3
        for e in range(3):
            a1, b1 = t1[:, e], t1[:, (e + 1) % 3]
            for f in range(3):
                a2, b2 = t2[:, f], t2[:, (f + 1) % 3]
                disjoint = (a1 != a2) & (a1 != b2) & (b1 != a2) & (b1 != b2)
                k = np.flatnonzero(disjoint & ~violation)
                if len(k) == 0:
                    continue
                p1, p2, q1, q2 = pts[a1[k]], pts[b1[k]], pts[a2[k]], pts[b2[k]]
                cross = (_signs(p1, p2, q1) * _signs(p1, p2, q2) < 0) & (_signs(q1, q2, p1) * _signs(q1, q2, p2) < 0)
                violation[k[cross]] = True
        for inner, outer in ((t1, t2), (t2, t1)):
            shared = (inner[:, :, None] == outer[:, None, :]).any(axis=2)
            a, b, c = pts[outer[:, 0]], pts[outer[:, 1]], pts[outer[:, 2]]
            for v in range(3):
                k = np.flatnonzero(~shared[:, v] & ~violation)
                if len(k) == 0:
                    continue
                p = pts[inner[k, v]]
                inside = np.minimum(
                    np.minimum(_signs(a[k], b[k], p), _signs(b[k], c[k], p)), _signs(c[k], a[k], p)
                ) >= 0
                violation[k[inside]] = True
        for k in np.flatnonzero(violation):
            bad.append((int(min(I[k], J[k])), int(max(I[k], J[k]))))
    return sorted(set(bad))[:limit]


def _ranges(counts):
    """For each ``k`` the run ``0..counts[k]-1``, concatenated."""
    return np.arange(counts.sum()) - np.repeat(np.cumsum(counts) - counts, counts)


def _candidate_pairs(corners):
    """Index pairs ``I < J`` of triangles with overlapping bounding boxes.

    Boxes are bucketed on a uniform grid whose cell is the median box extent;
    only triangles sharing a cell are compared.
    """
    lo = corners.min(axis=1)
    hi = corners.max(axis=1)
    n = len(corners)
    h = float(np.median(np.max(hi - lo, axis=1)))
    if not h > 0:
        h = 1.0
    origin = lo.min(axis=0)
    c0 = np.floor((lo - origin) / h).astype(np.int64)
    c1 = np.floor((hi - origin) / h).astype(np.int64)
    span = c1 - c0 + 1
    ny = int(c1[:, 1].max()) + 1
    per = span[:, 0] * span[:, 1]
    tri = np.repeat(np.arange(n), per)
    r = _ranges(per)
    cx = c0[tri, 0] + r // span[tri, 1]
    cy = c0[tri, 1] + r % span[tri, 1]
    key = cx * ny + cy
    order = np.lexsort((tri, key))
    key, tri = key[order], tri[order]
    # each entry pairs with the entries after it in the same cell
    starts = np.flatnonzero(np.r_[True, key[1:] != key[:-1]])
    sizes = np.diff(np.r_[starts, len(key)])
    rank = _ranges(sizes)
    after = np.repeat(sizes, sizes) - rank - 1
    first = np.repeat(np.arange(len(key)), after)
    second = first + 1 + _ranges(after)
    I, J = tri[first], tri[second]
    pair = np.unique(np.minimum(I, J) * n + np.maximum(I, J))
    I, J = np.divmod(pair, n)
    overlap = np.all((lo[J] <= hi[I]) & (lo[I] <= hi[J]), axis=1)
    return I[overlap], J[overlap]


def _signs(a, b, c):
    """Row-wise exact orientation signs for ``(n, 2)`` point arrays."""
    return orient2d_many(a, b, c)
