"""Planar primitives: triangles, simple polygons, barycentric coordinates.

Points are plain ``(x, y)`` pairs (tuples or length-2 arrays).  Functions that
take points also accept ``(n, 2)`` arrays and evaluate row-wise.
"""

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
import math

import numpy as np

from .errors import DegenerateTriangle, InputError, NotSimple

_EPS = 2.0**-53
CCW_ERROR_BOUND = (3.0 + 16.0 * _EPS) * _EPS
_INCIRCLE_BOUND = (10.0 + 96.0 * _EPS) * _EPS

DEGENERACY_TOL = 1e-14


# -- exact-sign predicates ---------------------------------------------------


def orient2d(a, b, c):
    """Sign of twice the signed area of ``(a, b, c)``; +1 for counter-clockwise.

    A floating-point evaluation is accepted when it clears the forward error
    bound; otherwise the determinant is recomputed exactly with rationals.
    """
    acx = a[0] - c[0]
    bcx = b[0] - c[0]
    acy = a[1] - c[1]
    bcy = b[1] - c[1]
    left = acx * bcy
    right = acy * bcx
    det = left - right
    if abs(det) > CCW_ERROR_BOUND * (abs(left) + abs(right)):
        return 1 if det > 0 else -1
    ax, ay, bx, by, cx, cy = (Fraction(v) for v in (a[0], a[1], b[0], b[1], c[0], c[1]))
    exact = (ax - cx) * (by - cy) - (ay - cy) * (bx - cx)
    return (exact > 0) - (exact < 0)


_SPLITTER = 134217729.0  # 2**27 + 1


def _two_sum(a, b):
    s = a + b
    bv = s - a
    return s, (a - (s - bv)) + (b - bv)


def _two_product(a, b):
    p = a * b
    c = _SPLITTER * a
    ahi = c - (c - a)
    alo = a - ahi
    c = _SPLITTER * b
    bhi = c - (c - b)
    blo = b - bhi
    return p, alo * blo - (((p - ahi * bhi) - alo * bhi) - ahi * blo)


def orient2d_many(a, b, c):
    """Row-wise exact :func:`orient2d` signs for ``(n, 2)`` arrays.

    The determinant is expanded into 16 products of error-free differences,
    each split exactly, and summed into a floating-point expansion whose most
    significant nonzero term carries the sign.  Rows whose magnitudes could
    underflow or overflow the splits go through the rational path.
    """
    a, b, c = (np.asarray(v, dtype=float) for v in (a, b, c))
    left = (a[:, 0] - c[:, 0]) * (b[:, 1] - c[:, 1])
    right = (a[:, 1] - c[:, 1]) * (b[:, 0] - c[:, 0])
    det = left - right
    out = np.sign(det).astype(np.int64)
    unsure = np.flatnonzero(np.abs(det) <= CCW_ERROR_BOUND * (np.abs(left) + np.abs(right)))
    if len(unsure) == 0:
        return out
    a, b, c = a[unsure], b[unsure], c[unsure]
    mag = np.abs(np.concatenate([a, b, c], axis=1))
    risky = np.any((mag > 2.0**400) | ((mag < 2.0**-400) & (mag > 0)), axis=1)
    acx = _two_sum(a[:, 0], -c[:, 0])
    bcy = _two_sum(b[:, 1], -c[:, 1])
    acy = _two_sum(a[:, 1], -c[:, 1])
    bcx = _two_sum(b[:, 0], -c[:, 0])
    terms = []
    for u in acx:
        for v in bcy:
            terms.extend(_two_product(u, v))
    for u in acy:
        for v in bcx:
            p, e = _two_product(u, v)
            terms.extend((-p, -e))
    expansion = []
    for t in terms:
        q = t
        for i, h in enumerate(expansion):
            q, expansion[i] = _two_sum(q, h)
        expansion.append(q)
    sign = np.zeros(len(unsure), dtype=np.int64)
    # the expansion grows in magnitude, so the last nonzero term decides
    for h in expansion:
        sign = np.where(h != 0, np.sign(h).astype(np.int64), sign)
    for k in np.flatnonzero(risky):
        sign[k] = orient2d(a[k], b[k], c[k])
    out[unsure] = sign
    return out


def incircle(a, b, c, d):
    """Positive if ``d`` lies strictly inside the circumcircle of CCW ``(a, b, c)``."""
    adx, ady = a[0] - d[0], a[1] - d[1]
    bdx, bdy = b[0] - d[0], b[1] - d[1]
    cdx, cdy = c[0] - d[0], c[1] - d[1]
    alift = adx * adx + ady * ady
    blift = bdx * bdx + bdy * bdy
    clift = cdx * cdx + cdy * cdy
    bc = bdx * cdy - cdx * bdy
    ca = cdx * ady - adx * cdy
    ab = adx * bdy - bdx * ady
    det = alift * bc + blift * ca + clift * ab
    permanent = (
        (abs(bdx * cdy) + abs(cdx * bdy)) * alift
        + (abs(cdx * ady) + abs(adx * cdy)) * blift
        + (abs(adx * bdy) + abs(bdx * ady)) * clift
    )
    if abs(det) > _INCIRCLE_BOUND * permanent:
        return 1 if det > 0 else -1
    fa = [Fraction(v) for v in (*a, *b, *c, *d)]
    ax, ay, bx, by, cx, cy, dx, dy = fa
    adx, ady, bdx, bdy, cdx, cdy = ax - dx, ay - dy, bx - dx, by - dy, cx - dx, cy - dy
    exact = (
        (adx * adx + ady * ady) * (bdx * cdy - cdx * bdy)
        + (bdx * bdx + bdy * bdy) * (cdx * ady - adx * cdy)
        + (cdx * cdx + cdy * cdy) * (adx * bdy - bdx * ady)
    )
    return (exact > 0) - (exact < 0)


def segments_intersect(p1, p2, q1, q2, proper=False):
    """Whether closed segments ``p1p2`` and ``q1q2`` meet.

    With ``proper=True`` only crossings at a single interior point of both
    segments count.
    """
    o1 = orient2d(p1, p2, q1)
    o2 = orient2d(p1, p2, q2)
    o3 = orient2d(q1, q2, p1)
    o4 = orient2d(q1, q2, p2)
    if o1 * o2 < 0 and o3 * o4 < 0:
        return True
    if proper:
        return False

    def on_segment(a, b, c):
        return min(a[0], b[0]) <= c[0] <= max(a[0], b[0]) and min(a[1], b[1]) <= c[1] <= max(a[1], b[1])

    return (
        (o1 == 0 and on_segment(p1, p2, q1))
        or (o2 == 0 and on_segment(p1, p2, q2))
        or (o3 == 0 and on_segment(q1, q2, p1))
        or (o4 == 0 and on_segment(q1, q2, p2))
    )


def _as_point(p):
    x, y = float(p[0]), float(p[1])
    if not (math.isfinite(x) and math.isfinite(y)):
        raise InputError(f"non-finite coordinate in point {p!r}")
    return (x, y)


# -- triangles ---------------------------------------------------------------


@dataclass(frozen=True)
class Triangle:
    """A non-degenerate triangle, stored counter-clockwise.

    Clockwise input is reoriented by swapping ``v2`` and ``v3``, which keeps
    ``v1`` first.
    """

    v1: tuple
    v2: tuple
    v3: tuple

    def __post_init__(self):
        v1, v2, v3 = (_as_point(v) for v in (self.v1, self.v2, self.v3))
        edge2 = max(
            (v2[0] - v1[0]) ** 2 + (v2[1] - v1[1]) ** 2,
            (v3[0] - v2[0]) ** 2 + (v3[1] - v2[1]) ** 2,
            (v1[0] - v3[0]) ** 2 + (v1[1] - v3[1]) ** 2,
        )
        twice = (v2[0] - v1[0]) * (v3[1] - v1[1]) - (v3[0] - v1[0]) * (v2[1] - v1[1])
        if edge2 == 0.0 or abs(0.5 * twice) <= DEGENERACY_TOL * edge2:
            raise DegenerateTriangle(f"degenerate triangle {v1}, {v2}, {v3}")
        if twice < 0:
            v2, v3 = v3, v2
        object.__setattr__(self, "v1", v1)
        object.__setattr__(self, "v2", v2)
        object.__setattr__(self, "v3", v3)

    @classmethod
    def from_array(cls, vertices):
        v = np.asarray(vertices, dtype=float)
        if v.shape != (3, 2):
            raise InputError(f"expected 3 vertices of 2 coordinates, got shape {v.shape}")
        return cls(tuple(v[0]), tuple(v[1]), tuple(v[2]))

    @cached_property
    def vertices(self):
        v = np.array([self.v1, self.v2, self.v3], dtype=float)
        v.flags.writeable = False
        return v

    @cached_property
    def edge_lengths(self):
        v = self.vertices
        # opposite v1, v2, v3 respectively
        return (
            math.dist(v[1], v[2]),
            math.dist(v[2], v[0]),
            math.dist(v[0], v[1]),
        )

    @cached_property
    def area(self):
        (x1, y1), (x2, y2), (x3, y3) = self.v1, self.v2, self.v3
        return 0.5 * ((x2 - x1) * (y3 - y1) - (x3 - x1) * (y2 - y1))

    @property
    def longest_edge(self):
        return max(self.edge_lengths)

    @property
    def inradius(self):
        return self.area / (0.5 * sum(self.edge_lengths))

    @property
    def shape_param(self):
        return self.longest_edge / self.inradius

    def map_affine(self, matrix, offset=(0.0, 0.0)):
        """Image of the triangle under ``x -> matrix @ x + offset``."""
        m = np.asarray(matrix, dtype=float)
        v = self.vertices @ m.T + np.asarray(offset, dtype=float)
        return Triangle(tuple(v[0]), tuple(v[1]), tuple(v[2]))


def triangle_metrics(t):
    """Return ``(area, longest_edge, inradius, shape_param)``."""
    return t.area, t.longest_edge, t.inradius, t.shape_param


def barycentric(t, p):
    """Barycentric coordinates of point(s) ``p`` with respect to ``t``.

    The third coordinate is eliminated and the remaining 2x2 system is solved
    by Cramer's rule.  Returns shape ``(3,)`` for one point, ``(n, 3)`` for an
    ``(n, 2)`` array.
    """
    p = np.asarray(p, dtype=float)
    (x1, y1), (x2, y2), (x3, y3) = t.v1, t.v2, t.v3
    det = (x1 - x3) * (y2 - y3) - (x2 - x3) * (y1 - y3)
    dx = p[..., 0] - x3
    dy = p[..., 1] - y3
    b1 = (dx * (y2 - y3) - (x2 - x3) * dy) / det
    b2 = ((x1 - x3) * dy - dx * (y1 - y3)) / det
    return np.stack([b1, b2, 1.0 - b1 - b2], axis=-1)


def from_barycentric(t, b):
    """Cartesian point(s) for barycentric coordinates ``b`` (last axis 3)."""
    return np.asarray(b, dtype=float) @ t.vertices


# -- polygons ----------------------------------------------------------------


def _shoelace(v):
    x, y = v[:, 0], v[:, 1]
    xn, yn = np.roll(x, -1), np.roll(y, -1)
    return 0.5 * math.fsum(x * yn - xn * y)


@dataclass(frozen=True, eq=False)
class Polygon:
    """Simple polygon without holes; vertices stored counter-clockwise."""

    vertices: np.ndarray = field(repr=False)

    def __post_init__(self):
        v = np.array(self.vertices, dtype=float)
        if v.ndim != 2 or v.shape[1] != 2 or len(v) < 3:
            raise InputError("a polygon needs at least 3 vertices given as [x, y] pairs")
        if not np.all(np.isfinite(v)):
            raise InputError("polygon has non-finite coordinates")
        n = len(v)
        for i in range(n):
            a, b, c = v[i - 1], v[i], v[(i + 1) % n]
            if a[0] == b[0] and a[1] == b[1]:
                raise InputError(f"consecutive vertices {(i - 1) % n} and {i} coincide")
            if orient2d(a, b, c) == 0:
                raise InputError(f"vertices around index {i} are collinear")
        _check_simple(v)
        if _shoelace(v) < 0:
            v = v[::-1].copy()
        v.flags.writeable = False
        object.__setattr__(self, "vertices", v)

    def __len__(self):
        return len(self.vertices)

    @cached_property
    def area(self):
        return _shoelace(self.vertices)

    def edges(self):
        v = self.vertices
        return [(v[i], v[(i + 1) % len(v)]) for i in range(len(v))]

    def boundary_distance(self, p):
        """Euclidean distance from ``p`` to the polygon boundary."""
        p = np.asarray(p, dtype=float)
        a = self.vertices
        b = np.roll(a, -1, axis=0)
        ab = b - a
        t = np.clip(np.einsum("ij,ij->i", p - a, ab) / np.einsum("ij,ij->i", ab, ab), 0.0, 1.0)
        closest = a + t[:, None] * ab
        return float(np.min(np.hypot(*(closest - p).T)))

    def contains(self, p):
        """Even-odd test; points exactly on the boundary may go either way."""
        x, y = float(p[0]), float(p[1])
        inside = False
        v = self.vertices
        n = len(v)
        for i in range(n):
            x1, y1 = v[i]
            x2, y2 = v[(i + 1) % n]
            if (y1 > y) != (y2 > y):
                xs = x1 + (y - y1) * (x2 - x1) / (y2 - y1)
                if xs > x:
                    inside = not inside
        return inside


def _check_simple(v):
    # adjacent edges cannot overlap once consecutive collinear triples are rejected
    n = len(v)
    for i in range(n):
        a1, a2 = v[i], v[(i + 1) % n]
        for j in range(i + 2, n):
            if i == 0 and j == n - 1:
                continue
            if segments_intersect(a1, a2, v[j], v[(j + 1) % n]):
                raise NotSimple(f"edges {i} and {j} intersect")


def polygon_area(poly):
    return poly.area


def polygon_moments(poly):
    """Exact-formula integrals of ``1``, ``x`` and ``y`` over the polygon."""
    v = poly.vertices
    x, y = v[:, 0], v[:, 1]
    xn, yn = np.roll(x, -1), np.roll(y, -1)
    cross = x * yn - xn * y
    return (
        0.5 * math.fsum(cross),
        math.fsum((x + xn) * cross) / 6.0,
        math.fsum((y + yn) * cross) / 6.0,
    )
