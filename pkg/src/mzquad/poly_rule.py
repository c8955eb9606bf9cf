"""Quadrature at scattered points of a polygon.

Each mesh vertex receives one third of the total area of the triangles it
belongs to, so the rule equals the sum of three-vertex rules over the mesh and
integrates every affine function exactly.
"""

from dataclasses import dataclass
import math

import numpy as np

from .geometry import Polygon, polygon_moments
from .tri_rule import evaluate_at


@dataclass(frozen=True, eq=False)
class PolygonRule:
    mesh: object
    weights: np.ndarray

    @property
    def points(self):
        return self.mesh.vertices

    def __len__(self):
        return len(self.weights)

    def to_json(self):
        return {"points": self.points.tolist(), "weights": self.weights.tolist()}


def polygon_weights(m):
    # incidence comes from connectivity, never from point-in-triangle tests
    w = np.zeros(len(m.vertices))
    np.add.at(w, m.triangles.ravel(), np.repeat(m.areas / 3.0, 3))
    w.flags.writeable = False
    return PolygonRule(m, w)


def apply_polygon_rule(r, f):
    return float(r.weights @ evaluate_at(f, r.points))


def boundary_polygon(m):
    """Outer boundary loop of a mesh as a :class:`Polygon`.

    Boundary edges are those used by exactly one triangle; they are chained
    head to tail starting from the smallest vertex index.
    """
    directed = set()
    for a, b, c in m.triangles.tolist():
        directed.update(((a, b), (b, c), (c, a)))
    succ = {u: v for u, v in directed if (v, u) not in directed}
    start = min(succ)
    loop = [start]
    while succ[loop[-1]] != start:
        loop.append(succ[loop[-1]])
        if len(loop) > len(succ):
            raise ValueError("mesh boundary is not a single loop")
    verts = m.vertices[loop]
    # drop vertices that only subdivide a straight boundary edge
    keep = [
        i
        for i in range(len(verts))
        if abs(
            (verts[i][0] - verts[i - 1][0]) * (verts[(i + 1) % len(verts)][1] - verts[i - 1][1])
            - (verts[i][1] - verts[i - 1][1]) * (verts[(i + 1) % len(verts)][0] - verts[i - 1][0])
        )
        > 0.0
    ]
    return Polygon(verts[keep])


def exactness_check_p1(r, polygon=None):
    """Worst scaled error of the rule on ``1``, ``x`` and ``y``.

    Reference values are exact boundary (shoelace) moments of ``polygon``,
    which defaults to the mesh boundary.  Errors are divided by
    ``|polygon| * max|f|`` over the rule points.
    """
    polygon = boundary_polygon(r.mesh) if polygon is None else polygon
    area = polygon.area
    exact = polygon_moments(polygon)
    x, y = r.points[:, 0], r.points[:, 1]
    worst = 0.0
    for values, ref in zip((np.ones_like(x), x, y), exact):
        quad = math.fsum(r.weights * values)
        scale = area * max(float(np.max(np.abs(values))), np.finfo(float).tiny)
        worst = max(worst, abs(quad - ref) / scale)
    return worst
