"""Adaptive reference integration over triangles and triangulated polygons.

The integrand is integrated with a positive-weight domain-point rule on
every triangle of an adaptively quartered triangulation.  A *cell* is a
triangle together with its four midpoint children; its estimate is the sum
over the children and its local error is the gap between the parent estimate
and that sum.  Refining a cell replaces it by one cell per child.

Cells are ranked by local error (ties broken by creation index).  Each sweep
refines the smallest leading set of that ranking that carries half of the
refinable error, so the process is a priority queue popped in batches.  All
cells of a sweep are evaluated in a single vectorized call of the integrand.
"""

from dataclasses import dataclass
from functools import lru_cache
import math

import numpy as np

from .bb_basis import index_order
from .errors import InputError, NonFiniteSample, OracleBudgetExceeded
from .geometry import Triangle
from .mesh import Mesh
from .tri_rule import triangle_weights

MARK_FRACTION = 0.5
_EPS = np.finfo(float).eps

# children of (a, b, c) in terms of a, b, c and the midpoints ab, bc, ca
_SPLIT = np.array(
    [
        [[1, 0, 0], [0.5, 0.5, 0], [0.5, 0, 0.5]],
        [[0.5, 0.5, 0], [0, 1, 0], [0, 0.5, 0.5]],
        [[0.5, 0, 0.5], [0, 0.5, 0.5], [0, 0, 1]],
        [[0, 0.5, 0.5], [0.5, 0, 0.5], [0.5, 0.5, 0]],
    ]
)


@dataclass(frozen=True)
class OracleConfig:
    tolerance: float = 1e-12
    max_subdivisions: int = 22
    base_degree: int = 5
    max_evaluations: int = 200_000_000

    def __post_init__(self):
        if not self.tolerance > 0:
            raise InputError("oracle tolerance must be positive")
        if self.base_degree not in (1, 3, 5):
            raise InputError("oracle base degree must be 1, 3 or 5")
        if self.max_subdivisions < 1:
            raise InputError("max_subdivisions must be >= 1")


@dataclass(frozen=True)
class Integral:
    """Integration result; unpacks as ``value, error_estimate``."""

    value: float
    error_estimate: float
    cells: int = 0
    evaluations: int = 0
    sweeps: int = 0

    def __iter__(self):
        return iter((self.value, self.error_estimate))


@lru_cache(maxsize=None)
def _reference_rule(degree):
    rule = triangle_weights(Triangle((0.0, 0.0), (1.0, 0.0), (0.0, 1.0)), degree)
    bary = np.array(index_order(degree), dtype=float) / degree
    return bary, rule.weights / rule.triangle.area


def _split(corners):
    """``(n, 3, 2)`` triangles to ``(n, 4, 3, 2)`` children."""
    return np.einsum("cij,njk->ncik", _SPLIT, corners)


def _areas(corners):
    e1 = corners[..., 1, :] - corners[..., 0, :]
    e2 = corners[..., 2, :] - corners[..., 0, :]
    return 0.5 * np.abs(e1[..., 0] * e2[..., 1] - e1[..., 1] * e2[..., 0])


class _Rule:
    def __init__(self, f, degree):
        self.f = f
        self.bary, self.weights = _reference_rule(degree)
        self.evaluations = 0

    def __call__(self, corners):
        """Estimates and absolute-value estimates for triangles ``(..., 3, 2)``."""
        pts = np.einsum("pj,...jk->...pk", self.bary, corners)
        x = pts[..., 0]
        y = pts[..., 1]
        vals = np.asarray(self.f(x, y), dtype=float)
        vals = np.broadcast_to(vals, x.shape)
        self.evaluations += vals.size
        if not np.all(np.isfinite(vals)):
            k = np.unravel_index(np.argmax(~np.isfinite(vals)), vals.shape)
            raise NonFiniteSample((float(x[k]), float(y[k])))
        area = _areas(corners)
        return area * (vals @ self.weights), area * (np.abs(vals) @ self.weights)


def _adaptive(roots, f, cfg):
    rule = _Rule(f, cfg.base_degree)
    roots = np.asarray(roots, dtype=float).reshape(-1, 3, 2)
    parent_q, _ = rule(roots)
    corners = roots
    children = _split(roots)
    child_q, child_abs = rule(children)
    err = np.abs(parent_q - child_q.sum(axis=1))
    level = np.ones(len(roots), dtype=np.int64)
    cid = np.arange(len(roots), dtype=np.int64)
    next_id = len(roots)
    # cells that can no longer be refined are folded into these accumulators
    frozen_q = []
    frozen_err = 0.0
    sweeps = 0
    while True:
        value = float(np.sum(child_q)) + math.fsum(frozen_q)
        scale = float(np.sum(child_abs))
        total_err = float(np.sum(err)) + frozen_err
        target = cfg.tolerance * abs(value) + 16 * _EPS * scale
        if total_err <= target:
            break
        refinable = level < cfg.max_subdivisions
        if frozen_err > target or not refinable.any():
            raise OracleBudgetExceeded(value, total_err, "maximum subdivision depth reached")
        if not refinable.all():
            stuck = ~refinable
            frozen_q.append(math.fsum(child_q[stuck].ravel()))
            frozen_err += float(np.sum(err[stuck]))
            corners, child_q, child_abs, err, level, cid = (
                a[refinable] for a in (corners, child_q, child_abs, err, level, cid)
            )
        order = np.lexsort((cid, -err))
        cum = np.cumsum(err[order])
        count = int(np.searchsorted(cum, MARK_FRACTION * cum[-1])) + 1
        marked = np.sort(order[:count])
        if rule.evaluations + 16 * count * len(rule.weights) > cfg.max_evaluations:
            raise OracleBudgetExceeded(value, total_err, "evaluation budget exhausted")
        keep = np.ones(len(err), dtype=bool)
        keep[marked] = False

        new_corners = _split(corners[marked]).reshape(-1, 3, 2)
        new_parent_q = child_q[marked].reshape(-1)
        grand = _split(new_corners)
        grand_q, grand_abs = rule(grand)
        new_err = np.abs(new_parent_q - grand_q.sum(axis=1))
        new_level = np.repeat(level[marked] + 1, 4)
        new_cid = next_id + np.arange(len(new_corners), dtype=np.int64)
        next_id += len(new_corners)

        corners = np.concatenate([corners[keep], new_corners])
        child_q = np.concatenate([child_q[keep], grand_q])
        child_abs = np.concatenate([child_abs[keep], grand_abs])
        err = np.concatenate([err[keep], new_err])
        level = np.concatenate([level[keep], new_level])
        cid = np.concatenate([cid[keep], new_cid])
        sweeps += 1
    # final sum in creation order so the result does not depend on array layout
    order = np.argsort(cid, kind="stable")
    value = math.fsum(list(child_q[order].ravel()) + frozen_q)
    return Integral(value, float(np.sum(err)) + frozen_err, len(err), rule.evaluations, sweeps)


def integrate_triangle(t, f, cfg=None):
    """Adaptive integral of ``f(x, y)`` over triangle ``t``."""
    return _adaptive(t.vertices[None], f, cfg or OracleConfig())


def integrate_polygon(m, f, cfg=None):
    """Adaptive integral over the union of a mesh's triangles.

    All triangles start in one shared pool, so the budget flows to wherever
    the error is.
    """
    return _adaptive(m.corners, f, cfg or OracleConfig())


def _corners(domain):
    if isinstance(domain, Triangle):
        return domain.vertices[None]
    if isinstance(domain, Mesh):
        return domain.corners
    raise InputError(f"unsupported integration domain {type(domain).__name__}")


def integrate(domain, f, cfg=None):
    return _adaptive(_corners(domain), f, cfg or OracleConfig())


# -- norms -------------------------------------------------------------------


@lru_cache(maxsize=None)
def _lattice(n):
    return np.array([(i, j, n - i - j) for i in range(n + 1) for j in range(n + 1 - i)], dtype=float) / n


def sup_abs(domain, f, lattice=None, rounds=2, candidates=4, local=24, extra_points=None):
    """Largest sampled ``|f|`` over a triangle or mesh.

    A barycentric lattice on every triangle is followed by ``rounds`` of
    local lattice refinement around the best ``candidates`` samples.  Every
    sample lies in the domain, so the result never exceeds the true maximum.
    ``extra_points`` are added to the first round's samples.
    """
    corners = _corners(domain)
    if lattice is None:
        # about 40k first-round samples in total, at least 6 per edge
        lattice = max(6, min(64, int(math.sqrt(80_000 / len(corners)))))
    L = _lattice(lattice)
    pts = np.einsum("pj,njk->npk", L, corners)
    vals = np.abs(np.asarray(f(pts[..., 0], pts[..., 1]), dtype=float))
    vals = np.broadcast_to(vals, pts.shape[:2])
    if not np.all(np.isfinite(vals)):
        k = np.unravel_index(np.argmax(~np.isfinite(vals)), vals.shape)
        raise NonFiniteSample(tuple(pts[k]))
    best = float(vals.max())
    if extra_points is not None:
        extra = np.asarray(extra_points, dtype=float).reshape(-1, 2)
        best = max(best, float(np.max(np.abs(f(extra[:, 0], extra[:, 1])))))
    flat = vals.ravel()
    top = np.lexsort((np.arange(flat.size), -flat))[:candidates]
    tri_idx, pt_idx = np.divmod(top, len(L))
    centers = L[pt_idx]
    offsets = _lattice(local) - 1.0 / 3.0
    offsets = np.vstack([offsets, -offsets])
    step = 2.0 / lattice
    for _ in range(rounds):
        bary = centers[:, None, :] + step * offsets[None]
        bary = np.clip(bary, 0.0, None)
        bary /= bary.sum(axis=2, keepdims=True)
        p = np.einsum("cpj,cjk->cpk", bary, corners[tri_idx])
        v = np.abs(np.asarray(f(p[..., 0], p[..., 1]), dtype=float))
        v = np.broadcast_to(v, p.shape[:2])
        if not np.all(np.isfinite(v)):
            k = np.unravel_index(np.argmax(~np.isfinite(v)), v.shape)
            raise NonFiniteSample(tuple(p[k]))
        j = np.argmax(v, axis=1)
        centers = bary[np.arange(len(centers)), j]
        best = max(best, float(v.max()))
        step *= 2.0 / local
    return best


def lp_norm(domain, f, p, cfg=None):
    """``L^p`` norm of ``f`` over a triangle or mesh; ``p`` may be ``math.inf``."""
    if p == math.inf:
        return sup_abs(domain, f)
    if not p >= 1:
        raise InputError(f"p must be >= 1 or inf, got {p!r}")
    if p == 1:
        g = lambda x, y: np.abs(f(x, y))  # noqa: E731
    else:
        g = lambda x, y: np.abs(f(x, y)) ** p  # noqa: E731
    value, _ = integrate(domain, g, cfg)
    return value ** (1.0 / p)
