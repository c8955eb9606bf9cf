"""Bernstein-Bezier polynomials of degree ``d`` on a triangle.

Multi-indices ``(i, j, k)`` with ``i + j + k = d`` are enumerated with ``i``
descending, then ``j`` descending, so the ``v1`` vertex index ``(d, 0, 0)``
comes first.  Every sequence indexed by multi-index (domain points, weights,
B-form coefficients, collocation rows and columns) uses this order.
"""

from dataclasses import dataclass
from functools import lru_cache
from math import comb

import numpy as np

from .errors import BadDegree, DegreeTooLarge, IndexDegreeMismatch
from .geometry import Triangle, barycentric

MAX_DEGREE = 12

_FACTORIAL = [1]
for _n in range(1, MAX_DEGREE + 1):
    _FACTORIAL.append(_FACTORIAL[-1] * _n)
del _n


def _check_degree(d):
    if int(d) != d or d < 1:
        raise BadDegree(f"degree must be an integer >= 1, got {d!r}")
    if d > MAX_DEGREE:
        raise DegreeTooLarge(f"degree {d} exceeds the supported maximum {MAX_DEGREE}")
    return int(d)


def dimension(d):
    """Dimension ``(d+1)(d+2)/2`` of bivariate polynomials of total degree ``d``."""
    return (d + 1) * (d + 2) // 2


@lru_cache(maxsize=None)
def index_order(d):
    """Multi-indices of degree ``d`` as a tuple of ``(i, j, k)`` triples."""
    d = _check_degree(d)
    return tuple((i, j, d - i - j) for i in range(d, -1, -1) for j in range(d - i, -1, -1))


@lru_cache(maxsize=None)
def _exponents(d):
    idx = np.array(index_order(d), dtype=np.int64)
    coef = np.array([_FACTORIAL[d] // (_FACTORIAL[i] * _FACTORIAL[j] * _FACTORIAL[k]) for i, j, k in idx], dtype=float)
    return idx, coef


def basis_from_barycentric(b, d):
    """All degree-``d`` basis values for barycentric coordinates ``b``.

    ``b`` has last axis 3; the result has a trailing axis of length
    ``dimension(d)`` in index order.
    """
    d = _check_degree(d)
    idx, coef = _exponents(d)
    b = np.asarray(b, dtype=float)
    # powers[..., m, e] = b_m ** e
    powers = b[..., :, None] ** np.arange(d + 1)
    return coef * powers[..., 0, idx[:, 0]] * powers[..., 1, idx[:, 1]] * powers[..., 2, idx[:, 2]]


def eval_basis(t, d, index, p):
    """Value of ``B_ijk`` of degree ``d`` on triangle ``t`` at point(s) ``p``."""
    d = _check_degree(d)
    i, j, k = index
    if min(i, j, k) < 0 or i + j + k != d:
        raise IndexDegreeMismatch(f"index {tuple(index)} does not sum to degree {d}")
    b = barycentric(t, p)
    coef = _FACTORIAL[d] / (_FACTORIAL[i] * _FACTORIAL[j] * _FACTORIAL[k])
    return coef * b[..., 0] ** i * b[..., 1] ** j * b[..., 2] ** k


def eval_all(t, d, p):
    """Every basis function of degree ``d`` at point(s) ``p``."""
    return basis_from_barycentric(barycentric(t, p), d)


def domain_points(t, d):
    """Domain points ``(i*v1 + j*v2 + k*v3) / d`` as an ``(n, 2)`` array."""
    idx = np.array(index_order(d), dtype=float)
    return (idx @ t.vertices) / d


def basis_integral(t, d):
    """Integral of any single degree-``d`` basis function over ``t``."""
    d = _check_degree(d)
    return t.area / comb(d + 2, 2)


@dataclass(frozen=True, eq=False)
class BForm:
    """Polynomial ``sum c_ijk B_ijk`` with coefficients in index order."""

    degree: int
    triangle: Triangle
    coeffs: np.ndarray

    def __post_init__(self):
        d = _check_degree(self.degree)
        c = np.array(self.coeffs, dtype=float)
        if c.shape != (dimension(d),):
            raise IndexDegreeMismatch(f"degree {d} needs {dimension(d)} coefficients, got shape {c.shape}")
        c.flags.writeable = False
        object.__setattr__(self, "coeffs", c)

    def __call__(self, p):
        return eval_bform(self, p)


def eval_bform(f, p):
    return eval_all(f.triangle, f.degree, p) @ f.coeffs
