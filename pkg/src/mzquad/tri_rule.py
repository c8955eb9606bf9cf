"""Interpolatory quadrature on the degree-``d`` domain points of a triangle.

The weight of domain point ``ijk`` is ``A_T / C(d+2, 2)`` times the ``ijk``-th
column sum of the inverse collocation matrix.  Column sums of ``B^-1`` are the
solution of ``B^T s = 1``, so the inverse is never formed.
"""

from dataclasses import dataclass
from fractions import Fraction
from math import comb, factorial
import warnings

import numpy as np
import scipy.linalg

from . import bb_basis
from .bb_basis import BForm, dimension, domain_points, index_order
from .errors import IllConditionedCollocation, InputError, NonFiniteSample
from .geometry import Triangle

# 1/eps is where LU stops carrying information; refuse well before that.
MAX_CONDITION = 1e12


@dataclass(frozen=True, eq=False)
class TriangleRule:
    triangle: Triangle
    degree: int
    points: np.ndarray
    weights: np.ndarray
    condition: float = 1.0

    @property
    def all_positive(self):
        return bool(np.all(self.weights > 0))

    @property
    def column_sums(self):
        """``sigma_ijk(B^-1)`` recovered from the weights."""
        return self.weights * comb(self.degree + 2, 2) / self.triangle.area

    def __len__(self):
        return len(self.weights)

    def to_json(self):
        return {
            "degree": self.degree,
            "points": self.points.tolist(),
            "weights": self.weights.tolist(),
        }


def collocation_matrix(t, d):
    """Square matrix with entry ``(row ijk, col lmn) = B_lmn(domain point ijk)``.

    The barycentric coordinates of a domain point are exactly ``(i, j, k) / d``
    and are used directly instead of being re-solved from Cartesian
    coordinates.
    """
    bary = np.array(index_order(d), dtype=float) / d
    return bb_basis.basis_from_barycentric(bary, d)


def _lu_solve_refined(matrix, rhs, trans=0):
    lu = scipy.linalg.lu_factor(matrix, check_finite=True)
    x = scipy.linalg.lu_solve(lu, rhs, trans=trans)
    op = matrix.T if trans else matrix
    # one step of iterative refinement
    x = x + scipy.linalg.lu_solve(lu, rhs - op @ x, trans=trans)
    return x, lu


def _condition(matrix, lu):
    anorm = np.linalg.norm(matrix, 1)
    (gecon,) = scipy.linalg.get_lapack_funcs(("gecon",), (lu[0],))
    rcond, info = gecon(lu[0], anorm, norm="1")
    return np.inf if rcond == 0 or info != 0 else 1.0 / rcond


def triangle_weights(t, d):
    """Build the degree-``d`` rule on triangle ``t``."""
    B = collocation_matrix(t, d)
    n = len(B)
    with warnings.catch_warnings():
        warnings.simplefilter("error", scipy.linalg.LinAlgWarning)
        try:
            s, lu = _lu_solve_refined(B, np.ones(n), trans=1)
        except (np.linalg.LinAlgError, ValueError, scipy.linalg.LinAlgWarning) as exc:
            raise IllConditionedCollocation(f"collocation solve failed for d={d}: {exc}") from exc
    cond = _condition(B, lu)
    residual = np.max(np.abs(B.T @ s - 1.0))
    if not np.isfinite(cond) or cond > MAX_CONDITION or residual > 1e-10:
        raise IllConditionedCollocation(f"collocation matrix for d={d} is ill-conditioned", cond)
    weights = t.area / comb(d + 2, 2) * s
    return TriangleRule(t, d, domain_points(t, d), weights, float(cond))


def evaluate_at(f, points):
    values = np.asarray(f(points[:, 0], points[:, 1]), dtype=float)
    values = np.broadcast_to(values, (len(points),))
    bad = ~np.isfinite(values)
    if bad.any():
        raise NonFiniteSample(tuple(points[np.argmax(bad)]))
    return values


def apply_rule(rule, f):
    """Weighted sum of ``f(x, y)`` over the rule's points.

    ``f`` is called once with coordinate arrays.
    """
    return float(rule.weights @ evaluate_at(f, rule.points))


def interpolate(t, d, values):
    """B-form of the unique degree-``d`` interpolant of ``values`` at the domain points."""
    values = np.asarray(values, dtype=float)
    if values.shape != (dimension(d),):
        raise InputError(f"expected {dimension(d)} values for degree {d}, got shape {values.shape}")
    B = collocation_matrix(t, d)
    try:
        c, lu = _lu_solve_refined(B, values)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise IllConditionedCollocation(f"interpolation solve failed for d={d}: {exc}") from exc
    cond = _condition(B, lu)
    if not np.isfinite(cond) or cond > MAX_CONDITION:
        raise IllConditionedCollocation(f"collocation matrix for d={d} is ill-conditioned", cond)
    return BForm(d, t, c)


# -- exact monomial integrals ------------------------------------------------


def _poly_power(base, n):
    """Coefficients ``{(p, q): c}`` of ``(c0 + c1 s + c2 t) ** n``."""
    c0, c1, c2 = base
    out = {}
    for a in range(n + 1):
        for b in range(n - a + 1):
            r = n - a - b
            coef = Fraction(factorial(n), factorial(a) * factorial(b) * factorial(r))
            out[(b, r)] = out.get((b, r), 0) + coef * c0**a * c1**b * c2**r
    return out


def monomial_integral(t, a, b):
    """Exact integral of ``x**a * y**b`` over ``t``, rounded once to float.

    Vertex coordinates are converted to rationals exactly, the monomial is
    pulled back to the reference triangle and integrated term by term with
    ``int s^p t^q = p! q! / (p+q+2)!``.
    """
    (x1, y1), (x2, y2), (x3, y3) = ((Fraction(u), Fraction(v)) for u, v in t.vertices)
    px = _poly_power((x1, x2 - x1, x3 - x1), a)
    py = _poly_power((y1, y2 - y1, y3 - y1), b)
    jac = abs((x2 - x1) * (y3 - y1) - (x3 - x1) * (y2 - y1))
    total = Fraction(0)
    for (p1, q1), c1 in px.items():
        for (p2, q2), c2 in py.items():
            p, q = p1 + p2, q1 + q2
            total += c1 * c2 * Fraction(factorial(p) * factorial(q), factorial(p + q + 2))
    return float(total * jac)


def exactness_check(rule):
    """Worst scaled quadrature error over monomials ``x^a y^b``, ``a + b <= d``.

    Each error is divided by ``A_T * max|x^a y^b|`` over the rule points.
    """
    t = rule.triangle
    x, y = rule.points[:, 0], rule.points[:, 1]
    worst = 0.0
    for n in range(rule.degree + 1):
        for a in range(n, -1, -1):
            b = n - a
            values = x**a * y**b
            scale = t.area * max(np.max(np.abs(values)), np.finfo(float).tiny)
            err = abs(float(rule.weights @ values) - monomial_integral(t, a, b)) / scale
            worst = max(worst, err)
    return worst
