"""Shared generators and closed-form references for the tests.

The analytic integrals here are derived independently of the package:
monomials through barycentric moments ``int_T b1^i b2^j b3^k``, and
``g(a x + b y + c)`` through the Hermite-Genocchi formula
``int_T G''(l) = 2 A_T G[l1, l2, l3]`` evaluated in 50-digit arithmetic.
"""

from fractions import Fraction
from math import factorial

import mpmath
import numpy as np

from mzquad.geometry import Polygon, Triangle
from mzquad.mesh import ScatteredSet

mpmath.mp.dps = 50


def random_triangle(rng, scale=1.0, min_shape=None):
    while True:
        v = rng.uniform(-1, 1, size=(3, 2)) * scale + rng.uniform(-3, 3, size=2)
        try:
            t = Triangle(*map(tuple, v))
        except ValueError:
            continue
        if min_shape is None or t.shape_param < min_shape:
            return t


def star_polygon(rng, n):
    # jittered even angles keep consecutive vertices apart; star-shaped, so simple
    angles = np.linspace(0, 2 * np.pi, n, endpoint=False) + rng.uniform(0, 0.3 / n, n) * 2 * np.pi
    radii = rng.uniform(0.5, 1.5, n)
    return Polygon(np.column_stack([radii * np.cos(angles), radii * np.sin(angles)]))


def random_scattered_set(rng, n_boundary, n_interior):
    poly = star_polygon(rng, n_boundary)
    scale = ScatteredSet.diameter_scale(poly)
    pts = []
    while len(pts) < n_interior:
        p = rng.uniform(-1.5, 1.5, size=2)
        if poly.contains(p) and poly.boundary_distance(p) > 1e-3 * scale:
            if all(np.hypot(*(p - q)) > 1e-3 * scale for q in pts):
                pts.append(p)
    return ScatteredSet(poly, np.array(pts).reshape(-1, 2))


# -- exact references --------------------------------------------------------


def _multinomial_power(coords, n):
    """``(c1 b1 + c2 b2 + c3 b3) ** n`` as ``{(i, j, k): coeff}``."""
    out = {}
    for i in range(n + 1):
        for j in range(n - i + 1):
            k = n - i - j
            c = Fraction(factorial(n), factorial(i) * factorial(j) * factorial(k))
            out[(i, j, k)] = c * coords[0] ** i * coords[1] ** j * coords[2] ** k
    return out


def exact_monomial(vertices, a, b):
    """``int_T x^a y^b`` as a Fraction, for rational-representable vertices."""
    xs = [Fraction(v[0]) for v in vertices]
    ys = [Fraction(v[1]) for v in vertices]
    (x1, y1), (x2, y2), (x3, y3) = zip(xs, ys)
    area2 = abs((x2 - x1) * (y3 - y1) - (x3 - x1) * (y2 - y1))
    px = _multinomial_power(xs, a)
    py = _multinomial_power(ys, b)
    total = Fraction(0)
    for (i1, j1, k1), c1 in px.items():
        for (i2, j2, k2), c2 in py.items():
            i, j, k = i1 + i2, j1 + j2, k1 + k2
            total += c1 * c2 * Fraction(factorial(i) * factorial(j) * factorial(k), factorial(i + j + k + 2))
    return total * area2


def _divided_difference(G, ls):
    # ls distinct; second divided difference
    l1, l2, l3 = ls
    d12 = (G(l2) - G(l1)) / (l2 - l1)
    d23 = (G(l3) - G(l2)) / (l3 - l2)
    return (d23 - d12) / (l3 - l1)


_ANTI2 = {
    "exp": (np.exp, lambda z: mpmath.exp(z)),
    "sin": (np.sin, lambda z: -mpmath.sin(z)),
    "cos": (np.cos, lambda z: -mpmath.cos(z)),
}


def exact_affine_composed(vertices, kind, a, b, c):
    """``int_T g(a x + b y + c)`` for ``g`` in exp, sin, cos."""
    _, G = _ANTI2[kind]
    v = [(mpmath.mpf(x), mpmath.mpf(y)) for x, y in vertices]
    ls = [a * x + b * y + c for x, y in v]
    area2 = abs((v[1][0] - v[0][0]) * (v[2][1] - v[0][1]) - (v[2][0] - v[0][0]) * (v[1][1] - v[0][1]))
    return float(area2 * _divided_difference(G, ls))


def analytic_library():
    """30 ``(label, vertices, f, exact)`` cases."""
    cases = []
    tri = ((0.0, 0.0), (1.0, 0.0), (0.0, 1.0))
    skew = ((-0.5, 0.25), (1.5, -0.75), (0.25, 2.0))
    for verts in (tri, skew):
        for a, b in ((0, 0), (1, 0), (0, 1), (2, 1), (3, 3), (4, 0), (1, 5), (7, 2)):
            f = (lambda a, b: lambda x, y: x**a * y**b)(a, b)
            cases.append((f"x^{a} y^{b} on {verts}", verts, f, float(exact_monomial(verts, a, b))))
    params = ((1.0, 2.0, 0.0), (-0.7, 0.3, 0.5), (2.5, -1.5, 1.0), (0.4, 1.1, -2.0), (3.0, 1.0, 0.2))
    for verts in (tri, skew):
        for kind in ("exp", "sin", "cos"):
            for a, b, c in params:
                if len(cases) >= 30:
                    break
                g = _ANTI2[kind][0]
                f = (lambda g, a, b, c: lambda x, y: g(a * x + b * y + c))(g, a, b, c)
                cases.append((f"{kind}({a}x+{b}y+{c}) on {verts}", verts, f, exact_affine_composed(verts, kind, a, b, c)))
    return cases[:30]


def ratio_lemma_number(m, p):
    """``#T^(1-1/p) |T|^2 / |T|^(2/p)``."""
    inv = 0.0 if p == np.inf else 1.0 / p
    return m.count ** (1 - inv) * m.size**2 / m.size ** (2 * inv)
