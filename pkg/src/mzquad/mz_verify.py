"""Empirical Marcinkiewicz-Zygmund ratios for random polynomials.

For a rule with points ``x_j`` and weights ``w_j`` on a domain ``D`` and a
polynomial ``chi``, the finite-``p`` ratio is

    sum_j w_j |chi(x_j)|^p  /  int_D |chi|^p

and the ``p = inf`` ratio is ``max_j |chi(x_j)| / max_D |chi|``.  Ensembles
sample ``chi`` with i.i.d. uniform coefficients on ``[-1, 1]`` in the monomial
basis and report the envelope of the ratio.

Random numbers come from splitmix64: the state advances by
``0x9E3779B97F4A7C15`` and is mixed with the (30, 27, 31) xor-shift /
multiply finalizer; a 64-bit output ``z`` becomes the double
``(z >> 11) * 2**-53`` in ``[0, 1)``, and the coefficient is ``2u - 1``.
Trial ``i`` of an ensemble seeded with ``s`` starts from state ``s ^ i``.
Coefficients are drawn in monomial order: total degree ``n = 0..N``, and
within each degree ``x^n, x^(n-1) y, ..., y^n``.
"""

from dataclasses import asdict, dataclass
import csv
import io
import math

import numpy as np

from .errors import DegeneratePolynomial, InputError, NumericalError, OracleBudgetExceeded
from .oracle import OracleConfig, integrate, sup_abs
from .poly_rule import PolygonRule
from .tri_rule import TriangleRule

MASK64 = (1 << 64) - 1
GOLDEN_GAMMA = 0x9E3779B97F4A7C15
DEGENERATE_NORM = 1e-14
ACCEPTABLE_ORACLE_ERROR = 1e-6
DEFAULT_CONFIG = OracleConfig(tolerance=1e-10, max_evaluations=4_000_000)

CSV_FIELDS = (
    "p",
    "N",
    "rule",
    "mesh_size",
    "mesh_count",
    "trials",
    "ratio_min",
    "ratio_mean",
    "ratio_max",
    "eta_observed",
    "discarded",
    "regime",
)


class SplitMix64:
    def __init__(self, seed):
        self.state = int(seed) & MASK64

    def next_u64(self):
        self.state = (self.state + GOLDEN_GAMMA) & MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
        return z ^ (z >> 31)

    def uniform(self):
        return (self.next_u64() >> 11) * 2.0**-53


def monomial_exponents(N):
    return [(a, n - a) for n in range(N + 1) for a in range(n, -1, -1)]


@dataclass(frozen=True, eq=False)
class PolySample:
    degree: int
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=float)
        if self.degree < 0 or c.shape != ((self.degree + 1) * (self.degree + 2) // 2,):
            raise InputError(f"degree {self.degree} needs {(self.degree + 1) * (self.degree + 2) // 2} coefficients")
        if not np.any(c):
            raise DegeneratePolynomial("polynomial is identically zero")
        c.flags.writeable = False
        object.__setattr__(self, "coeffs", c)

    def __call__(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        out = np.zeros(np.broadcast(x, y).shape)
        for c, (a, b) in zip(self.coeffs, monomial_exponents(self.degree)):
            out = out + c * x**a * y**b
        return out

    def scaled(self, factor):
        return PolySample(self.degree, self.coeffs * factor)


def sample_polynomial(N, rng_seed):
    if N < 0:
        raise InputError("polynomial degree must be >= 0")
    gen = SplitMix64(rng_seed)
    n = (N + 1) * (N + 2) // 2
    return PolySample(N, [2.0 * gen.uniform() - 1.0 for _ in range(n)])


def _parse_p(p):
    if isinstance(p, str):
        p = math.inf if p.lower() in ("inf", "infinity") else float(p)
    if p != math.inf and not p >= 1:
        raise InputError(f"p must be >= 1 or inf, got {p!r}")
    return float(p)


def _ratio(points, weights, domain, p, chi, cfg):
    p = _parse_p(p)
    vals = np.abs(chi(points[:, 0], points[:, 1]))
    if p == math.inf:
        norm = sup_abs(domain, chi, extra_points=points)
        if norm < DEGENERATE_NORM:
            raise DegeneratePolynomial(f"sup norm {norm:.3e} is numerically zero")
        return float(vals.max()) / norm
    integrand = (lambda x, y: np.abs(chi(x, y))) if p == 1 else (lambda x, y: np.abs(chi(x, y)) ** p)
    try:
        value, estimate = integrate(domain, integrand, cfg or DEFAULT_CONFIG)
    except OracleBudgetExceeded as exc:
        if not exc.error_estimate <= ACCEPTABLE_ORACLE_ERROR * abs(exc.value):
            raise
        value, estimate = exc.value, exc.error_estimate
    if value <= 0 or value ** (1.0 / p) < DEGENERATE_NORM:
        raise DegeneratePolynomial(f"L^{p:g} norm is numerically zero")
    if estimate > ACCEPTABLE_ORACLE_ERROR * value:
        raise OracleBudgetExceeded(value, estimate, "denominator not resolved")
    return math.fsum(weights * vals**p) / value


def mz_ratio_triangle(rule, p, chi, cfg=None):
    """Discrete-to-continuous ratio for a :class:`TriangleRule`."""
    return _ratio(rule.points, rule.weights, rule.triangle, p, chi, cfg)


def mz_ratio_polygon(rule, p, chi, cfg=None):
    """Discrete-to-continuous ratio for a :class:`PolygonRule`."""
    return _ratio(rule.points, rule.weights, rule.mesh, p, chi, cfg)


@dataclass(frozen=True)
class MZReport:
    p: float
    N: int
    rule: str
    mesh_size: float
    mesh_count: int
    trials: int
    ratio_min: float
    ratio_mean: float
    ratio_max: float
    eta_observed: float
    discarded: int
    regime: str

    def row(self):
        out = asdict(self)
        out["p"] = "inf" if self.p == math.inf else f"{self.p:g}"
        for key in ("mesh_size", "ratio_min", "ratio_mean", "ratio_max", "eta_observed"):
            out[key] = repr(float(out[key]))
        return out


def write_csv(reports, fh=None):
    """Write reports as comma-separated rows with a header; returns the text if ``fh`` is None."""
    buf = io.StringIO() if fh is None else fh
    writer = csv.DictWriter(buf, fieldnames=CSV_FIELDS, lineterminator="\n")
    writer.writeheader()
    for r in reports:
        writer.writerow(r.row())
    return buf.getvalue() if fh is None else None


def describe_rule(rule, mesh_id=None):
    if isinstance(rule, TriangleRule):
        return f"tri-d{rule.degree}", rule.triangle.longest_edge, 1
    if isinstance(rule, PolygonRule):
        return mesh_id or f"mesh-{len(rule.weights)}pts", rule.mesh.size, rule.mesh.count
    raise InputError(f"unsupported rule type {type(rule).__name__}")


def mz_ensemble(rule, p, N, trials, seed, cfg=None, mesh_id=None):
    """Ratio envelope over ``trials`` seeded random polynomials of degree ``N``.

    Trials whose polynomial is numerically zero, or whose denominator the
    oracle cannot resolve to ``1e-6`` relative, are skipped and counted in
    ``discarded``.
    """
    if trials < 1:
        raise InputError("trials must be >= 1")
    p = _parse_p(p)
    name, size, count = describe_rule(rule, mesh_id)
    if isinstance(rule, TriangleRule):
        ratio_fn = mz_ratio_triangle
        regime = "N<=d" if N <= rule.degree else "N>d"
    else:
        ratio_fn = mz_ratio_polygon
        regime = "polygon"
    ratios = []
    discarded = 0
    for i in range(trials):
        try:
            chi = sample_polynomial(N, (seed ^ i) & MASK64)
            ratios.append(ratio_fn(rule, p, chi, cfg))
        except (DegeneratePolynomial, OracleBudgetExceeded, NumericalError):
            discarded += 1
    if ratios:
        r = np.array(ratios)
        lo, hi, mean = float(r.min()), float(r.max()), math.fsum(ratios) / len(ratios)
        eta = max(hi - 1.0, 1.0 - lo)
    else:
        lo = hi = mean = eta = math.nan
    return MZReport(p, N, name, float(size), int(count), trials, lo, mean, hi, eta, discarded, regime)
