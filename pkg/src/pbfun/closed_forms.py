"""Closed and semi-closed expressions for B_alpha^h.

alpha = 1 with h(t) = ct on the half-line: a literal transcription of the
published display (``bm1_printed``) and a constructive route built from the
sojourn law of drifted Brownian motion (``bm1_constructive``, the reference).
alpha = 2: the half-line display, the Pickands-case formulas and the interval
formulas for h(t) = c|t|^lam - t^2 with lam in {1, 2}.
"""
from __future__ import annotations

import math

from .gauss import SQRT2, Phi, Psi, exp_times_Psi, normal_mass, nu, phi
from .model import PBValue
from .quadrature import (
    QuadConfig,
    QuadResult,
    integrate_exp_left,
    integrate_exp_right,
    integrate_finite,
    integrate_sqrt_singular,
)

PRINTED = "printed_formula_unaudited"
LEFT_LIMIT = "endpoint_left_limit"


def _quad_flags(res: QuadResult, flags=()) -> list[str]:
    out = list(flags)
    if not res.converged:
        out.append("quad_not_converged")
    return out


# ---------------------------------------------------------------------------
# alpha = 1, half-line, h(t) = c t

def bm1_printed(x: float, c: float) -> PBValue:
    """The alpha = 1 display exactly as published (not audited)."""
    r = math.sqrt(x / 2.0)
    xc = (1.0 + c) * r
    xp = (1.0 - c) * r
    first = (1.0 + c) ** 2 / c * Psi(xc) - (1.0 - c) * xc * phi(xc)
    first += ((1.0 - c) ** 2 / (4.0 * (1.0 + c)) * xc * xc + (1.0 + c) / 2.0) * math.exp(-xc * xc / 2.0)
    bracket = (1.0 - c) / c * Psi(xp) - xp * phi(xp) + (1.0 + xp * xp / 2.0) / 2.0 * math.exp(-xp * xp / 2.0)
    val = first - (1.0 + c) * math.exp(-c * x) * bracket
    return PBValue(val, 0.0, "closed", [PRINTED])


def survival_Y0(y: float, c: float) -> float:
    """P{mes{t >= 0 : sqrt2 B(t) - (1+c)t > 0} > y}."""
    if y <= 0.0:
        return 1.0
    yc = (1.0 + c) * math.sqrt(y / 2.0)
    return max(2.0 * (1.0 + yc * yc) * Psi(yc) - 2.0 * yc * phi(yc), 0.0)


def bm1_kernel(t: float, c: float) -> float:
    """g(t) = (1+c) phi(t_c)/t_c - (1-c) Psi(t_c') e^(-ct)."""
    r = math.sqrt(t / 2.0)
    tc = (1.0 + c) * r
    tp = (1.0 - c) * r
    return (1.0 + c) * phi(tc) / tc - (1.0 - c) * Psi(tp) * math.exp(-c * t)


def bm1_kernel_check(t: float, c: float, cfg: QuadConfig = QuadConfig()) -> float:
    """∫_0^inf e^(-z) z/sqrt(2t^3) phi(z/sqrt(2t) - t_c) dz by quadrature."""
    tc = (1.0 + c) * math.sqrt(t / 2.0)
    s = math.sqrt(2.0 * t)

    def f(z):
        return math.exp(-z) * z / math.sqrt(2.0 * t ** 3) * phi(z / s - tc)

    # the integrand is concentrated near z = s * t_c with width s
    peak = max(s * tc, 0.0)
    hi = peak + 40.0 * s + 40.0
    pts = [0.0, peak, min(peak + 10.0 * s, hi), hi]
    tot = 0.0
    for lo, up in zip(pts[:-1], pts[1:]):
        if up > lo:
            tot += integrate_finite(f, lo, up, QuadConfig(1e-13, 1e-12, 500)).value
    return tot


def bm1_constructive(x: float, c: float, cfg: QuadConfig = QuadConfig()) -> PBValue:
    """Reference value of B_1^h(x) for h(t) = ct on [0, inf)."""
    r = math.sqrt(x / 2.0)
    xc = (1.0 + c) * r
    xp = (1.0 - c) * r
    i1 = survival_Y0(x, c) / c
    i21 = (1.0 + c) / c * Psi(xc) - (1.0 - c) / c * Psi(xp) * math.exp(-c * x)
    if x <= 0.0:
        return PBValue(i1 + i21, 0.0, "semi_closed")

    def integrand(t):
        return survival_Y0(x - t, c) * bm1_kernel(t, c)

    half = 0.5 * x
    first = integrate_sqrt_singular(integrand, half, cfg)
    # near t = x the survival factor has a sqrt-type kink; substitute there too
    second = integrate_sqrt_singular(lambda v: integrand(x - v), half, cfg)
    i22 = first + second
    return PBValue(i1 + i21 + i22.value, i22.err_est, "semi_closed", _quad_flags(i22))


# ---------------------------------------------------------------------------
# alpha = 2

def bm2_halfline_printed(x: float, c: float) -> PBValue:
    """The alpha = 2 half-line display exactly as published (not audited)."""
    v = math.sqrt((1.0 + c) / c) * Psi(math.sqrt(c * (1.0 + c) / 2.0) * x) * math.exp(-(1.0 + c) * x * x / 4.0)
    v += Psi((1.0 - c) * x / SQRT2) * math.exp(-c * x * x) - Psi((1.0 + c) * x / SQRT2)
    return PBValue(v, 0.0, "closed", [PRINTED])


def halfline_gap_conjecture(x: float, c: float) -> float:
    """Conjectured difference (true - printed) for the alpha = 2 half-line display."""
    return Psi((1.0 + c) * x / SQRT2)


def pickands2_rate(x: float) -> float:
    return SQRT2 * phi(x / SQRT2)


def pickands2_interval(x: float, T: float) -> PBValue:
    v = 2.0 * Psi(x / SQRT2) + SQRT2 * (T - x) * phi(x / SQRT2)
    return PBValue(v, 0.0, "closed", [LEFT_LIMIT] if x >= T else [])


def _wmass(c: float, lo: float, hi: float) -> float:
    """P{lo < sqrt2 N / c < hi}."""
    if hi <= lo:
        return 0.0
    return normal_mass(c * lo / SQRT2, c * hi / SQRT2)


def _I1_density(z: float, a: float, x: float, c: float) -> float:
    m = a + x
    if m > 0.0:
        return _wmass(c, m + z / (c * m), 2.0 * a + x)
    if m < 0.0:
        return _wmass(c, -math.inf, min(m + z / (c * m), 2.0 * a + x))
    return 0.0


def _I3_density(z: float, a: float, b: float, x: float, c: float) -> float:
    z0 = -c * x * x / 4.0
    if z < z0:
        return 0.0
    r = math.sqrt(max(x * x + 4.0 * z / c, 0.0))
    lo, hi = 2.0 * a + x, 2.0 * b - x
    return _wmass(c, max(lo, r), hi) + _wmass(c, lo, min(-r, hi))


def _hint(a: float, b: float) -> float:
    m = max(abs(a), abs(b))
    return max(1.0, 4.0 * m * m)


def _z_integral(dens, breaks, hint, cfg) -> QuadResult:
    return integrate_exp_left(dens, cfg, breaks) + integrate_exp_right(dens, hint, cfg, breaks)


def prop21_lambda2(x: float, a: float, b: float, c: float, cfg: QuadConfig = QuadConfig()) -> PBValue:
    """B_2^h(x, [a, b]) for h(t) = c t^2 - t^2 via the I1/I2/I3 split."""
    if not (a < b and 0.0 <= x <= b - a and c > 0.0):
        raise ValueError("need a < b, 0 <= x <= b - a and c > 0")
    const = 0.0
    # the a + x = 0 clause of I1 carries no z-integral
    if a + x == 0.0:
        const += _wmass(c, -math.inf, 2.0 * a + x)
    if x - b == 0.0:
        const += _wmass(c, -math.inf, x - 2.0 * b)
    const += math.exp(-c * x * x / 4.0) * _wmass(c, 2.0 * a + x, 2.0 * b - x)

    def dens(z):
        v = _I1_density(z, a, x, c) + _I1_density(z, -b, x, c) + _I3_density(z, a, b, x, c)
        return min(max(v, 0.0), 3.0)

    breaks = [-c * x * x / 4.0, c * a * (a + x), c * b * (b - x)]
    res = _z_integral(dens, breaks, _hint(a, b), cfg)
    flags = [LEFT_LIMIT] if x >= b - a else []
    return PBValue(const + res.value, res.err_est, "semi_closed", _quad_flags(res, flags))


def _lin_gt(coef: float, rhs: float):
    """s-interval where coef * s > rhs."""
    if coef > 0.0:
        return rhs / coef, math.inf
    if coef < 0.0:
        return -math.inf, rhs / coef
    return (-math.inf, math.inf) if rhs < 0.0 else (0.0, 0.0)


def _smass(ivs) -> float:
    """Gaussian mass (in s = sqrt2 N) of the intersection of s-intervals."""
    lo = max(iv[0] for iv in ivs)
    hi = min(iv[1] for iv in ivs)
    if hi <= lo:
        return 0.0
    return normal_mass(lo / SQRT2, hi / SQRT2)


def _H3_density(z: float, a: float, b: float, x: float, c: float) -> float:
    """P{|s| < c, min(b, t2) - max(a, t1) > x} at level z < 0, s = sqrt2 N.

    Roots on the real line: t1 = z/(c+s) < 0 < t2 = -z/(c-s).
    """
    if z >= 0.0:
        return 0.0
    band = (-c, c)
    t1_gt_a = (z / a - c, math.inf)  # a < 0
    t1_lt_a = (-math.inf, z / a - c)
    t2_gt_b = (c + z / b, math.inf)
    t2_lt_b = (-math.inf, c + z / b)
    # b - t1 > x  <=>  (b - x)(c + s) > z
    b_minus_t1 = _lin_gt(b - x, z - (b - x) * c)
    # t2 - a > x  <=>  (a + x)(c - s) < -z  <=>  (a + x) s > z + (a + x) c
    t2_minus_a = _lin_gt(a + x, z + (a + x) * c)
    h31 = _smass([band, t1_gt_a, t2_gt_b, b_minus_t1])
    h32 = _smass([band, t1_lt_a, t2_lt_b, t2_minus_a])
    h33 = _smass([band, t1_lt_a, t2_gt_b])
    # t2 - t1 > x  <=>  s^2 > c^2 + 2cz/x
    base = [band, t1_gt_a, t2_lt_b]
    if x == 0.0:
        h34 = _smass(base)
    else:
        k = c * c + 2.0 * c * z / x
        if k < 0.0:
            h34 = _smass(base)
        else:
            r = math.sqrt(k)
            h34 = _smass(base + [(r, math.inf)]) + _smass(base + [(-math.inf, -r)])
    return h31 + h32 + h33 + h34


def prop21_lambda1(x: float, a: float, b: float, c: float, cfg: QuadConfig = QuadConfig()) -> PBValue:
    """B_2^h(x, [a, b]) for h(t) = c|t| - t^2."""
    if not (a < b and 0.0 <= x <= b - a and c > 0.0):
        raise ValueError("need a < b, 0 <= x <= b - a and c > 0")
    flags = [LEFT_LIMIT] if x >= b - a else []
    if b <= 0.0:
        a, b = -b, -a
    if a >= 0.0:
        m = a + x
        v = math.exp(m * (m - c)) - nu(m, c) + nu(b - x, c)
        return PBValue(v, 0.0, "closed", flags)
    head = nu(b - x, c) + nu(-(a + x), c)

    def dens(z):
        return min(max(_H3_density(z, a, b, x, c), 0.0), 1.0)

    breaks = [2.0 * a * b * c / (b - a), 2.0 * a * c, -2.0 * b * c, -c * x / 2.0]
    for m in (b - x, a + x):
        if m != 0.0 and m != b and m != a:
            breaks.append(2.0 * c * m * b / (b - m))
            breaks.append(2.0 * c * m * a / (m - a))
    breaks = [z for z in breaks if math.isfinite(z) and z < 0.0]
    res = integrate_exp_left(dens, cfg, breaks)
    return PBValue(head + res.value, res.err_est, "semi_closed", _quad_flags(res, flags))


__all__ = [
    "bm1_printed",
    "bm1_constructive",
    "bm1_kernel",
    "bm1_kernel_check",
    "survival_Y0",
    "bm2_halfline_printed",
    "halfline_gap_conjecture",
    "pickands2_rate",
    "pickands2_interval",
    "prop21_lambda2",
    "prop21_lambda1",
    "Phi",
    "exp_times_Psi",
]
