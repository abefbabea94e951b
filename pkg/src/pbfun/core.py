"""Definition-level evaluation of B_2^h(x, E).

For alpha = 2 the field is sqrt2*N*t - t^2 - h(t), so with s = sqrt2*u the
sojourn below level z is mes{t in E : g(t) - s t + z < 0} where
g(t) = h(t) + t^2 = C|t|^lam.  Every drift family in scope reduces to a pair
(C, lam), see :meth:`Problem.quadratic_form`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from . import kernels
from .gauss import SQRT2, normal_mass
from .model import (
    HalfLine,
    Interval,
    PBValue,
    PowerAlpha,
    PowerMinusQuad,
    Problem,
    TooManyCrossings,
    UnsupportedAlpha,
    UnsupportedDomain,
    UnsupportedDrift,
    Zero,
)
from .quadrature import QuadConfig, integrate_exp_left, integrate_exp_right

N_SCAN = 257
MAX_DOUBLINGS = 4


@dataclass(frozen=True)
class CurvePoint:
    """A level shift z together with a realisation u of N."""

    z: float
    u: float


def _bounds(domain) -> tuple[float, float]:
    if isinstance(domain, HalfLine):
        return 0.0, math.inf
    return domain.a, domain.b


def _form(drift, alpha: float, domain) -> tuple[float, float]:
    if isinstance(drift, PowerAlpha) and alpha != 2.0:
        raise UnsupportedDrift("the power drift has a quadratic form only for alpha = 2")
    return Problem(2.0, drift, domain, 0.0).quadratic_form()


def sojourn_length(point: CurvePoint, drift, domain, alpha: float = 2.0) -> float:
    """mes{t in E : h(t) + t^2 - sqrt2*u*t + z < 0}."""
    C, lam = _form(drift, alpha, domain)
    a, b = _bounds(domain)
    return kernels.sojourn_length(point.z, SQRT2 * point.u, C, lam, a, b)


def _silent_slope(z, C, lam, a, b) -> float:
    """Largest s0 >= 0 with L(z, s) = 0 whenever |s| <= s0.

    L > 0 needs |s| |t| > g(t) + z for some t in E, so s0 is the minimum of
    (C r^lam + z)/r over r = |t|; this ratio is unimodal in r.
    """
    if z <= 0.0:
        return 0.0
    r_hi = max(abs(a), abs(b))
    r_lo = 0.0 if a <= 0.0 <= b else min(abs(a), abs(b))
    if lam > 1.0:
        r = (z / ((lam - 1.0) * C)) ** (1.0 / lam)
        r = min(max(r, r_lo), r_hi)
    else:
        r = r_hi
    if math.isinf(r) or r <= 0.0:
        return 0.0
    return (C * r ** lam + z) / r


def _prob_window(z, x, C, lam, a, b, u_lo, u_hi, window) -> float:
    n = N_SCAN
    for _ in range(MAX_DOUBLINGS + 1):
        p = kernels.prob_exceeds(z, x, C, lam, a, b, u_lo, u_hi, n, window)
        if p >= 0.0:
            return p
        n = 2 * n - 1
    raise TooManyCrossings(f"crossing scan unresolved at z={z!r} with {n} points")


def _prob(z, x, C, lam, a, b, u_lo=-math.inf, u_hi=math.inf) -> float:
    """P{u_lo < N < u_hi, L(z, N) > x}.

    The scan skips the band |u| <= w0 where the sojourn is empty, and reaches
    8.5 standard units past it, so large levels z keep full relative accuracy.
    """
    w0 = _silent_slope(z, C, lam, a, b) / SQRT2
    window = w0 + 8.5
    if w0 == 0.0:
        return _prob_window(z, x, C, lam, a, b, u_lo, u_hi, window)
    total = 0.0
    if u_lo < -w0:
        total += _prob_window(z, x, C, lam, a, b, u_lo, min(u_hi, -w0), window)
    if u_hi > w0:
        total += _prob_window(z, x, C, lam, a, b, max(u_lo, w0), u_hi, window)
    return min(total, 1.0)


def prob_sojourn_exceeds(z: float, problem: Problem) -> float:
    """P{L(z, N) > x} for alpha = 2."""
    if problem.alpha != 2.0:
        raise UnsupportedAlpha("prob_sojourn_exceeds requires alpha = 2")
    if problem.x >= problem.domain.measure:
        return 0.0
    C, lam = problem.quadratic_form()
    a, b = _bounds(problem.domain)
    return _prob(z, problem.x, C, lam, a, b)


def _decay_hint(C: float, lam: float, a: float, b: float) -> float:
    if math.isinf(b):
        if lam > 2.0:
            return max(1.0, 1.0 / C)
        if lam == 2.0 and C > 1.0:
            return 1.0 / (C - 1.0)
        raise UnsupportedDomain("the value is infinite for this drift on the half-line")
    # P{L > 0} <= 2 Psi(z / (sqrt2 m)), so e^z P peaks near 2 m^2
    m = max(abs(a), abs(b))
    return max(1.0, 4.0 * m * m)


def _finish(left, right, method: str, flags=None) -> PBValue:
    res = left + right
    fl = list(flags or [])
    if not res.converged:
        fl.append("quad_not_converged")
    return PBValue(max(res.value, 0.0), res.err_est, method, fl)


def pb_quadrature(problem: Problem, cfg: QuadConfig = QuadConfig()) -> PBValue:
    """Reference value of B_2^h(x, E) from the defining z-integral."""
    if problem.alpha != 2.0:
        raise UnsupportedAlpha("pb_quadrature requires alpha = 2")
    if problem.x >= problem.domain.measure:
        return PBValue(0.0, 0.0, "quadrature")
    C, lam = problem.quadratic_form()
    a, b = _bounds(problem.domain)
    hint = _decay_hint(C, lam, a, b)
    x = problem.x

    def p(z):
        return _prob(z, x, C, lam, a, b)

    left = integrate_exp_left(p, cfg)
    right = integrate_exp_right(p, hint, cfg)
    return _finish(left, right, "quadrature")


# ---------------------------------------------------------------------------
# event decomposition

def _g(t, C, lam):
    return C * abs(t) ** lam


def _gprime_right(t, C, lam):
    if t == 0.0:
        return C if lam == 1.0 else 0.0
    return lam * C * abs(t) ** (lam - 1.0) * math.copysign(1.0, t)


def _gprime_left(t, C, lam):
    if t == 0.0:
        return -C if lam == 1.0 else 0.0
    return _gprime_right(t, C, lam)


def _neg_set(t, z, C, lam):
    """s-interval on which g(t) - s t + z < 0, as (lo, hi); may be empty."""
    K = _g(t, C, lam) + z
    if t > 0.0:
        return K / t, math.inf
    if t < 0.0:
        return -math.inf, K / t
    return (-math.inf, math.inf) if K < 0.0 else (0.0, 0.0)


def _nonneg_set(t, z, C, lam):
    """s-interval on which g(t) - s t + z >= 0 (complement up to a null set)."""
    K = _g(t, C, lam) + z
    if t > 0.0:
        return -math.inf, K / t
    if t < 0.0:
        return K / t, math.inf
    return (-math.inf, math.inf) if K >= 0.0 else (0.0, 0.0)


def _meet(*ivs):
    lo = max(iv[0] for iv in ivs)
    hi = min(iv[1] for iv in ivs)
    return lo, hi


def _u_mass(iv) -> float:
    lo, hi = iv
    if hi <= lo:
        return 0.0
    return normal_mass(lo / SQRT2, hi / SQRT2)


def _convex_terms(z, x, C, lam, a, b):
    ga = _gprime_right(a, C, lam)
    gb = _gprime_left(b, C, lam) if math.isfinite(b) else math.inf
    # increasing on E: sojourn is [a, t2], longer than x iff f(a+x) < 0
    term_a = _u_mass(_meet((-math.inf, ga), _neg_set(a + x, z, C, lam)))
    term_b = 0.0
    if math.isfinite(b):
        term_b = _u_mass(_meet((gb, math.inf), _neg_set(b - x, z, C, lam)))
    term_c = 0.0
    if gb > ga:
        term_c = _prob(z, x, C, lam, a, b, ga / SQRT2, gb / SQRT2)
    return term_a + term_b + term_c


def _concave_terms(z, x, C, lam, a, b):
    # a >= 0: f is concave on E, so {f >= 0} is a sub-interval and
    # {f < 0} consists of pieces attached to the endpoints.
    t1 = _u_mass(_meet(_nonneg_set(a, z, C, lam), _neg_set(b - x, z, C, lam)))
    t2 = _u_mass(_meet(_neg_set(a, z, C, lam), _nonneg_set(b, z, C, lam), _neg_set(a + x, z, C, lam)))
    lo, hi = _meet(_neg_set(a, z, C, lam), _neg_set(b, z, C, lam))
    t3 = 0.0
    if hi > lo:
        t3 = _prob(z, x, C, lam, a, b, lo / SQRT2, hi / SQRT2)
    return t1 + t2 + t3


def pb_event_decomposition(problem: Problem, cfg: QuadConfig = QuadConfig()) -> PBValue:
    """B_2^h(x, E) as a sum of event probabilities resolved per level z."""
    if problem.alpha != 2.0:
        raise UnsupportedAlpha("pb_event_decomposition requires alpha = 2")
    if not isinstance(problem.drift, (PowerMinusQuad, Zero, PowerAlpha)):
        raise UnsupportedDrift(str(problem.drift))
    if problem.x >= problem.domain.measure:
        return PBValue(0.0, 0.0, "semi_closed")
    C, lam = problem.quadratic_form()
    a, b = _bounds(problem.domain)
    x = problem.x
    hint = _decay_hint(C, lam, a, b)
    if lam >= 1.0:
        terms = _convex_terms
    else:
        if a < 0.0 < b:
            raise UnsupportedDomain(
                "concave decomposition needs E on one side of 0; use pb_quadrature"
            )
        if b <= 0.0:
            a, b = -b, -a
        terms = _concave_terms

    def p(z):
        return terms(z, x, C, lam, a, b)

    left = integrate_exp_left(p, cfg)
    right = integrate_exp_right(p, hint, cfg)
    return _finish(left, right, "semi_closed")
