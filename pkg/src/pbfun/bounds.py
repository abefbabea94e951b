"""Tangent-line bounds for h(t) = c|t|^lam - t^2 and the sandwich bounds.

Replacing g(t) = c|t|^lam by its tangent at y turns the curve into a line, for
which the sojourn is attached to one endpoint of E; this gives the factorised
quantity C0(y) * D0(y, E).  For convex g the tangent lies below g (upper
bound on B), for concave g above it (lower bound).
"""
from __future__ import annotations

import math

from .core import pb_quadrature
from .gauss import nu_prime
from .model import (
    HalfLine,
    Interval,
    PBValue,
    PowerAlpha,
    PowerMinusQuad,
    Problem,
    UnsupportedDomain,
    UnsupportedDrift,
    Zero,
)

EPS = 1e-8
Y_TOL = 1e-6
_GOLD = 0.3819660112501051
_N_COARSE = 41


def tangent_factors(y: float, x: float, a: float, b: float, c: float, lam: float) -> tuple[float, float]:
    """Return (C0(y), D0(y, [a, b]))."""
    ay = abs(y)
    c0 = lam * c * ay ** (lam - 1.0) * math.copysign(1.0, y)
    C0 = math.exp((lam - 1.0) * c * ay ** lam)
    D0 = nu_prime(b - x, c0) + nu_prime(-(a + x), -c0)
    return C0, D0


def _objective(x, a, b, c, lam):
    def F(y):
        C0, D0 = tangent_factors(y, x, a, b, c, lam)
        return C0 * D0

    return F


def _golden(F, lo, hi, sign):
    """Optimise sign*F on [lo, hi]: coarse scan, then golden section."""
    if hi <= lo:
        v = F(lo)
        return lo, v
    ys = [lo + (hi - lo) * i / (_N_COARSE - 1) for i in range(_N_COARSE)]
    vals = [sign * F(y) for y in ys]
    i = min(range(_N_COARSE), key=lambda j: vals[j])
    p = ys[max(i - 1, 0)]
    q = ys[min(i + 1, _N_COARSE - 1)]
    best_y, best_v = ys[i], vals[i]
    c1 = p + _GOLD * (q - p)
    c2 = q - _GOLD * (q - p)
    f1, f2 = sign * F(c1), sign * F(c2)
    while q - p > Y_TOL:
        if f1 <= f2:
            q, c2, f2 = c2, c1, f1
            c1 = p + _GOLD * (q - p)
            f1 = sign * F(c1)
        else:
            p, c1, f1 = c1, c2, f2
            c2 = q - _GOLD * (q - p)
            f2 = sign * F(c2)
    for y, v in ((c1, f1), (c2, f2)):
        if v < best_v:
            best_y, best_v = y, v
    return best_y, sign * best_v


def _pieces(a, b):
    """Search sets [a, b] minus (-EPS, EPS)."""
    out = []
    if a < -EPS:
        out.append((a, min(b, -EPS)))
    if b > EPS:
        out.append((max(a, EPS), b))
    return out


def upper_bound_convex(x: float, a: float, b: float, c: float, lam: float) -> PBValue:
    """min over y in E minus {0} of C0(y) D0(y, E), valid for lam >= 1."""
    if not (a < b and 0.0 <= x <= b - a and c > 0.0 and lam >= 1.0):
        raise ValueError("need a < b, 0 <= x <= b - a, c > 0, lam >= 1")
    if b <= 0.0:
        a, b = -b, -a
    F = _objective(x, a, b, c, lam)
    cands = []
    for lo, hi in _pieces(a, b):
        cands.append(_golden(F, lo, hi, 1.0)[1])
        cands.append(F(lo))
        cands.append(F(hi))
    return PBValue(min(cands), 0.0, "bound", [])


def lower_bound_concave(x: float, a: float, b: float, c: float, lam: float) -> PBValue:
    """Tangent lower bound for 0 < lam < 1, split at 0 when E straddles it."""
    if not (a < b and 0.0 <= x <= b - a and c > 0.0 and 0.0 < lam < 1.0):
        raise ValueError("need a < b, 0 <= x <= b - a, c > 0, 0 < lam < 1")
    if a * b >= 0.0:
        subs = [(a, b)]
    else:
        subs = [(a, 0.0), (0.0, b)]
    best = 0.0
    for lo, hi in subs:
        if x >= hi - lo:
            continue  # B(x, [lo, hi]) = 0 there
        F = _objective(x, lo, hi, c, lam)
        for plo, phi_ in _pieces(lo, hi):
            best = max(best, _golden(F, plo, phi_, -1.0)[1], F(plo), F(phi_))
    return PBValue(best, 0.0, "bound", [])


def drift_max(drift, alpha: float, a: float, b: float) -> float:
    """max of h over [a, b] with 0 <= a < b <= inf."""
    if isinstance(drift, Zero):
        return 0.0
    if isinstance(drift, PowerAlpha):
        return drift.h(b, alpha) if math.isfinite(b) else math.inf
    c, lam = drift.c, drift.lam
    if lam > 2.0 or (lam == 2.0 and c > 1.0):
        if not math.isfinite(b):
            return math.inf
    pts = [a]
    if math.isfinite(b):
        pts.append(b)
    if lam != 2.0:
        ts = (lam * c / 2.0) ** (1.0 / (2.0 - lam))
        if a < ts < b:
            pts.append(ts)
    return max(drift.h(t, alpha) for t in pts)


def _value(problem: Problem, mc_cfg=None) -> PBValue:
    """Deterministic value when available, otherwise a Monte Carlo estimate."""
    from .closed_forms import bm1_constructive

    if problem.alpha == 2.0:
        return pb_quadrature(problem)
    if (
        problem.alpha == 1.0
        and isinstance(problem.drift, PowerAlpha)
        and isinstance(problem.domain, HalfLine)
    ):
        return bm1_constructive(problem.x, problem.drift.c)
    from . import mc

    est = mc.mc_pb(problem, mc_cfg or mc.MCConfig())
    return PBValue(est.value, est.stderr, "mc", ["mc_based"])


def _halfline_finite(drift, alpha) -> bool:
    if isinstance(drift, PowerAlpha):
        return True
    if isinstance(drift, PowerMinusQuad):
        return alpha == 2.0 and (drift.lam > 2.0 or (drift.lam == 2.0 and drift.c > 1.0))
    return False


def sandwich_bounds(problem: Problem, mc_cfg=None) -> tuple[PBValue, PBValue]:
    """e^(-M) B_alpha(x, E) <= B_alpha^h(x, E) <= min(B^h(x, [0, inf)), B^h(0, E))."""
    dom = problem.domain
    if dom.lo < 0.0:
        raise UnsupportedDomain("sandwich bounds need E inside [0, inf)")
    if isinstance(problem.drift, PowerMinusQuad) and problem.alpha != 2.0:
        raise UnsupportedDrift("the c|t|^lam - t^2 family is used with alpha = 2 only")
    M = drift_max(problem.drift, problem.alpha, dom.lo, dom.hi)
    flags_lo: list[str] = []
    if math.isinf(M):
        lower = PBValue(0.0, 0.0, "bound", ["unbounded_drift"])
    else:
        base = _value(Problem(problem.alpha, Zero(), dom, problem.x), mc_cfg)
        flags_lo = [f for f in base.flags if f == "mc_based"]
        lower = PBValue(math.exp(-M) * base.value, math.exp(-M) * base.err_est, "bound", flags_lo)
    cands = []
    if _halfline_finite(problem.drift, problem.alpha):
        cands.append(_value(Problem(problem.alpha, problem.drift, HalfLine(), problem.x), mc_cfg))
    if isinstance(dom, Interval):
        cands.append(_value(problem.with_x(0.0), mc_cfg))
    if not cands:
        return lower, PBValue(math.inf, 0.0, "bound", ["unbounded"])
    best = min(cands, key=lambda v: v.value)
    flags_up = sorted({f for v in cands for f in v.flags if f == "mc_based"})
    return lower, PBValue(best.value, best.err_est, "bound", flags_up)
