"""Adaptive one-dimensional integration.

The core is a globally adaptive Gauss-Kronrod 7/15 scheme (the interval with
the largest error estimate is bisected next).  Wrappers map the integral shapes
that occur in this package onto it: e^z-weighted half-lines, Gaussian-weighted
lines and integrable t^(-1/2) endpoint singularities.
"""
from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from typing import Callable

from .gauss import phi
from .model import TailNotDecaying

Func = Callable[[float], float]

# Kronrod abscissae (positive half, descending) and weights; Gauss weights for
# the embedded 7-point rule sit on the odd-indexed Kronrod nodes.
_XGK = (
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
)
_WGK = (
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
)
_WG = (
    0.129484966168869693270611432679082,
    0.279705391489276667901467768170348,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
)


@dataclass(frozen=True)
class QuadConfig:
    abs_tol: float = 1e-9
    rel_tol: float = 1e-8
    max_subdivisions: int = 200
    tail_start: float = 30.0

    def __post_init__(self):
        if not (self.abs_tol > 0 and self.rel_tol > 0):
            raise ValueError("tolerances must be positive")
        if self.max_subdivisions < 1:
            raise ValueError("max_subdivisions must be >= 1")


@dataclass
class QuadResult:
    value: float
    err_est: float
    evaluations: int
    converged: bool

    def __add__(self, other: "QuadResult") -> "QuadResult":
        return QuadResult(
            self.value + other.value,
            self.err_est + other.err_est,
            self.evaluations + other.evaluations,
            self.converged and other.converged,
        )

    def scaled(self, k: float) -> "QuadResult":
        return QuadResult(k * self.value, abs(k) * self.err_est, self.evaluations, self.converged)


ZERO = QuadResult(0.0, 0.0, 0, True)


def _gk15(f: Func, a: float, b: float) -> tuple[float, float]:
    centre = 0.5 * (a + b)
    half = 0.5 * (b - a)
    fc = f(centre)
    resk = fc * _WGK[7]
    resg = fc * _WG[3]
    resabs = abs(resk)
    fv = [0.0] * 15
    fv[7] = fc
    for j in range(7):
        dx = half * _XGK[j]
        f1 = f(centre - dx)
        f2 = f(centre + dx)
        fv[j] = f1
        fv[14 - j] = f2
        resk += _WGK[j] * (f1 + f2)
        resabs += _WGK[j] * (abs(f1) + abs(f2))
        if j % 2 == 1:
            resg += _WG[j // 2] * (f1 + f2)
    mean = 0.5 * resk
    resasc = _WGK[7] * abs(fc - mean)
    for j in range(7):
        resasc += _WGK[j] * (abs(fv[j] - mean) + abs(fv[14 - j] - mean))
    result = resk * half
    resasc *= abs(half)
    resabs *= abs(half)
    err = abs((resk - resg) * half)
    if resasc != 0.0 and err != 0.0:
        err = resasc * min(1.0, (200.0 * err / resasc) ** 1.5)
    if resabs > 2.2250738585072014e-308 / (50 * 2.22e-16):
        err = max(50 * 2.220446049250313e-16 * resabs, err)
    return result, err


def integrate_finite(f: Func, a: float, b: float, cfg: QuadConfig = QuadConfig()) -> QuadResult:
    """Integrate f over [a, b] to max(abs_tol, rel_tol*|I|).

    When the subdivision budget runs out the best estimate is returned with
    ``converged=False`` instead of raising.
    """
    if b < a:
        r = integrate_finite(f, b, a, cfg)
        return r.scaled(-1.0)
    if b == a:
        return QuadResult(0.0, 0.0, 0, True)
    val, err = _gk15(f, a, b)
    heap = [(-err, a, b, val)]
    total, total_err = val, err
    evals = 15
    n_sub = 1
    while True:
        tol = max(cfg.abs_tol, cfg.rel_tol * abs(total))
        if total_err <= tol:
            return QuadResult(total, total_err, evals, True)
        if n_sub >= cfg.max_subdivisions:
            return QuadResult(total, total_err, evals, False)
        neg_e, lo, hi, v = heapq.heappop(heap)
        mid = 0.5 * (lo + hi)
        if not (lo < mid < hi):
            # interval cannot be split further at double precision
            return QuadResult(total, total_err, evals, False)
        v1, e1 = _gk15(f, lo, mid)
        v2, e2 = _gk15(f, mid, hi)
        evals += 30
        n_sub += 1
        total += v1 + v2 - v
        total_err += e1 + e2 + neg_e
        heapq.heappush(heap, (-e1, lo, mid, v1))
        heapq.heappush(heap, (-e2, mid, hi, v2))
        if n_sub % 16 == 0:
            # resum to keep cancellation drift out of the running totals
            total = math.fsum(item[3] for item in heap)
            total_err = math.fsum(-item[0] for item in heap)


def integrate_pieces(f: Func, points, cfg: QuadConfig = QuadConfig()) -> QuadResult:
    """Integrate over consecutive [p_i, p_(i+1)] of a sorted breakpoint list."""
    pts = sorted(points)
    out = ZERO
    for lo, hi in zip(pts[:-1], pts[1:]):
        if hi > lo:
            out = out + integrate_finite(f, lo, hi, cfg)
    return out


def integrate_exp_left(f: Func, cfg: QuadConfig = QuadConfig(), breaks=()) -> QuadResult:
    """∫_{-inf}^0 e^z f(z) dz computed as ∫_0^1 f(ln u) du.

    ``breaks`` are z-locations (< 0) of known kinks; they become split points.
    """

    def g(u: float) -> float:
        if u <= 0.0:
            return 0.0
        return f(math.log(u))

    # a ladder of deep levels keeps features far out in the left tail from
    # slipping between the nodes of the first rule on [0, 1]
    ladder = [-float(2 ** k) for k in range(7)]
    pts = [0.0, 1.0] + [math.exp(z) for z in list(breaks) + ladder if z < 0.0]
    return integrate_pieces(g, pts, cfg)


def integrate_exp_right(
    f: Func, decay_hint: float, cfg: QuadConfig = QuadConfig(), breaks=()
) -> QuadResult:
    """∫_0^inf e^z f(z) dz by truncation with panel doubling.

    The caller asserts |e^z f(z)| <= e^(-z/decay_hint) beyond a scale of
    decay_hint; integration stops once a panel contributes less than
    abs_tol/10, or at tail_start*decay_hint.
    """
    if decay_hint <= 0:
        raise ValueError("decay_hint must be positive")

    def g(z: float) -> float:
        v = f(z)
        if v == 0.0:
            return 0.0
        return math.exp(z) * v

    cap = cfg.tail_start * decay_hint
    bk = sorted(z for z in breaks if z > 0.0)
    lo, hi = 0.0, min(decay_hint, cap)
    out = ZERO
    prev_panel = None
    while True:
        pts = [lo, hi] + [z for z in bk if lo < z < hi]
        panel = integrate_pieces(g, pts, cfg)
        out = out + panel
        size = abs(panel.value)
        if not math.isfinite(size):
            raise TailNotDecaying("integrand not finite on the right tail")
        if prev_panel is not None and lo >= decay_hint and size > 2.0 * prev_panel + cfg.abs_tol:
            raise TailNotDecaying("right-tail panel contribution grew")
        if size < cfg.abs_tol / 10.0 and hi >= max(bk, default=0.0):
            break
        if hi >= cap:
            break
        prev_panel = size
        lo, hi = hi, min(2.0 * hi, cap)
    return out


def integrate_gaussian(g: Func, cfg: QuadConfig = QuadConfig(), breaks=()) -> QuadResult:
    """E[g(N)] for N ~ N(0,1) on the window [-8.5, 8.5]."""
    pts = [-8.5, 8.5] + [u for u in breaks if -8.5 < u < 8.5]
    return integrate_pieces(lambda u: phi(u) * g(u), pts, cfg)


def integrate_sqrt_singular(f: Func, x: float, cfg: QuadConfig = QuadConfig()) -> QuadResult:
    """∫_0^x f(t) dt for f ~ t^(-1/2) at 0, via t = s^2."""
    if x <= 0.0:
        return QuadResult(0.0, 0.0, 0, True)
    return integrate_finite(lambda s: 2.0 * s * f(s * s) if s > 0.0 else _limit0(f), 0.0, math.sqrt(x), cfg)


def _limit0(f: Func) -> float:
    # 2 s f(s^2) at s = 0; GK nodes never hit the endpoint, kept for safety
    s = 1e-300
    return 2.0 * s * f(s * s)
