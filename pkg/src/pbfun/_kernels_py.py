"""Pure-Python reference implementation of the hot kernels.

The Cython module ``_kernels`` mirrors these functions one for one; the
dispatcher in :mod:`pbfun.kernels` picks whichever is importable.

Curve convention: on a piece of t >= 0 the sojourn set is {t : f(t) < 0} with
f(t) = C t^lam - s t + z, C > 0, lam > 0.
"""
from __future__ import annotations

import math

import numpy as np

INF = math.inf
ROOT_TOL = 1e-12
U_TOL = 1e-10
U_WINDOW = 8.5
MAX_CROSSINGS = 16
_GOLD = 0.3819660112501051


def _f(t, z, s, C, lam):
    return C * t ** lam - s * t + z


def _f_at_inf_negative(z, s, C, lam):
    # sign of lim_{t->inf} f(t) < 0
    if lam > 1.0:
        return False
    if lam == 1.0:
        if C != s:
            return C < s
        return z < 0.0
    return s > 0.0


def _root(p, q, fp, z, s, C, lam):
    """Root of the monotone segment [p, q] on which f changes sign."""
    if lam == 2.0:
        disc = s * s - 4.0 * C * z
        if disc < 0.0:
            disc = 0.0
        sq = math.sqrt(disc)
        qq = 0.5 * (s + math.copysign(sq, s))
        cands = []
        if qq != 0.0:
            cands.append(qq / C)
            cands.append(z / qq)
        else:
            cands.append(0.0)
        best = min(cands, key=lambda r: max(p - r, r - q, 0.0))
        return min(max(best, p), q)
    if lam == 1.0:
        r = -z / (C - s)
        return min(max(r, p), q)
    lo, hi = p, q
    neg_lo = fp < 0.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if hi - lo <= ROOT_TOL * (1.0 + abs(lo)) or mid == lo or mid == hi:
            break
        if (_f(mid, z, s, C, lam) < 0.0) == neg_lo:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _segment(p, q, z, s, C, lam):
    """Measure of {f < 0} on a monotone segment [p, q], q possibly infinite."""
    fp = _f(p, z, s, C, lam)
    if q == INF:
        neg_q = _f_at_inf_negative(z, s, C, lam)
        if neg_q:
            return INF
        if fp >= 0.0:
            return 0.0
        step = max(1.0, p)
        q = p + step
        while _f(q, z, s, C, lam) < 0.0:
            step *= 2.0
            q = p + step
        return _root(p, q, fp, z, s, C, lam) - p
    fq = _f(q, z, s, C, lam)
    neg_p = fp < 0.0
    neg_q = fq < 0.0
    if neg_p and neg_q:
        return q - p
    if not neg_p and not neg_q:
        return 0.0
    r = _root(p, q, fp, z, s, C, lam)
    return r - p if neg_p else q - r


def _half(z, s, C, lam, lo, hi):
    """Sojourn measure on [lo, hi] subset of [0, inf)."""
    if hi <= lo:
        return 0.0
    cuts = [lo]
    if s > 0.0 and lam != 1.0:
        ts = (s / (lam * C)) ** (1.0 / (lam - 1.0))
        if lo < ts < hi:
            cuts.append(ts)
    cuts.append(hi)
    total = 0.0
    for p, q in zip(cuts[:-1], cuts[1:]):
        total += _segment(p, q, z, s, C, lam)
    return total


def sojourn_length(z, s, C, lam, a, b):
    """mes{t in [a, b] : C|t|^lam - s t + z < 0}; b may be +inf."""
    total = 0.0
    if b > 0.0:
        total += _half(z, s, C, lam, max(a, 0.0), b)
    if a < 0.0:
        total += _half(z, -s, C, lam, max(-b, 0.0), -a)
    return total


def _Phi(u):
    return 0.5 * math.erfc(-u / math.sqrt(2.0))


def _mass(lo, hi):
    if hi <= lo:
        return 0.0
    if lo >= 0.0:
        return max(0.5 * math.erfc(lo / math.sqrt(2.0)) - 0.5 * math.erfc(hi / math.sqrt(2.0)), 0.0)
    if hi <= 0.0:
        return max(_Phi(hi) - _Phi(lo), 0.0)
    return max(1.0 - 0.5 * math.erfc(hi / math.sqrt(2.0)) - _Phi(lo), 0.0)


def _golden_max(fn, p, q, inclusive=False):
    """Golden-section search for a maximum of fn on [p, q].

    Stops as soon as fn > 0 (or fn >= 0 when ``inclusive``).
    """

    def hit(v):
        return v >= 0.0 if inclusive else v > 0.0

    c1 = p + _GOLD * (q - p)
    c2 = q - _GOLD * (q - p)
    f1, f2 = fn(c1), fn(c2)
    for _ in range(80):
        if hit(f1) or hit(f2) or q - p < U_TOL:
            break
        if f1 >= f2:
            q, c2, f2 = c2, c1, f1
            c1 = p + _GOLD * (q - p)
            f1 = fn(c1)
        else:
            p, c1, f1 = c1, c2, f2
            c2 = q - _GOLD * (q - p)
            f2 = fn(c2)
    if f1 >= f2:
        return c1, f1
    return c2, f2


def prob_exceeds(z, x, C, lam, a, b, u_lo=-INF, u_hi=INF, n_scan=257, window=U_WINDOW):
    """P{N in (u_lo, u_hi), L(z, N) > x} where L uses s = sqrt2 * u.

    Returns -1.0 when more than MAX_CROSSINGS sign changes are detected so the
    caller can retry with a denser scan.  The scan covers the part of
    (u_lo, u_hi) inside [-window, window]; an end beyond the window is treated
    as infinite.
    """
    r2 = math.sqrt(2.0)
    lo_open = u_lo <= -window
    hi_open = u_hi >= window
    ulo = -window if lo_open else u_lo
    uhi = window if hi_open else u_hi
    if uhi <= ulo:
        return 0.0

    def d(u):
        return sojourn_length(z, r2 * u, C, lam, a, b) - x

    us = [ulo + (uhi - ulo) * i / (n_scan - 1) for i in range(n_scan)]
    vals = [d(u) + x for u in us]
    pos = [v - x > 0.0 for v in vals]

    def boundary(ua, ub):
        # pos differs at ua and ub
        pa = d(ua) > 0.0
        while ub - ua > U_TOL:
            um = 0.5 * (ua + ub)
            if (d(um) > 0.0) == pa:
                ua = um
            else:
                ub = um
        return 0.5 * (ua + ub)

    # refine narrow positive bumps and narrow dips missed by the grid
    extra = []
    for i in range(1, n_scan - 1):
        v, vl, vr = vals[i], vals[i - 1], vals[i + 1]
        if not pos[i] and v > 0.0:
            if v >= vl and v >= vr and (v > vl or v > vr):
                um, fm = _golden_max(d, us[i - 1], us[i + 1])
                if fm > 0.0:
                    extra.append((um, fm + x))
        elif pos[i] and v < INF:
            if v <= vl and v <= vr and (v < vl or v < vr):
                um, fm = _golden_max(lambda u: -d(u), us[i - 1], us[i + 1], True)
                if fm >= 0.0:
                    extra.append((um, x - fm))
    if extra:
        merged = sorted(list(zip(us, vals)) + extra)
        us = [p[0] for p in merged]
        vals = [p[1] for p in merged]
        pos = [v - x > 0.0 for v in vals]
    n = len(us)
    changes = sum(1 for i in range(n - 1) if pos[i] != pos[i + 1])
    if changes > MAX_CROSSINGS:
        return -1.0
    total = 0.0
    start = None
    if pos[0]:
        start = -INF if lo_open else ulo
    for i in range(n - 1):
        if pos[i] != pos[i + 1]:
            ub = boundary(us[i], us[i + 1])
            if pos[i]:
                total += _mass(start, ub)
                start = None
            else:
                start = ub
    if start is not None:
        total += _mass(start, INF if hi_open else uhi)
    return min(max(total, 0.0), 1.0)


class TopK:
    """Keeps the k largest values pushed so far."""

    def __init__(self, k):
        self.k = int(k)
        self.buf = np.empty(0)

    def push_array(self, values):
        values = np.asarray(values, dtype=float)
        if self.buf.size >= self.k:
            thr = self.kth()
            values = values[values > thr]
            if values.size == 0:
                return
        merged = np.concatenate((self.buf, values))
        if merged.size > self.k:
            merged = np.partition(merged, merged.size - self.k)[merged.size - self.k:]
        self.buf = merged

    def kth(self):
        if self.buf.size < self.k:
            return -INF
        return float(self.buf.min())

    def count(self):
        return int(self.buf.size)

    def values(self):
        """Stored values, largest first."""
        return np.sort(self.buf)[::-1]


def walk_block(normals, m0, sd, drift_step):
    """Random walk m_j = m0 + sum_{i<=j} (sd * n_i - drift_step)."""
    return m0 + np.cumsum(sd * np.asarray(normals) - drift_step)


def bridge_max(left, right, uniforms, var_step):
    """Exact maxima of Brownian bridges joining consecutive walk values.

    left[i], right[i] are the cell end values, var_step the variance of one
    increment.
    """
    left = np.asarray(left)
    right = np.asarray(right)
    diff = right - left
    return 0.5 * (left + right + np.sqrt(diff * diff - 2.0 * var_step * np.log(uniforms)))
