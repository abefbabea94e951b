# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels; a line-for-line typed port of ``_kernels_py``."""
import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, pow, erfc, log, fabs, copysign, INFINITY, fmin, fmax

cnp.import_array()

cdef double ROOT_TOL = 1e-12
cdef double U_TOL = 1e-10
cdef int MAX_CROSSINGS = 16
cdef double GOLD = 0.3819660112501051
cdef double SQRT2 = 1.4142135623730951


cdef inline double _f(double t, double z, double s, double C, double lam) nogil:
    return C * pow(t, lam) - s * t + z


cdef inline bint _f_at_inf_negative(double z, double s, double C, double lam) nogil:
    if lam > 1.0:
        return False
    if lam == 1.0:
        if C != s:
            return C < s
        return z < 0.0
    return s > 0.0


cdef double _root(double p, double q, double fp, double z, double s, double C, double lam) nogil:
    cdef double disc, sq, qq, r1, r2, d1, d2, best, lo, hi, mid
    cdef bint neg_lo
    cdef int it
    if lam == 2.0:
        disc = s * s - 4.0 * C * z
        if disc < 0.0:
            disc = 0.0
        sq = sqrt(disc)
        qq = 0.5 * (s + copysign(sq, s))
        if qq != 0.0:
            r1 = qq / C
            r2 = z / qq
            d1 = fmax(fmax(p - r1, r1 - q), 0.0)
            d2 = fmax(fmax(p - r2, r2 - q), 0.0)
            best = r1 if d1 <= d2 else r2
        else:
            best = 0.0
        return fmin(fmax(best, p), q)
    if lam == 1.0:
        return fmin(fmax(-z / (C - s), p), q)
    lo = p
    hi = q
    neg_lo = fp < 0.0
    for it in range(200):
        mid = 0.5 * (lo + hi)
        if hi - lo <= ROOT_TOL * (1.0 + fabs(lo)) or mid == lo or mid == hi:
            break
        if (_f(mid, z, s, C, lam) < 0.0) == neg_lo:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


cdef double _segment(double p, double q, double z, double s, double C, double lam) nogil:
    cdef double fp = _f(p, z, s, C, lam)
    cdef double fq, step, r
    cdef bint neg_p, neg_q
    if q == INFINITY:
        if _f_at_inf_negative(z, s, C, lam):
            return INFINITY
        if fp >= 0.0:
            return 0.0
        step = fmax(1.0, p)
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
    if neg_p:
        return r - p
    return q - r


cdef double _half(double z, double s, double C, double lam, double lo, double hi) nogil:
    cdef double ts
    if hi <= lo:
        return 0.0
    if s > 0.0 and lam != 1.0:
        ts = pow(s / (lam * C), 1.0 / (lam - 1.0))
        if lo < ts < hi:
            return _segment(lo, ts, z, s, C, lam) + _segment(ts, hi, z, s, C, lam)
    return _segment(lo, hi, z, s, C, lam)


cdef double _sojourn(double z, double s, double C, double lam, double a, double b) nogil:
    cdef double total = 0.0
    if b > 0.0:
        total += _half(z, s, C, lam, fmax(a, 0.0), b)
    if a < 0.0:
        total += _half(z, -s, C, lam, fmax(-b, 0.0), -a)
    return total


def sojourn_length(double z, double s, double C, double lam, double a, double b):
    """mes{t in [a, b] : C|t|^lam - s t + z < 0}; b may be +inf."""
    return _sojourn(z, s, C, lam, a, b)


cdef inline double _Phi(double u) nogil:
    return 0.5 * erfc(-u / SQRT2)


cdef inline double _Psi(double u) nogil:
    return 0.5 * erfc(u / SQRT2)


cdef double _mass(double lo, double hi) nogil:
    if hi <= lo:
        return 0.0
    if lo >= 0.0:
        return fmax(_Psi(lo) - _Psi(hi), 0.0)
    if hi <= 0.0:
        return fmax(_Phi(hi) - _Phi(lo), 0.0)
    return fmax(1.0 - _Psi(hi) - _Phi(lo), 0.0)


cdef struct Ctx:
    double z
    double x
    double C
    double lam
    double a
    double b


cdef inline double _d(Ctx* c, double u) nogil:
    return _sojourn(c.z, SQRT2 * u, c.C, c.lam, c.a, c.b) - c.x


cdef double _boundary(Ctx* c, double ua, double ub) nogil:
    cdef bint pa = _d(c, ua) > 0.0
    cdef double um
    while ub - ua > U_TOL:
        um = 0.5 * (ua + ub)
        if (_d(c, um) > 0.0) == pa:
            ua = um
        else:
            ub = um
    return 0.5 * (ua + ub)


cdef inline bint _hit(double v, bint inclusive) nogil:
    if inclusive:
        return v >= 0.0
    return v > 0.0


cdef void _golden_max(Ctx* c, double p, double q, double sign, bint inclusive,
                      double* um, double* fm) nogil:
    # maximises sign * d(u); sign = -1 searches for the deepest dip
    cdef double c1 = p + GOLD * (q - p)
    cdef double c2 = q - GOLD * (q - p)
    cdef double f1 = sign * _d(c, c1)
    cdef double f2 = sign * _d(c, c2)
    cdef int it
    for it in range(80):
        if _hit(f1, inclusive) or _hit(f2, inclusive) or q - p < U_TOL:
            break
        if f1 >= f2:
            q = c2
            c2 = c1
            f2 = f1
            c1 = p + GOLD * (q - p)
            f1 = sign * _d(c, c1)
        else:
            p = c1
            c1 = c2
            f1 = f2
            c2 = q - GOLD * (q - p)
            f2 = sign * _d(c, c2)
    if f1 >= f2:
        um[0] = c1
        fm[0] = f1
    else:
        um[0] = c2
        fm[0] = f2


def prob_exceeds(double z, double x, double C, double lam, double a, double b,
                 double u_lo=-INFINITY, double u_hi=INFINITY, int n_scan=257,
                 double window=8.5):
    """P{N in (u_lo, u_hi), L(z, N) > x}; -1.0 signals too many crossings."""
    cdef Ctx ctx
    ctx.z = z
    ctx.x = x
    ctx.C = C
    ctx.lam = lam
    ctx.a = a
    ctx.b = b
    cdef bint lo_open = u_lo <= -window
    cdef bint hi_open = u_hi >= window
    cdef double ulo = -window if lo_open else u_lo
    cdef double uhi = window if hi_open else u_hi
    if uhi <= ulo:
        return 0.0
    cdef cnp.ndarray[double] us = np.empty(2 * n_scan)
    cdef cnp.ndarray[double] vals = np.empty(2 * n_scan)
    cdef cnp.ndarray[double] ext_u = np.empty(n_scan)
    cdef cnp.ndarray[double] ext_v = np.empty(n_scan)
    cdef int i, j, k, n, n_ext = 0, changes = 0
    cdef double um = 0.0, fm = 0.0, total = 0.0, start, ub, v, vl, vr
    cdef bint have_start
    for i in range(n_scan):
        us[i] = ulo + (uhi - ulo) * i / (n_scan - 1)
        vals[i] = _d(&ctx, us[i])
    for i in range(1, n_scan - 1):
        v = vals[i]
        vl = vals[i - 1]
        vr = vals[i + 1]
        if v <= 0.0 and v + x > 0.0:
            if v >= vl and v >= vr and (v > vl or v > vr):
                _golden_max(&ctx, us[i - 1], us[i + 1], 1.0, False, &um, &fm)
                if fm > 0.0:
                    ext_u[n_ext] = um
                    ext_v[n_ext] = fm
                    n_ext += 1
        elif v > 0.0 and v < INFINITY:
            if v <= vl and v <= vr and (v < vl or v < vr):
                _golden_max(&ctx, us[i - 1], us[i + 1], -1.0, True, &um, &fm)
                if fm >= 0.0:
                    ext_u[n_ext] = um
                    ext_v[n_ext] = -fm
                    n_ext += 1
    n = n_scan
    if n_ext > 0:
        # merge the sorted scan with the sorted extra points
        order_u = np.concatenate((us[:n_scan], ext_u[:n_ext]))
        order_v = np.concatenate((vals[:n_scan], ext_v[:n_ext]))
        idx = np.argsort(order_u, kind="stable")
        n = n_scan + n_ext
        us[:n] = order_u[idx]
        vals[:n] = order_v[idx]
    for i in range(n - 1):
        if (vals[i] > 0.0) != (vals[i + 1] > 0.0):
            changes += 1
    if changes > MAX_CROSSINGS:
        return -1.0
    have_start = vals[0] > 0.0
    start = -INFINITY if lo_open else ulo
    for i in range(n - 1):
        if (vals[i] > 0.0) != (vals[i + 1] > 0.0):
            ub = _boundary(&ctx, us[i], us[i + 1])
            if vals[i] > 0.0:
                total += _mass(start, ub)
                have_start = False
            else:
                start = ub
                have_start = True
    if have_start:
        total += _mass(start, INFINITY if hi_open else uhi)
    return fmin(fmax(total, 0.0), 1.0)


cdef void _select_top(double* buf, Py_ssize_t n, Py_ssize_t k) nogil:
    """Reorder buf[:n] so that buf[:k] holds the k largest values (quickselect)."""
    cdef Py_ssize_t lo = 0, hi = n - 1, i, j, mid
    cdef double pivot, tmp
    while lo < hi:
        mid = lo + (hi - lo) // 2
        pivot = buf[mid]
        i = lo
        j = hi
        while i <= j:
            while buf[i] > pivot:
                i += 1
            while buf[j] < pivot:
                j -= 1
            if i <= j:
                tmp = buf[i]
                buf[i] = buf[j]
                buf[j] = tmp
                i += 1
                j -= 1
        if k - 1 <= j:
            hi = j
        elif k - 1 >= i:
            lo = i
        else:
            return


cdef class TopK:
    """Keeps the k largest values pushed so far.

    Candidates above the current threshold are appended to a buffer of size
    2k; a quickselect compacts the buffer back to k values when it fills.
    """
    cdef public int k
    cdef double[::1] buf
    cdef Py_ssize_t n
    cdef double thr
    cdef bint full

    def __init__(self, k):
        self.k = int(k)
        self.buf = np.empty(2 * max(self.k, 1))
        self.n = 0
        self.thr = -INFINITY
        self.full = False

    cdef void _compact(self) nogil:
        cdef Py_ssize_t i
        cdef double m
        _select_top(&self.buf[0], self.n, self.k)
        self.n = self.k
        m = self.buf[0]
        for i in range(1, self.k):
            if self.buf[i] < m:
                m = self.buf[i]
        self.thr = m
        self.full = True

    def push_array(self, values):
        cdef double[::1] v = np.ascontiguousarray(values, dtype=np.float64)
        cdef Py_ssize_t i, cap = self.buf.shape[0]
        cdef double x
        with nogil:
            for i in range(v.shape[0]):
                x = v[i]
                if self.full and x <= self.thr:
                    continue
                self.buf[self.n] = x
                self.n += 1
                if self.n == cap:
                    self._compact()
            if self.n > self.k:
                self._compact()
            elif self.n == self.k and not self.full:
                self._compact()

    def kth(self):
        if not self.full:
            return -INFINITY
        return self.thr

    def count(self):
        return self.n

    def values(self):
        """Stored values, largest first."""
        return np.sort(np.asarray(self.buf[:self.n]))[::-1].copy()


def walk_block(normals, double m0, double sd, double drift_step):
    """Random walk m_j = m0 + sum_{i<=j} (sd * n_i - drift_step)."""
    cdef double[::1] nv = np.ascontiguousarray(normals, dtype=np.float64)
    cdef Py_ssize_t i, n = nv.shape[0]
    out = np.empty(n)
    cdef double[::1] o = out
    cdef double m = m0
    with nogil:
        for i in range(n):
            m = m + (sd * nv[i] - drift_step)
            o[i] = m
    return out


def bridge_max(left, right, uniforms, double var_step):
    """Exact maxima of Brownian bridges joining consecutive walk values."""
    cdef double[::1] l = np.ascontiguousarray(left, dtype=np.float64)
    cdef double[::1] r = np.ascontiguousarray(right, dtype=np.float64)
    cdef double[::1] u = np.ascontiguousarray(uniforms, dtype=np.float64)
    cdef Py_ssize_t i, n = l.shape[0]
    out = np.empty(n)
    cdef double[::1] o = out
    cdef double dif
    with nogil:
        for i in range(n):
            dif = r[i] - l[i]
            o[i] = 0.5 * (l[i] + r[i] + sqrt(dif * dif - 2.0 * var_step * log(u[i])))
    return out
