"""Standard normal functions and the exponential-tilt functionals built on them.

Scalar routines use :mod:`math` (``erfc`` keeps relative accuracy far into the
upper tail); the ``*_vec`` variants accept numpy arrays.
"""
from __future__ import annotations

import math

import numpy as np
from scipy import special

SQRT2 = math.sqrt(2.0)
INV_SQRT2PI = 1.0 / math.sqrt(2.0 * math.pi)

# beyond this exponent e^E * Psi(y) is assembled from the scaled complement
_LOG_SWITCH = 30.0


def phi(u: float) -> float:
    """Standard normal density."""
    return INV_SQRT2PI * math.exp(-0.5 * u * u)


def Psi(u: float) -> float:
    """Standard normal survival function, P{N > u}."""
    return 0.5 * math.erfc(u / SQRT2)


def Phi(u: float) -> float:
    """Standard normal distribution function, P{N <= u}."""
    return 0.5 * math.erfc(-u / SQRT2)


def scaled_Psi(u: float) -> float:
    """Return e^(u^2/2) * Psi(u); finite for every real u >= 0 and slowly varying."""
    return 0.5 * float(special.erfcx(u / SQRT2))


def log_Psi(u: float) -> float:
    return float(special.log_ndtr(-u))


def exp_times_Psi(expo: float, y: float) -> float:
    """Evaluate e^expo * Psi(y) without intermediate overflow or underflow."""
    if y > 0.0 and (expo > _LOG_SWITCH or y > 30.0):
        return math.exp(expo - 0.5 * y * y) * scaled_Psi(y)
    if expo > 700.0:
        return math.exp(expo + log_Psi(y))
    return math.exp(expo) * Psi(y)


def normal_mass(lo: float, hi: float) -> float:
    """P{lo < N < hi}, accurate when both ends sit in the same tail."""
    if hi <= lo:
        return 0.0
    if lo >= 0.0:
        return max(Psi(lo) - Psi(hi), 0.0)
    if hi <= 0.0:
        return max(Phi(hi) - Phi(lo), 0.0)
    return max(1.0 - Psi(hi) - Phi(lo), 0.0)


def nu(m: float, c: float) -> float:
    """e^(m^2 - c|m|) * Psi((c - 2m)/sqrt2)."""
    return exp_times_Psi(m * m - c * abs(m), (c - 2.0 * m) / SQRT2)


def nu_prime(m: float, c: float) -> float:
    """e^(m^2 - c m) * Psi((c - 2m)/sqrt2); identical to :func:`nu` for m >= 0."""
    if m >= 0.0:
        return nu(m, c)
    return exp_times_Psi(m * m - c * m, (c - 2.0 * m) / SQRT2)


def phi_vec(u):
    u = np.asarray(u, dtype=float)
    return INV_SQRT2PI * np.exp(-0.5 * u * u)


def Psi_vec(u):
    return 0.5 * special.erfc(np.asarray(u, dtype=float) / SQRT2)


def Phi_vec(u):
    return 0.5 * special.erfc(-np.asarray(u, dtype=float) / SQRT2)
