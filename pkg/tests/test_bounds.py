import math

import numpy as np
import pytest
from scipy import stats

from pbfun.bounds import (
    drift_max,
    lower_bound_concave,
    sandwich_bounds,
    tangent_factors,
    upper_bound_convex,
)
from pbfun.core import pb_quadrature
from pbfun.model import HalfLine, Interval, PowerAlpha, PowerMinusQuad, Problem, UnsupportedDomain, Zero

SQRT2 = math.sqrt(2.0)


def nu_prime_ref(m, c):
    return math.exp(m * m - c * m) * stats.norm.sf((c - 2 * m) / SQRT2)


def ref(x, a, b, c, lam):
    return pb_quadrature(Problem(2.0, PowerMinusQuad(c, lam), Interval(a, b), x)).value


def test_tangent_factors_definition():
    y, x, a, b, c, lam = 1.3, 0.4, -1.0, 2.0, 2.0, 1.5
    C0, D0 = tangent_factors(y, x, a, b, c, lam)
    c0 = lam * c * y ** (lam - 1)
    assert C0 == pytest.approx(math.exp((lam - 1) * c * y ** lam), rel=1e-14)
    assert D0 == pytest.approx(nu_prime_ref(b - x, c0) + nu_prime_ref(-(a + x), -c0), rel=1e-12)


def test_lambda_one_two_point_structure():
    c, x = 1.5, 0.5
    d_plus = lambda a, b: nu_prime_ref(b - x, c) + nu_prime_ref(-(a + x), -c)
    d_minus = lambda a, b: nu_prime_ref(b - x, -c) + nu_prime_ref(-(a + x), c)
    assert upper_bound_convex(x, 1.0, 3.0, c, 1.0).value == pytest.approx(d_plus(1.0, 3.0), rel=1e-12)
    both = min(d_plus(-1.0, 2.0), d_minus(-1.0, 2.0))
    assert upper_bound_convex(x, -1.0, 2.0, c, 1.0).value == pytest.approx(both, rel=1e-12)


def test_upper_bound_dominates_and_tightens():
    xs = np.linspace(0.0, 3.5, 8)
    gaps = []
    for x in xs:
        up = upper_bound_convex(x, 1.0, 5.0, 1.0, 2.0).value
        true = ref(x, 1.0, 5.0, 1.0, 2.0)
        assert up >= true - 1e-6
        gaps.append(up - true)
    gap_small = upper_bound_convex(0.5, 1, 5, 1, 2).value - ref(0.5, 1, 5, 1, 2)
    gap_large = upper_bound_convex(3.5, 1, 5, 1, 2).value - ref(3.5, 1, 5, 1, 2)
    assert gap_large < gap_small


def test_upper_bound_nonincreasing_in_x():
    for a, b, c, lam in [(1, 5, 1, 2), (-1, 2, 2, 2), (-1, 1, 1, 1.5), (0.5, 3, 2, 1)]:
        vals = [upper_bound_convex(x, a, b, c, lam).value for x in np.linspace(0, b - a, 11)]
        assert all(q <= p * (1 + 1e-9) + 1e-12 for p, q in zip(vals, vals[1:]))


def test_upper_bound_reflected_interval():
    assert upper_bound_convex(0.3, -3.0, -1.0, 2.0, 2.0).value == pytest.approx(
        upper_bound_convex(0.3, 1.0, 3.0, 2.0, 2.0).value, rel=1e-12)


@pytest.mark.parametrize("a,b,c,x", [(1, 2, 1, 0.3), (1, 2, 1, 0.0), (0.5, 3, 2, 1.0), (-1, 2, 1, 0.5)])
def test_lower_bound_concave_below_reference(a, b, c, x):
    assert lower_bound_concave(x, a, b, c, 0.5).value <= ref(x, a, b, c, 0.5) + 1e-6


def test_lower_bound_half_interval_at_zero():
    # E = [0, b]: the search runs over (0, b] only and stays finite
    v = lower_bound_concave(0.2, 0.0, 1.5, 1.0, 0.5)
    assert math.isfinite(v.value) and v.value > 0
    assert v.value <= ref(0.2, 0.0, 1.5, 1.0, 0.5) + 1e-6


def test_lambda_continuity_near_one():
    # O(1)-sized values: absolute agreement within 1e-2
    for a, b, c, x in [(1, 2, 1, 0.3), (0.5, 2, 1, 0.5), (1, 2, 2, 0.5), (0.5, 1.5, 1, 0.2)]:
        lo = lower_bound_concave(x, a, b, c, 0.999).value
        up = upper_bound_convex(x, a, b, c, 1.0).value
        assert abs(lo - up) < 1e-2
    # larger value (about 42): the same closeness holds in relative terms
    lo = lower_bound_concave(0.5, 1, 3, 1, 0.999).value
    up = upper_bound_convex(0.5, 1, 3, 1, 1.0).value
    assert abs(lo - up) / up < 1e-2


def test_drift_max():
    assert drift_max(Zero(), 2.0, 0.0, 3.0) == 0.0
    assert drift_max(PowerMinusQuad(2, 2), 2.0, 0.0, 3.0) == pytest.approx(9.0)
    # stationary point of c t^lam - t^2 at t* = (lam c / 2)^(1/(2 - lam))
    c, lam = 2.0, 1.0
    ts = (lam * c / 2) ** (1 / (2 - lam))
    assert drift_max(PowerMinusQuad(c, lam), 2.0, 0.0, 3.0) == pytest.approx(c * ts - ts * ts)
    assert drift_max(PowerAlpha(1.0), 1.0, 0.0, math.inf) == math.inf


def test_sandwich_brackets_reference():
    p = Problem(2.0, PowerMinusQuad(2, 2), Interval(0, 3), 1.0)
    lo, up = sandwich_bounds(p)
    true = pb_quadrature(p).value
    assert lo.value <= true <= up.value + 1e-6


def test_sandwich_zero_drift_is_tight_on_left():
    p = Problem(2.0, Zero(), Interval(0, 2), 0.5)
    lo, up = sandwich_bounds(p)
    assert lo.value == pytest.approx(pb_quadrature(p).value, abs=1e-12)


def test_sandwich_x_zero_is_tight_on_right():
    p = Problem(2.0, PowerMinusQuad(1, 1), Interval(0.5, 2), 0.0)
    lo, up = sandwich_bounds(p)
    assert up.value == pytest.approx(pb_quadrature(p).value, abs=1e-9)


def test_sandwich_alpha_one_uses_constructive_route():
    p = Problem(1.0, PowerAlpha(1.0), HalfLine(), 0.5)
    lo, up = sandwich_bounds(p)
    assert lo.value == 0.0 and "unbounded_drift" in lo.flags
    assert up.value > 0 and "mc_based" not in up.flags


def test_sandwich_rejects_negative_domain():
    with pytest.raises(UnsupportedDomain):
        sandwich_bounds(Problem(2.0, PowerMinusQuad(2, 2), Interval(-1, 2), 0.5))
