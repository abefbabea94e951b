"""Acceptance criteria 1-8, one summary line each (see the terminal summary)."""
import csv
import io
import math
import time

import numpy as np
import pytest

from pbfun import bounds, cli
from pbfun import closed_forms as cf
from pbfun.core import pb_quadrature
from pbfun.mc import MCConfig, mc_pb
from pbfun.model import HalfLine, Interval, PowerAlpha, PowerMinusQuad, Problem, Zero

import test_properties as props


def csv_rows(text):
    body = "".join(l + "\n" for l in text.splitlines() if not l.startswith("#"))
    return list(csv.DictReader(io.StringIO(body)))


def ref(x, a, b, c, lam):
    return pb_quadrature(Problem(2.0, PowerMinusQuad(c, lam), Interval(a, b), x)).value


def test_criterion_1_constants(acceptance):
    t0 = time.perf_counter()
    e_rate = abs(cf.pickands2_rate(0.0) - 1 / math.sqrt(math.pi))
    e_bm1 = max(abs(cf.bm1_constructive(0.0, c).value - (1 + 1 / c)) for c in (0.5, 1.0, 2.0))
    dt = time.perf_counter() - t0
    ok = e_rate <= 1e-12 and e_bm1 <= 1e-8 and dt < 1.0
    acceptance("1 constants", ok, f"rate err {e_rate:.1e}, bm1 err {e_bm1:.1e}, {dt:.2f}s")
    assert ok


def test_criterion_2_closed_vs_definition(acceptance):
    t0 = time.perf_counter()
    worst = 0.0
    for T in (1.0, 3.0):
        for x in (0.0, T / 4, T / 2, 3 * T / 4):
            q = pb_quadrature(Problem(2.0, Zero(), Interval(0.0, T), x)).value
            worst = max(worst, abs(cf.pickands2_interval(x, T).value - q))
    for a, b in ((0.0, 3.0), (-2.0, 1.0), (1.0, 3.0)):
        for c in (1.0, 2.0, 4.0):
            for x in np.linspace(0.0, 0.8 * (b - a), 5):
                worst = max(worst, abs(cf.prop21_lambda2(x, a, b, c).value - ref(x, a, b, c, 2.0)))
                worst = max(worst, abs(cf.prop21_lambda1(x, a, b, c).value - ref(x, a, b, c, 1.0)))
    dt = time.perf_counter() - t0
    ok = worst <= 1e-6 and dt < 60
    acceptance("2 closed forms vs quadrature", ok, f"max diff {worst:.1e}, {dt:.1f}s")
    assert ok


def test_criterion_3_kernel_certification(acceptance):
    worst = max(abs(cf.bm1_kernel_check(t, c) - cf.bm1_kernel(t, c)) for t, c in ((0.5, 1.0), (1.0, 2.0), (0.1, 0.5)))
    ok = worst <= 1e-8
    acceptance("3 kernel certification", ok, f"max diff {worst:.1e}")
    assert ok


def _validate(capsys, *argv):
    code = cli.main(["validate", *argv])
    return code, csv_rows(capsys.readouterr().out)


def test_criterion_4_discrepancy_audit(acceptance, capsys):
    checks = []
    code, rows = _validate(capsys, "--alpha", "2", "--drift", "zero", "--domain", "0:1", "--xs", "0,0.5",
                           "--with-mc", "--n-paths", "20000", "--dt", "1e-3")
    checks.append(code == 0 and all(r["pass"] == "pass" for r in rows))
    code, rows = _validate(capsys, "--alpha", "1", "--drift", "power:c=1", "--xs", "0,0.5",
                           "--with-mc", "--n-paths", "20000", "--dt", "1e-3")
    checks.append(code == 0 and all(r["pass"] == "pass" for r in rows))
    # c = 1: printed and constructive coincide
    checks.append(all(abs(float(r["printed_gap"])) <= 1e-8 for r in rows))
    code, rows = _validate(capsys, "--alpha", "1", "--drift", "power:c=2", "--xs", "0:2:5")
    checks.append(code == 0 and all(r["printed_gap"] not in ("", "nan") for r in rows))
    code, rows = _validate(capsys, "--alpha", "2", "--drift", "power:c=2", "--xs", "0:2:5")
    checks.append(code == 0 and all(r["printed_gap"] not in ("", "nan") and r["conjecture"] for r in rows))
    ok = all(checks)
    acceptance("4 discrepancy audit", ok, f"sub-checks {checks}")
    assert ok


FIG4 = [(a, b, c) for a, b in ((1.0, 5.0), (-1.0, 2.0), (1.0, 4.0), (-1.0, 1.0)) for c in (1.0, 2.0)]


def test_criterion_5_bounds(acceptance):
    dominated = tighter = True
    for a, b, c in FIG4:
        xs = [(b - a) * i / 10 for i in range(9)]
        gaps = []
        for x in xs:
            up = bounds.upper_bound_convex(x, a, b, c, 2.0).value
            tv = ref(x, a, b, c, 2.0)
            dominated &= up >= tv - 1e-6
            gaps.append(up - tv)
        tighter &= gaps[-1] < gaps[0]
    bracket = True
    for a, b in ((0.0, 3.0), (1.0, 3.0), (0.0, 4.0)):
        for c, lam in ((1.0, 2.0), (2.0, 2.0), (2.0, 1.0), (4.0, 1.0)):
            for x in (0.0, 0.25 * (b - a), 0.5 * (b - a)):
                p = Problem(2.0, PowerMinusQuad(c, lam), Interval(a, b), x)
                lo, up = bounds.sandwich_bounds(p)
                tv = pb_quadrature(p).value
                bracket &= lo.value <= tv + 1e-6 and tv <= up.value + 1e-6
    concave = all(bounds.lower_bound_concave(x, a, b, c, 0.5).value <= ref(x, a, b, c, 0.5) + 1e-6
                  for a, b, c, x in ((1, 2, 1, 0.3), (0.5, 3, 2, 1.0), (-1, 2, 1, 0.5), (0, 2, 4, 0.2)))
    ok = dominated and tighter and bracket and concave
    acceptance("5 bounds", ok, f"dominates {dominated}, tightens {tighter}, sandwich {bracket}, concave {concave}")
    assert ok


def test_criterion_6_monte_carlo(acceptance):
    cfg = MCConfig(n_paths=100_000, dt=1e-3)
    t0 = time.perf_counter()
    cases = [(Problem(2.0, Zero(), Interval(0.0, 1.0), x), cf.pickands2_interval(x, 1.0).value) for x in (0.0, 0.5)]
    cases += [(Problem(1.0, PowerAlpha(1.0), HalfLine(), x), cf.bm1_constructive(x, 1.0).value) for x in (0.0, 1.0)]
    details, ok = [], True
    for p, target in cases:
        e = mc_pb(p, cfg)
        z = abs(e.value - target)
        tol = 3 * e.stderr + e.refinement_gap
        ok &= z <= tol
        details.append(f"{z:.4f}/{tol:.4f}")
    dt = time.perf_counter() - t0
    ok &= dt < 300
    acceptance("6 Monte Carlo", ok, f"|err|/tol {', '.join(details)}, {dt:.0f}s")
    assert ok


PROPERTY_TESTS = [
    props.test_closed_forms_nonincreasing_in_x,
    props.test_domain_monotonicity,
    props.test_reflection_symmetry,
    props.test_probability_bounds_and_z_order,
    props.test_sojourn_monotone_in_level,
    props.test_mc_seed_determinism,
    props.test_mc_estimators_agree,
]


def test_criterion_7_property_suites(acceptance):
    failed = []
    for fn in PROPERTY_TESTS:
        try:
            fn()
        except Exception as exc:  # noqa: BLE001 - report every failing property
            failed.append(f"{fn.__name__}: {type(exc).__name__}")
    ok = not failed
    acceptance("7 property suites", ok, "; ".join(failed) or f"{len(PROPERTY_TESTS)} properties x >= 50 draws")
    assert ok


@pytest.fixture(scope="module")
def figures(tmp_path_factory):
    outs = []
    for name in ("run1", "run2"):
        d = tmp_path_factory.mktemp(name)
        code = cli.main(["figures", "--outdir", str(d)])
        outs.append((code, d))
    return outs


def _curves(path):
    curves = {}
    for r in csv_rows(path.read_text()):
        curves.setdefault(r["curve_id"], []).append((float(r["x"]), float(r["value"])))
    return curves


def _fig1_at(curves, i):
    return {cid: pts[i][1] for cid, pts in curves.items()}


def test_criterion_8_figures(acceptance, figures):
    (code1, d1), (code2, d2) = figures
    names = [f"fig{i}.csv" for i in range(1, 5)]
    identical = all((d1 / n).read_bytes() == (d2 / n).read_bytes() for n in names)
    nonincreasing = all(
        all(b[1] <= a[1] + 1e-9 for a, b in zip(pts, pts[1:]))
        for n in names for cid, pts in _curves(d1 / n).items())
    f4 = _curves(d1 / "fig4.csv")
    dominates = all(u[1] >= t[1] - 1e-6 for cid, pts in f4.items() if cid.endswith(";upper")
                    for u, t in zip(pts, f4[cid[: -len(";upper")] + ";true"]))
    f1 = _curves(d1 / "fig1.csv")
    converge_large = True
    faster = True
    for panel in ("left", "right"):
        panel_curves = {k: v for k, v in f1.items() if k.startswith(panel)}
        at0, atend = _fig1_at(panel_curves, 0), _fig1_at(panel_curves, -1)
        converge_large &= np.ptp(list(atend.values())) < np.ptp(list(at0.values()))
        # relative decay over the first grid step grows with c
        order = sorted(panel_curves, key=lambda k: float(k.split("c=")[1]))
        ratios = [panel_curves[k][1][1] / panel_curves[k][0][1] for k in order]
        faster &= all(r2 < r1 for r1, r2 in zip(ratios, ratios[1:]))
    ok = code1 == 0 and code2 == 0 and identical and nonincreasing and dominates and converge_large and faster
    acceptance("8 figures", ok, f"byte-identical {identical}, non-increasing {nonincreasing}, "
               f"fig4 dominance {dominates}, fig1 converge at large x {converge_large}, larger c decays faster {faster}")
    assert ok


@pytest.mark.xfail(strict=True, reason="B(0) = 1 + 1/c differs across c, so fig1 curves cannot meet at x = 0")
def test_criterion_8_fig1_literal_convergence_at_zero(acceptance, figures):
    f1 = _curves(figures[0][1] / "fig1.csv")
    spreads = []
    for panel in ("left", "right"):
        panel_curves = {k: v for k, v in f1.items() if k.startswith(panel)}
        at0 = _fig1_at(panel_curves, 0)
        at_small = _fig1_at(panel_curves, 1)
        spreads.append((np.ptp(list(at0.values())), np.ptp(list(at_small.values()))))
    ok = all(s0 < 1e-3 for s0, _ in spreads)
    acceptance("8 fig1 curves meet as x -> 0 (literal reading)", ok,
               "spread at x=0: " + ", ".join(f"{s0:.3f}" for s0, _ in spreads) + "; expected, see decisions ledger")
    assert ok
