"""Command-line front end.

Subcommands: eval, table, bounds, mc, validate, figures.  Output is CSV with
17 significant digits and LF line endings, or JSON lines (one flat object per
record).  Exit codes: 0 success, 2 invalid input, 3 numerical non-convergence
or disagreement between reference routes.
"""
from __future__ import annotations

import argparse
import io
import json
import math
import os
import re
import sys
import tempfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import bounds, closed_forms as cf, core
from .model import (
    HalfLine,
    Interval,
    NonConvergence,
    PBFunError,
    PBValue,
    PowerAlpha,
    PowerMinusQuad,
    Problem,
    TailNotDecaying,
    TooManyCrossings,
    Zero,
)
from .quadrature import QuadConfig

METHODS = ("auto", "closed", "constructive", "quadrature", "semi_closed", "mc", "printed")
NUMERICAL_ERRORS = (NonConvergence, TailNotDecaying, TooManyCrossings)
DET_TOL = 1e-6
FIG_HALFLINE_XMAX = 5.0
FIG1_C = {"left": (0.2, 0.4, 0.6, 0.8), "right": (1.5, 2.0, 3.0, 5.0)}
FIG23_DOMAINS = ((0.0, 3.0), (-2.0, 1.0), (1.0, 3.0), (-1.0, 1.0), (0.0, 4.0))
FIG23_C = (1.0, 2.0, 4.0)
FIG4_DOMAINS = ((1.0, 5.0), (-1.0, 2.0), (1.0, 4.0), (-1.0, 1.0))
FIG4_C = (1.0, 2.0)


class UsageError(Exception):
    """Invalid command-line input (exit code 2)."""


# ---------------------------------------------------------------------------
# grammars

def parse_drift(text: str):
    text = text.strip()
    if text == "zero":
        return Zero()
    kind, _, rest = text.partition(":")
    params = {}
    for item in filter(None, rest.split(",")):
        key, eq, val = item.partition("=")
        if not eq:
            raise UsageError(f"bad drift parameter {item!r}")
        try:
            params[key.strip()] = float(val)
        except ValueError:
            raise UsageError(f"bad number in drift: {val!r}") from None
    try:
        if kind == "power" and set(params) == {"c"}:
            return PowerAlpha(params["c"])
        if kind == "plq" and set(params) == {"c", "lambda"}:
            return PowerMinusQuad(params["c"], params["lambda"])
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    raise UsageError(f"bad drift {text!r}; expected zero | power:c=<r> | plq:c=<r>,lambda=<r>")


def parse_domain(text: str):
    text = text.strip()
    if text == "half":
        return HalfLine()
    a, sep, b = text.partition(":")
    if not sep:
        raise UsageError(f"bad domain {text!r}; expected half | <a>:<b>")
    try:
        return Interval(float(a), float(b))
    except ValueError as exc:
        raise UsageError(f"bad domain {text!r}: {exc}") from None


def parse_grid(text: str) -> list[float]:
    """Either a comma list "0,0.5,1" or "lo:hi:n" (n points, both ends)."""
    try:
        if text.count(":") == 2:
            lo, hi, n = text.split(":")
            n = int(n)
            if n < 1:
                raise ValueError
            return [float(v) for v in np.linspace(float(lo), float(hi), n)]
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"bad x grid {text!r}") from None


def make_problem(alpha: float, drift: str, domain: str, x: float) -> Problem:
    try:
        return Problem(alpha, parse_drift(drift), parse_domain(domain), x)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


# ---------------------------------------------------------------------------
# method dispatch

def _closed(p: Problem) -> PBValue:
    d, dom = p.drift, p.domain
    if p.alpha == 2.0 and isinstance(dom, Interval):
        if isinstance(d, Zero) and dom.a == 0.0:
            return cf.pickands2_interval(p.x, dom.b)
        C, lam = p.quadratic_form()
        if lam == 2.0:
            return cf.prop21_lambda2(p.x, dom.a, dom.b, C)
        if lam == 1.0:
            return cf.prop21_lambda1(p.x, dom.a, dom.b, C)
    if p.alpha == 1.0 and isinstance(d, PowerAlpha) and isinstance(dom, HalfLine):
        return cf.bm1_constructive(p.x, d.c)
    raise UsageError("no closed or semi-closed form for this problem")


def _printed(p: Problem) -> PBValue:
    if isinstance(p.drift, PowerAlpha) and isinstance(p.domain, HalfLine):
        if p.alpha == 1.0:
            return cf.bm1_printed(p.x, p.drift.c)
        if p.alpha == 2.0:
            return cf.bm2_halfline_printed(p.x, p.drift.c)
    raise UsageError("printed displays exist only for power drifts on the half-line with alpha in {1, 2}")


def available_methods(p: Problem) -> list[str]:
    out = []
    d, dom = p.drift, p.domain
    if p.alpha == 2.0:
        if isinstance(dom, Interval):
            try:
                C, lam = p.quadratic_form()
                if lam in (1.0, 2.0):
                    out.append("closed")
            except PBFunError:
                pass
        out += ["semi_closed", "quadrature"]
    if p.alpha == 1.0 and isinstance(d, PowerAlpha) and isinstance(dom, HalfLine):
        out.append("constructive")
    return out


def evaluate(p: Problem, method: str, qcfg: QuadConfig, mc_cfg=None) -> PBValue:
    """Evaluate with the named route; returns a PBValue tagged with the route."""
    if method == "auto":
        avail = available_methods(p)
        method = avail[0] if avail else "mc"
    if method == "closed":
        v = _closed(p)
    elif method == "constructive":
        if not (p.alpha == 1.0 and isinstance(p.drift, PowerAlpha) and isinstance(p.domain, HalfLine)):
            raise UsageError("the constructive route needs alpha = 1, power drift, half-line")
        v = cf.bm1_constructive(p.x, p.drift.c, qcfg)
    elif method in ("quadrature", "semi_closed"):
        if p.alpha != 2.0:
            raise UsageError(f"{method} is available for alpha = 2 only")
        fn = core.pb_quadrature if method == "quadrature" else core.pb_event_decomposition
        v = fn(p, qcfg)
    elif method == "printed":
        v = _printed(p)
    elif method == "mc":
        from . import mc

        e = mc.mc_pb(p, mc_cfg or mc.MCConfig())
        return PBValue(e.value, e.stderr, "mc", list(e.flags))
    else:
        raise UsageError(f"unknown method {method!r}")
    return PBValue(v.value, v.err_est, method, list(v.flags))


# ---------------------------------------------------------------------------
# output

def fmt(v) -> str:
    if isinstance(v, str):
        return v
    if isinstance(v, (list, tuple)):
        return ";".join(v)
    if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
        return str(int(v))
    return format(float(v), ".17g")


def _json_value(v):
    if isinstance(v, (list, tuple)):
        return ";".join(v)
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return v if math.isfinite(v) else str(v)
    return v


def render(columns: list[str], rows: list[dict], form: str, comments=()) -> str:
    buf = io.StringIO()
    if form == "json":
        for r in rows:
            buf.write(json.dumps({k: _json_value(r[k]) for k in columns}, separators=(",", ":")) + "\n")
        return buf.getvalue()
    for c in comments:
        buf.write(f"# {c}\n")
    buf.write(",".join(columns) + "\n")
    for r in rows:
        buf.write(",".join(fmt(r[k]) for k in columns) + "\n")
    return buf.getvalue()


def write_atomic(path: str, text: str) -> None:
    """Write via a temporary file in the same directory, then rename."""
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".pbfun-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="\n") as fh:
            fh.write(text)
        mask = os.umask(0)
        os.umask(mask)
        os.chmod(tmp, 0o666 & ~mask)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def emit(text: str, output: str | None) -> None:
    if output:
        write_atomic(output, text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# config and threads

def read_config(path: str) -> dict[str, str]:
    out = {}
    try:
        with open(path) as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise UsageError(f"cannot read config: {exc}") from None
    for n, line in enumerate(lines, 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        key, eq, val = line.partition("=")
        if not eq:
            raise UsageError(f"{path}:{n}: expected key=value")
        out[key.strip().replace("-", "_")] = val.strip()
    return out


def thread_count(flag: int | None) -> int:
    if flag is not None:
        n = flag
    else:
        env = os.environ.get("PBFUN_THREADS", "").strip()
        try:
            n = int(env) if env else 1
        except ValueError:
            raise UsageError("PBFUN_THREADS must be an integer") from None
    if n < 0:
        raise UsageError("thread count must be >= 0")
    return n if n > 0 else (os.cpu_count() or 1)


def ordered_map(fn, items, threads: int):
    """map() that keeps input order; uses worker processes when threads > 1."""
    items = list(items)
    if threads <= 1 or len(items) <= 1:
        return [fn(i) for i in items]
    with ProcessPoolExecutor(max_workers=threads) as ex:
        return list(ex.map(fn, items))


# ---------------------------------------------------------------------------
# commands

@dataclass
class Outcome:
    text: str
    code: int = 0
    files: dict[str, str] = field(default_factory=dict)


def _qcfg(args) -> QuadConfig:
    try:
        return QuadConfig(abs_tol=args.abs_tol, rel_tol=args.rel_tol)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _mc_cfg(args, threads: int):
    from . import mc

    try:
        return mc.MCConfig(n_paths=args.n_paths, dt=args.dt, seed=args.seed, horizon=args.horizon,
                           generator=args.generator, threads=threads)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _record(x: float, v: PBValue) -> dict:
    return {"x": x, "value": v.value, "err": v.err_est, "method": v.method, "flags": v.flags}


def _eval_point(job):
    p, method, qcfg, mcfg = job
    try:
        return evaluate(p, method, qcfg, mcfg), None
    except NUMERICAL_ERRORS as exc:
        return None, f"{type(exc).__name__}: {exc}"


TABLE_COLUMNS = ["x", "value", "err", "method", "flags"]


def _sweep(args, xs: list[float]) -> Outcome:
    threads = thread_count(args.threads)
    probs = [make_problem(args.alpha, args.drift, args.domain, x) for x in xs]
    qcfg = _qcfg(args)
    mcfg = _mc_cfg(args, 1) if args.method == "mc" else None
    rows, code = [], 0
    for x, (v, err) in zip(xs, ordered_map(_eval_point, [(p, args.method, qcfg, mcfg) for p in probs], threads)):
        if v is None:
            rows.append({"x": x, "value": math.nan, "err": math.nan, "method": "error", "flags": [err]})
            code = 3
            continue
        if "quad_not_converged" in v.flags:
            code = 3
        rows.append(_record(x, v))
    comment = f"alpha={fmt(args.alpha)} drift={args.drift} domain={args.domain}"
    return Outcome(render(TABLE_COLUMNS, rows, args.format, [comment]), code)


def cmd_eval(args) -> Outcome:
    return _sweep(args, [args.x])


def cmd_table(args) -> Outcome:
    return _sweep(args, parse_grid(args.xs))


def cmd_bounds(args) -> Outcome:
    xs = parse_grid(args.xs)
    probs = [make_problem(args.alpha, args.drift, args.domain, x) for x in xs]
    d, dom = probs[0].drift, probs[0].domain
    rows = []
    mcfg = _mc_cfg(args, thread_count(args.threads)) if args.alpha not in (1.0, 2.0) else None
    for p in probs:
        if isinstance(d, PowerMinusQuad) and isinstance(dom, Interval) and args.alpha == 2.0:
            if d.convex:
                v = bounds.upper_bound_convex(p.x, dom.a, dom.b, d.c, d.lam)
                rows.append(_record(p.x, PBValue(v.value, v.err_est, "upper_convex", v.flags)))
            else:
                v = bounds.lower_bound_concave(p.x, dom.a, dom.b, d.c, d.lam)
                rows.append(_record(p.x, PBValue(v.value, v.err_est, "lower_concave", v.flags)))
        if dom.lo >= 0.0:
            lo, hi = bounds.sandwich_bounds(p, mcfg)
            rows.append(_record(p.x, PBValue(lo.value, lo.err_est, "sandwich_lower", lo.flags)))
            rows.append(_record(p.x, PBValue(hi.value, hi.err_est, "sandwich_upper", hi.flags)))
        if args.reference and args.alpha == 2.0:
            v = core.pb_quadrature(p, _qcfg(args))
            rows.append(_record(p.x, PBValue(v.value, v.err_est, "reference", v.flags)))
    if not rows:
        raise UsageError("no bound applies to this problem")
    comment = f"alpha={fmt(args.alpha)} drift={args.drift} domain={args.domain}"
    return Outcome(render(TABLE_COLUMNS, rows, args.format, [comment]))


MC_COLUMNS = ["x", "value", "stderr", "refinement_gap", "value_fine", "n_paths", "dt", "generator", "flags"]


def cmd_mc(args) -> Outcome:
    from . import mc

    xs = parse_grid(args.xs) if args.xs else [args.x]
    p = make_problem(args.alpha, args.drift, args.domain, max(xs))
    cfg = _mc_cfg(args, thread_count(args.threads))
    try:
        if args.naive:
            ests = [mc.mc_pb_naive(p.with_x(x), cfg) for x in xs]
        else:
            ests = mc.mc_pb_sweep(p, xs, cfg)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    rows = [{"x": x, "value": e.value, "stderr": e.stderr, "refinement_gap": e.refinement_gap,
             "value_fine": e.value_fine, "n_paths": e.n_paths, "dt": e.dt, "generator": e.generator,
             "flags": e.flags} for x, e in zip(xs, ests)]
    comment = f"alpha={fmt(args.alpha)} drift={args.drift} domain={args.domain} seed={args.seed}"
    return Outcome(render(MC_COLUMNS, rows, args.format, [comment]))


def validate_rows(p0: Problem, xs, qcfg: QuadConfig, mc_cfg=None):
    """Cross-method table; returns (columns, rows, all_agree)."""
    routes = available_methods(p0)
    if mc_cfg is not None:
        routes.append("mc")
    d = p0.drift
    has_printed = isinstance(d, PowerAlpha) and isinstance(p0.domain, HalfLine) and p0.alpha in (1.0, 2.0)
    if len(routes) + has_printed == 0:
        raise UsageError("no evaluation route for this problem")
    det = [r for r in routes if r != "mc"]
    cols = ["x"] + [f"value_{r}" for r in routes]
    if "mc" in routes:
        cols += ["stderr_mc", "gap_mc"]
    pairs = [(a, b) for i, a in enumerate(routes) for b in routes[i + 1:]]
    cols += [f"diff_{a}_{b}" for a, b in pairs]
    if has_printed:
        cols += ["value_printed", "printed_gap"]
        cols += ["conjecture"] if p0.alpha == 2.0 else ["printed_ratio"]
    cols += ["pass"]
    rows, all_ok = [], True
    mc_ests = {}
    if "mc" in routes:
        from . import mc

        for x, e in zip(xs, mc.mc_pb_sweep(p0, xs, mc_cfg)):
            mc_ests[x] = e
    for x in xs:
        p = p0.with_x(x)
        row = {"x": x}
        vals = {}
        ok = True
        for r in det:
            try:
                vals[r] = evaluate(p, r, qcfg).value
            except NUMERICAL_ERRORS:
                vals[r] = math.nan
                ok = False
        if "mc" in routes:
            e = mc_ests[x]
            vals["mc"] = e.value
            row["stderr_mc"] = e.stderr
            row["gap_mc"] = e.refinement_gap
        for r in routes:
            row[f"value_{r}"] = vals[r]
        for a, b in pairs:
            diff = vals[a] - vals[b]
            row[f"diff_{a}_{b}"] = diff
            if "mc" in (a, b):
                e = mc_ests[x]
                tol = 3.0 * e.stderr + e.refinement_gap
            else:
                tol = DET_TOL
            if not abs(diff) <= tol:
                ok = False
        if has_printed:
            pv = _printed(p).value
            ref = vals[det[0]] if det else vals.get("mc", math.nan)
            row["value_printed"] = pv
            row["printed_gap"] = ref - pv
            if p0.alpha == 2.0:
                row["conjecture"] = cf.halfline_gap_conjecture(x, d.c)
            else:
                row["printed_ratio"] = pv / ref if ref > 0 else math.nan
        row["pass"] = "pass" if ok else "FAIL"
        all_ok &= ok
        rows.append(row)
    return cols, rows, all_ok


def cmd_validate(args) -> Outcome:
    xs = parse_grid(args.xs)
    p0 = make_problem(args.alpha, args.drift, args.domain, max(xs))
    mcfg = _mc_cfg(args, thread_count(args.threads)) if args.with_mc else None
    cols, rows, ok = validate_rows(p0, xs, _qcfg(args), mcfg)
    comment = (f"alpha={fmt(args.alpha)} drift={args.drift} domain={args.domain}; "
               f"deterministic tolerance {DET_TOL:g}, mc tolerance 3 stderr + refinement gap; "
               "printed columns are informational")
    return Outcome(render(cols, rows, args.format, [comment]), 0 if ok else 3)


# ----- figures

FIG_COLUMNS = ["curve_id", "x", "value", "method"]


def fig_grid(length: float) -> list[float]:
    """101 points on [0, length), right end excluded."""
    return [length * i / 101.0 for i in range(101)]


def _tag(v: float) -> str:
    """Short, stable label for a parameter value (0.2 -> "0.2", 3.0 -> "3")."""
    t = repr(float(v))
    return t[:-2] if t.endswith(".0") else t


def figure_jobs(name: str) -> list[tuple]:
    """(curve_id, kind, params, x) jobs for one figure, in output order."""
    jobs = []
    if name == "fig1":
        xs = [FIG_HALFLINE_XMAX * i / 100.0 for i in range(101)]
        for panel, cs in FIG1_C.items():
            for c in cs:
                jobs += [(f"{panel};c={_tag(c)}", "bm1", (c,), x) for x in xs]
    elif name in ("fig2", "fig3"):
        kind = "lam2" if name == "fig2" else "lam1"
        for a, b in FIG23_DOMAINS:
            for c in FIG23_C:
                jobs += [(f"E={_tag(a)}:{_tag(b)};c={_tag(c)}", kind, (a, b, c), x) for x in fig_grid(b - a)]
    elif name == "fig4":
        for a, b in FIG4_DOMAINS:
            for c in FIG4_C:
                cid = f"E={_tag(a)}:{_tag(b)};c={_tag(c)}"
                xs = fig_grid(b - a)
                jobs += [(cid + ";upper", "upper", (a, b, c), x) for x in xs]
                jobs += [(cid + ";true", "lam2", (a, b, c), x) for x in xs]
    else:
        raise UsageError(f"unknown figure {name!r}")
    return jobs


def _figure_point(job):
    cid, kind, params, x = job
    try:
        if kind == "bm1":
            v = cf.bm1_constructive(x, params[0])
            method = "constructive"
        elif kind == "lam2":
            v = cf.prop21_lambda2(x, *params)
            method = v.method
        elif kind == "lam1":
            v = cf.prop21_lambda1(x, *params)
            method = v.method
        else:
            a, b, c = params
            v = bounds.upper_bound_convex(x, a, b, c, 2.0)
            method = "upper_bound"
        return {"curve_id": cid, "x": x, "value": v.value, "method": method}
    except (PBFunError, ValueError) as exc:
        return {"curve_id": cid, "x": x, "value": math.nan, "method": f"error:{type(exc).__name__}"}


FIG_TITLES = {
    "fig1": "alpha = 1, h(t) = c t, E = [0, inf)",
    "fig2": "alpha = 2, h(t) = c t^2 - t^2",
    "fig3": "alpha = 2, h(t) = c|t| - t^2",
    "fig4": "alpha = 2, h(t) = (c - 1) t^2: upper bound and true value",
}


def svg_plot(rows: list[dict], title: str, width: int = 800, height: int = 600) -> str:
    """Static polyline plot, one line per curve_id."""
    curves: dict[str, list[tuple[float, float]]] = {}
    for r in rows:
        if math.isfinite(r["value"]):
            curves.setdefault(r["curve_id"], []).append((r["x"], r["value"]))
    pts = [p for c in curves.values() for p in c]
    x0, x1 = min(p[0] for p in pts), max(p[0] for p in pts)
    y0, y1 = 0.0, max(p[1] for p in pts)
    # clip very tall curves so that the rest stays readable
    vals = sorted(p[1] for p in pts)
    y1 = min(y1, vals[int(0.98 * (len(vals) - 1))] * 1.1) or 1.0
    L, R, T, B = 70, 220, 40, 60
    sx = lambda x: L + (x - x0) / ((x1 - x0) or 1.0) * (width - L - R)
    sy = lambda y: height - B - (min(y, y1) - y0) / ((y1 - y0) or 1.0) * (height - T - B)
    palette = ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
               "#bcbd22", "#17becf"]
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
           f'viewBox="0 0 {width} {height}">',
           f'<rect width="{width}" height="{height}" fill="white"/>',
           f'<text x="{width / 2:.1f}" y="22" text-anchor="middle" font-size="15">{title}</text>',
           f'<line x1="{L}" y1="{height - B}" x2="{width - R}" y2="{height - B}" stroke="black"/>',
           f'<line x1="{L}" y1="{T}" x2="{L}" y2="{height - B}" stroke="black"/>']
    for i in range(6):
        xv = x0 + (x1 - x0) * i / 5
        yv = y0 + (y1 - y0) * i / 5
        out.append(f'<text x="{sx(xv):.1f}" y="{height - B + 18}" text-anchor="middle" font-size="11">{xv:.3g}</text>')
        out.append(f'<text x="{L - 6}" y="{sy(yv) + 4:.1f}" text-anchor="end" font-size="11">{yv:.3g}</text>')
    out.append(f'<text x="{(L + width - R) / 2:.1f}" y="{height - 15}" text-anchor="middle" font-size="13">x</text>')
    out.append(f'<text x="18" y="{(T + height - B) / 2:.1f}" font-size="13" '
               f'transform="rotate(-90 18 {(T + height - B) / 2:.1f})" text-anchor="middle">value</text>')
    for i, (cid, cpts) in enumerate(curves.items()):
        col = palette[i % len(palette)]
        dash = ' stroke-dasharray="6 3"' if cid.endswith(";upper") else ""
        poly = " ".join(f"{sx(x):.2f},{sy(y):.2f}" for x, y in cpts)
        out.append(f'<polyline fill="none" stroke="{col}" stroke-width="1.5"{dash} points="{poly}"/>')
        ly = T + 14 * i
        out.append(f'<line x1="{width - R + 10}" y1="{ly}" x2="{width - R + 30}" y2="{ly}" stroke="{col}"{dash}/>')
        out.append(f'<text x="{width - R + 35}" y="{ly + 4}" font-size="10">{cid}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def cmd_figures(args) -> Outcome:
    names = [n.strip() for n in args.only.split(",")] if args.only else ["fig1", "fig2", "fig3", "fig4"]
    jobs = {n: figure_jobs(n) for n in names}
    outdir = args.outdir
    if not os.path.isdir(outdir):
        try:
            os.makedirs(outdir, exist_ok=True)
        except OSError as exc:
            raise UsageError(f"cannot create {outdir}: {exc}") from None
    threads = thread_count(args.threads)
    files, code = {}, 0
    for n in names:
        rows = ordered_map(_figure_point, jobs[n], threads)
        if any(r["method"].startswith("error") for r in rows):
            code = 3
        comments = [FIG_TITLES[n],
                    "x grid: 101 points on [0, mes(E)) with the right end excluded"
                    if n != "fig1" else f"x grid: 101 points on [0, {fmt(FIG_HALFLINE_XMAX)}]"]
        text = render(FIG_COLUMNS, rows, "csv", comments)
        path = os.path.join(outdir, f"{n}.csv")
        write_atomic(path, text)
        files[path] = text
        if args.svg:
            spath = os.path.join(outdir, f"{n}.svg")
            write_atomic(spath, svg_plot(rows, FIG_TITLES[n]))
            files[spath] = ""
    summary = "".join(f"wrote {p}\n" for p in files)
    return Outcome(summary, code, files)


# ---------------------------------------------------------------------------
# parser

def _nonneg_hint(value: str) -> float:
    try:
        return float(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {value!r}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pbfun", description="Evaluate the Piterbarg-Berman function B_alpha^h(x, E).")
    parser.add_argument("--config", help="key=value file merged under the command-line flags")  # handled in parse_args
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, x_mode):
        p.add_argument("--alpha", type=float, default=2.0)
        p.add_argument("--drift", default="zero", help="zero | power:c=<r> | plq:c=<r>,lambda=<r>")
        p.add_argument("--domain", default="half", help="half | <a>:<b>")
        if x_mode == "x":
            p.add_argument("--x", type=_nonneg_hint, required=True)
        elif x_mode == "xs":
            p.add_argument("--xs", required=True, help="comma list or lo:hi:n")
        p.add_argument("--abs-tol", type=float, default=1e-9)
        p.add_argument("--rel-tol", type=float, default=1e-8)
        p.add_argument("--seed", type=int, default=20240601)
        p.add_argument("--n-paths", type=int, default=10_000)
        p.add_argument("--dt", type=float, default=1e-3)
        p.add_argument("--horizon", type=float, default=None)
        p.add_argument("--generator", default=None, choices=("cholesky", "circulant", "exact_bm", "exact_line"))
        p.add_argument("--threads", type=int, default=None)
        p.add_argument("--format", choices=("csv", "json"), default="csv")
        p.add_argument("--output", "-o", default=None)

    p = sub.add_parser("eval", help="single evaluation")
    common(p, "x")
    p.add_argument("--method", choices=METHODS, default="auto")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("table", help="sweep over an x grid")
    common(p, "xs")
    p.add_argument("--method", choices=METHODS, default="auto")
    p.set_defaults(func=cmd_table)

    p = sub.add_parser("bounds", help="bound table over an x grid")
    common(p, "xs")
    p.add_argument("--reference", action="store_true", help="add the quadrature reference value")
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("mc", help="Monte Carlo estimate")
    common(p, None)
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--x", type=_nonneg_hint)
    g.add_argument("--xs")
    p.add_argument("--naive", action="store_true", help="use the explicit z-grid estimator")
    p.set_defaults(func=cmd_mc)

    p = sub.add_parser("validate", help="cross-method report")
    common(p, "xs")
    p.add_argument("--with-mc", action="store_true")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("figures", help="write the figure CSVs")
    p.add_argument("--outdir", default=".")
    p.add_argument("--only", default=None, help="comma list of fig1..fig4")
    p.add_argument("--svg", action="store_true")
    p.add_argument("--threads", type=int, default=None)
    p.set_defaults(func=cmd_figures)
    return parser


def _split_config(argv: list[str]) -> tuple[list[str], str | None]:
    """Remove --config PATH (anywhere on the line) and return the path."""
    rest, path, i = [], None, 0
    while i < len(argv):
        a = argv[i]
        if a == "--config":
            if i + 1 >= len(argv):
                raise UsageError("--config needs a path")
            path = argv[i + 1]
            i += 2
            continue
        if a.startswith("--config="):
            path = a.split("=", 1)[1]
        else:
            rest.append(a)
        i += 1
    return rest, path


def _glue_negative_values(argv: list[str]) -> list[str]:
    """Turn "--domain -2:1" into "--domain=-2:1" so argparse keeps the value."""
    out, i = [], 0
    while i < len(argv):
        a = argv[i]
        if a.startswith("--") and "=" not in a and i + 1 < len(argv) and re.match(r"^-[\d.]", argv[i + 1]):
            out.append(f"{a}={argv[i + 1]}")
            i += 2
            continue
        out.append(a)
        i += 1
    return out


def parse_args(argv: list[str]) -> argparse.Namespace:
    parser = build_parser()
    argv, cfg_path = _split_config(argv)
    argv = _glue_negative_values(argv)
    if cfg_path:
        cfg = read_config(cfg_path)
        subs = parser._subparsers._group_actions[0].choices
        command = next((a for a in argv if a in subs), None)
        if command is not None:
            # config values become defaults of the chosen subcommand; flags still win
            sp = subs[command]
            known = {act.dest for act in sp._actions}
            unknown = set(cfg) - known
            if unknown:
                raise UsageError(f"unknown config keys: {', '.join(sorted(unknown))}")
            for act in sp._actions:
                if act.dest in cfg:
                    act.required = False
                    if act.const is not None and act.nargs == 0:
                        cfg[act.dest] = cfg[act.dest].lower() in ("1", "true", "yes", "on")
            sp.set_defaults(**cfg)
    return parser.parse_args(argv)


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = parse_args(argv)
        if getattr(args, "x", None) is not None and args.x < 0:
            raise UsageError("x must be nonnegative")
        out = args.func(args)
    except SystemExit as exc:  # argparse errors exit with 2
        return int(exc.code or 0)
    except UsageError as exc:
        print(f"pbfun: error: {exc}", file=sys.stderr)
        return 2
    except NUMERICAL_ERRORS as exc:
        print(f"pbfun: numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3
    except PBFunError as exc:
        print(f"pbfun: error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    if args.command == "figures":
        sys.stdout.write(out.text)
    else:
        emit(out.text, args.output)
    return out.code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
