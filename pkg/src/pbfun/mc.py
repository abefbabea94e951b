"""Monte Carlo estimation of B_alpha^h(x, E) for any alpha in (0, 2].

Per path the sojourn above level z on the grid is L(z) = dt * #{i : M(t_i) > z}
with M(t) = sqrt2 B_alpha(t) - |t|^alpha - h(t).  L is a non-increasing step
function of z, so {z : L(z) > x} = (-inf, z*) where z* is the k-th largest grid
value of M, k = floor(x/dt) + 1, and the z-integral of e^z collapses to e^(z*).

Every path owns a counter-based Philox stream keyed by (seed, path index), so
results do not depend on chunking or on the number of worker threads.  Each run
simulates the grid of step dt/2; the step-dt estimate uses the even grid points
of the same paths, which makes the refinement gap a common-random-numbers
difference.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .model import (
    GridTooCoarse,
    HalfLine,
    Interval,
    NotPositiveDefinite,
    PowerAlpha,
    PowerMinusQuad,
    Problem,
    UnsupportedDomain,
    Zero,
)

GENERATORS = ("cholesky", "circulant", "exact_bm", "exact_line")
CHOLESKY_MAX = 4096
HORIZON_CAP = 1e3
JITTER = 1e-12
BLOCK = 4096


@dataclass(frozen=True)
class MCConfig:
    n_paths: int = 10_000
    dt: float = 1e-3
    horizon: float | None = None
    seed: int = 20240601
    generator: str | None = None
    bridge_max: bool = True
    threads: int | None = None
    chunk: int = 256

    def __post_init__(self):
        if self.n_paths < 100:
            raise ValueError("n_paths must be at least 100")
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if self.generator is not None and self.generator not in GENERATORS:
            raise ValueError(f"unknown generator {self.generator!r}")
        if not 0 <= self.seed < 2 ** 64:
            raise ValueError("seed must be a 64-bit unsigned integer")


@dataclass
class MCEstimate:
    value: float
    stderr: float
    n_paths: int
    dt: float
    refinement_gap: float
    value_fine: float = math.nan
    stderr_fine: float = math.nan
    generator: str = ""
    flags: list[str] = field(default_factory=list)


def path_stream(seed: int, index: int) -> np.random.Generator:
    """Independent generator for one path, keyed by (seed, path index)."""
    return np.random.Generator(np.random.Philox(key=(int(seed) << 64) | int(index)))


def _threads(cfg: MCConfig) -> int:
    if cfg.threads is not None:
        n = cfg.threads
    else:
        n = int(os.environ.get("PBFUN_THREADS", "1") or 1)
    if n <= 0:
        n = os.cpu_count() or 1
    return n


# ---------------------------------------------------------------------------
# fBm sampling

def fbm_cov(alpha: float, s, t):
    s = np.asarray(s, dtype=float)
    t = np.asarray(t, dtype=float)
    return 0.5 * (np.abs(s) ** alpha + np.abs(t) ** alpha - np.abs(s - t) ** alpha)


def cholesky_factor(alpha: float, grid) -> tuple[np.ndarray, np.ndarray, list[str]]:
    """Lower Cholesky factor of the covariance at the nonzero grid points.

    Returns (mask of nonzero points, factor, flags).
    """
    grid = np.asarray(grid, dtype=float)
    mask = grid != 0.0
    g = grid[mask]
    cov = fbm_cov(alpha, g[:, None], g[None, :])
    flags: list[str] = []
    try:
        L = np.linalg.cholesky(cov)
    except np.linalg.LinAlgError:
        L = np.linalg.cholesky(cov + JITTER * np.eye(len(g)))
        flags.append("cholesky_jitter")
    return mask, L, flags


def circulant_eigs(alpha: float, m: int, h: float) -> np.ndarray:
    """Eigenvalues of the circulant embedding of m fractional Gaussian noise steps."""
    k = np.arange(m + 1, dtype=float)
    gam = 0.5 * (np.abs(k + 1) ** alpha - 2.0 * k ** alpha + np.abs(k - 1) ** alpha) * h ** alpha
    row = np.concatenate((gam, gam[-2:0:-1]))
    lam = np.fft.fft(row).real
    if lam.min() < -1e-10 * lam.max():
        raise NotPositiveDefinite("circulant embedding has negative eigenvalues")
    return np.clip(lam, 0.0, None)


def _circulant_increments(lam: np.ndarray, normals: np.ndarray) -> np.ndarray:
    """fGn rows from standard normals of shape (paths, 2 * len(lam))."""
    n2 = lam.size
    w = (normals[:, :n2] + 1j * normals[:, n2:]) * np.sqrt(lam / n2)
    return np.fft.fft(w, axis=1).real[:, : n2 // 2]


def _lattice(grid, tol=1e-9):
    """(h, j0) when grid = (j0 + i) h for consecutive integers, else None."""
    grid = np.asarray(grid, dtype=float)
    if grid.size < 2:
        return None
    h = (grid[-1] - grid[0]) / (grid.size - 1)
    if not np.allclose(np.diff(grid), h, rtol=1e-9, atol=tol * h):
        return None
    j0 = grid[0] / h
    if abs(j0 - round(j0)) > 1e-6:
        return None
    return h, int(round(j0))


def _bm_from_normals(grid: np.ndarray, normals: np.ndarray) -> np.ndarray:
    """Two-sided Brownian motion (B(0) = 0) at the grid from one normal per point."""
    out = np.empty_like(normals)
    pos = grid >= 0.0
    if pos.any():
        tp = grid[pos]
        steps = np.sqrt(np.diff(np.concatenate(([0.0], tp))))
        out[:, pos] = np.cumsum(normals[:, pos] * steps, axis=1)
    neg = ~pos
    if neg.any():
        tn = -grid[neg][::-1]  # increasing distances from 0
        steps = np.sqrt(np.diff(np.concatenate(([0.0], tn))))
        out[:, neg] = np.cumsum(normals[:, neg][:, ::-1] * steps, axis=1)[:, ::-1]
    return out


def _auto_generator(alpha: float, n: int, grid) -> str:
    if alpha == 2.0:
        return "exact_line"
    if alpha == 1.0:
        return "exact_bm"
    if n <= CHOLESKY_MAX:
        return "cholesky"
    if _lattice(grid) is not None:
        return "circulant"
    raise GridTooCoarse("grid too large for cholesky and not a lattice for circulant embedding")


def _normals_needed(method: str, grid) -> int:
    n = len(grid)
    if method == "exact_line":
        return 1
    if method in ("exact_bm", "cholesky"):
        return n
    h, j0 = _lattice(grid)
    m = _fgn_span(j0, n)
    return 4 * m


def _fgn_span(j0: int, n: int) -> int:
    lo = min(j0, 0)
    hi = max(j0 + n - 1, 0)
    return max(hi - lo, 1)


class _Sampler:
    """Turns per-path standard normals into fBm values on a fixed grid."""

    def __init__(self, alpha, grid, method):
        self.alpha = alpha
        self.grid = np.asarray(grid, dtype=float)
        self.method = method
        self.flags: list[str] = []
        if method == "cholesky":
            self.mask, self.L, self.flags = cholesky_factor(alpha, self.grid)
        elif method == "circulant":
            lat = _lattice(self.grid)
            if lat is None:
                raise GridTooCoarse("circulant embedding needs a lattice aligned with 0")
            self.h, self.j0 = lat
            self.m = _fgn_span(self.j0, self.grid.size)
            try:
                self.lam = circulant_eigs(alpha, self.m, self.h)
            except NotPositiveDefinite:
                if self.grid.size > CHOLESKY_MAX:
                    raise
                self.method = "cholesky"
                self.mask, self.L, _ = cholesky_factor(alpha, self.grid)
                self.flags = ["cholesky_jitter"]
        self.n_normals = _normals_needed(self.method, self.grid) if self.method != "circulant" else 4 * self.m

    def __call__(self, normals: np.ndarray) -> np.ndarray:
        g = self.grid
        if self.method == "exact_line":
            return normals[:, :1] * g[None, :]
        if self.method == "exact_bm":
            return _bm_from_normals(g, normals)
        if self.method == "cholesky":
            out = np.zeros((normals.shape[0], g.size))
            k = int(self.mask.sum())
            out[:, self.mask] = normals[:, :k] @ self.L.T
            return out
        inc = _circulant_increments(self.lam, normals)
        lo = min(self.j0, 0)
        # B at lattice points lo .. lo + m, anchored so that B(0) = 0
        path = np.concatenate((np.zeros((inc.shape[0], 1)), np.cumsum(inc, axis=1)), axis=1)
        path -= path[:, [-lo]]
        idx = np.arange(self.grid.size) + self.j0 - lo
        return path[:, idx]


def sample_fbm(alpha: float, grid, rng: np.random.Generator, method: str | None = None, size: int | None = None):
    """fBm values B_alpha(t) at the grid; shape (len(grid),) or (size, len(grid))."""
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size == 0 or np.any(np.diff(grid) <= 0):
        raise ValueError("grid must be strictly increasing")
    method = method or _auto_generator(alpha, grid.size, grid)
    if method == "cholesky" and grid.size > CHOLESKY_MAX:
        raise GridTooCoarse(f"cholesky limited to {CHOLESKY_MAX} points")
    if method == "exact_line" and alpha != 2.0 or method == "exact_bm" and alpha != 1.0:
        raise ValueError(f"{method} is exact only for its own alpha")
    s = _Sampler(alpha, grid, method)
    n = 1 if size is None else size
    out = s(rng.standard_normal((n, s.n_normals)))
    return out[0] if size is None else out


# ---------------------------------------------------------------------------
# problem set-up

def _drift_total(problem: Problem, t: np.ndarray) -> np.ndarray:
    """|t|^alpha + h(t)."""
    a = problem.alpha
    d = problem.drift
    base = np.abs(t) ** a
    if isinstance(d, Zero):
        return base
    if isinstance(d, PowerAlpha):
        return base + d.c * np.abs(t) ** a
    return base + d.c * np.abs(t) ** d.lam - t * t


def horizon_for(problem: Problem) -> float:
    """Smallest t with |t|^alpha + h(t) >= 40 + 6 sqrt(2 t^alpha), capped at 1e3."""
    f = lambda t: float(_drift_total(problem, np.array([t]))[0]) - 40.0 - 6.0 * math.sqrt(2.0 * t ** problem.alpha)
    hi = 1.0
    while f(hi) < 0.0:
        hi *= 2.0
        if hi >= HORIZON_CAP:
            return HORIZON_CAP
    lo = hi / 2.0 if hi > 1.0 else 0.0
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if f(mid) < 0.0:
            lo = mid
        else:
            hi = mid
    return hi


def _check_finite(problem: Problem):
    if not isinstance(problem.domain, HalfLine):
        return
    d = problem.drift
    if isinstance(d, Zero):
        raise UnsupportedDomain("with h = 0 the half-line value is infinite")
    if isinstance(d, PowerMinusQuad):
        ok = d.lam > 2.0 or (d.lam == 2.0 and problem.alpha == 2.0 and d.c > 1.0)
        if not ok:
            raise UnsupportedDomain("the value is infinite for this drift on the half-line")


def _grid(problem: Problem, dt: float, cfg: MCConfig) -> tuple[np.ndarray, float]:
    """Left-point cell grid of step dt covering E, and the covered measure."""
    dom = problem.domain
    if isinstance(dom, Interval):
        a, length = dom.a, dom.b - dom.a
    else:
        a, length = 0.0, cfg.horizon if cfg.horizon is not None else horizon_for(problem)
    n = max(int(round(length / dt)), 1)
    if abs(n * dt - length) > 1e-9 * max(length, 1.0):
        n = int(math.ceil(length / dt))
    return a + dt * np.arange(n), length


def _k(x: float, dt: float) -> int:
    return int(math.floor(x / dt + 1e-9)) + 1


def _reflect(problem: Problem) -> Problem:
    """Every supported drift is even in t, so [a, b] with b <= 0 maps to [-b, -a]."""
    dom = problem.domain
    if isinstance(dom, Interval) and dom.b <= 0.0:
        return Problem(problem.alpha, problem.drift, Interval(-dom.b, -dom.a), problem.x)
    return problem


def _linear_alpha1(problem: Problem) -> bool:
    return problem.alpha == 1.0 and isinstance(problem.drift, (Zero, PowerAlpha))


# ---------------------------------------------------------------------------
# per-path kernels

def _kth(M: np.ndarray, ks) -> np.ndarray:
    n = M.shape[1]
    pos = sorted({n - k for k in ks})
    part = np.partition(M, pos, axis=1)
    return np.stack([part[:, n - k] for k in ks], axis=1)


def _bm_halfline_path(seed, i, mu, h, n_steps, kf_max, kc_max, want_bridge):
    """One alpha = 1 half-line path on the fine grid; returns (top_f, top_c, sup)."""
    g = path_stream(seed, i)
    topf = kernels.TopK(kf_max)
    topc = kernels.TopK(kc_max)
    topf.push_array(np.zeros(1))
    topc.push_array(np.zeros(1))
    sd = math.sqrt(2.0 * h)
    step = mu * h
    m = 0.0
    sup = 0.0
    done = 0
    # beyond the current k-th value minus this margin the future supremum of
    # sqrt2 B(t) - mu t can matter only with probability e^(-28)
    margin = 28.0 / mu
    while done < n_steps:
        nb = min(BLOCK, n_steps - done)
        z = g.standard_normal(BLOCK)[:nb]
        u = g.random(BLOCK)[:nb]
        vals = kernels.walk_block(z, m, sd, step)
        topf.push_array(vals)
        # global index of vals[j] is done + 1 + j; coarse points have even index
        first = (done + 1) % 2
        topc.push_array(vals[1 - first::2] if first else vals[0::2])
        if want_bridge:
            left = np.empty(nb)
            left[0] = m
            left[1:] = vals[:-1]
            bm = kernels.bridge_max(left, vals, u, 2.0 * h)
            sup = max(sup, float(bm.max()))
        m = float(vals[-1])
        done += nb
        thr = min(topf.kth(), topc.kth())
        if want_bridge:
            thr = min(thr, sup)
        if m < thr - margin:
            break
    return topf.values(), topc.values(), sup


# ---------------------------------------------------------------------------
# estimators

def _summarise(vals: np.ndarray) -> tuple[float, float]:
    n = vals.size
    mean = float(np.mean(vals))
    sd = float(np.std(vals, ddof=1)) if n > 1 else 0.0
    return mean, sd / math.sqrt(n)


def mc_pb_sweep(problem: Problem, xs, cfg: MCConfig = MCConfig()) -> list[MCEstimate]:
    """Order-statistic estimates for several x on the same paths."""
    _check_finite(problem)
    problem = _reflect(problem)
    xs = [float(x) for x in xs]
    if any(x < 0 for x in xs):
        raise ValueError("x must be nonnegative")
    dt = cfg.dt
    h = dt / 2.0
    grid_f, length = _grid(problem, h, cfg)
    grid_c = grid_f[::2]
    meas = problem.domain.measure
    live = [j for j, x in enumerate(xs) if x < meas]
    ks_f = [_k(xs[j], h) for j in live]
    ks_c = [_k(xs[j], dt) for j in live]
    if ks_c and (max(ks_c) > grid_c.size or max(ks_f) > grid_f.size):
        raise GridTooCoarse("x/dt exceeds the number of grid points in E")
    flags: list[str] = []
    results_f = np.zeros((cfg.n_paths, len(live)))
    results_c = np.zeros((cfg.n_paths, len(live)))
    bridge_cols = [c for c, j in enumerate(live) if xs[j] == 0.0] if (cfg.bridge_max and _linear_alpha1(problem)) else []
    half = isinstance(problem.domain, HalfLine)
    if live and half and _linear_alpha1(problem):
        gen = "exact_bm"
        mu = 1.0 + (problem.drift.c if isinstance(problem.drift, PowerAlpha) else 0.0)
        kf_max, kc_max = max(ks_f), max(ks_c)
        want_bridge = bool(bridge_cols)

        def run(i):
            tf, tc, sup = _bm_halfline_path(cfg.seed, i, mu, h, grid_f.size, kf_max, kc_max, want_bridge)
            rf = np.array([tf[k - 1] if k <= tf.size else -math.inf for k in ks_f])
            rc = np.array([tc[k - 1] if k <= tc.size else -math.inf for k in ks_c])
            for col in bridge_cols:
                rf[col] = sup
                rc[col] = sup
            return np.exp(rf), np.exp(rc)

        with ThreadPoolExecutor(_threads(cfg)) as ex:
            for i, (rf, rc) in enumerate(ex.map(run, range(cfg.n_paths), chunksize=64)):
                results_f[i] = rf
                results_c[i] = rc
        if bridge_cols:
            flags.append("bridge_max")
    elif live:
        gen = cfg.generator or _auto_generator(problem.alpha, grid_f.size, grid_f)
        sampler = _Sampler(problem.alpha, grid_f, gen)
        gen = sampler.method
        flags += sampler.flags
        drift_f = _drift_total(problem, grid_f)
        if not (grid_f[0] >= 0.0 or _lattice(grid_f) is not None) or grid_f[-1] < 0.0:
            # a cell straddles 0 or the last cell sits left of 0: the drift is not
            # linear on every cell, so fall back to the grid maximum
            bridge_cols = []
        if bridge_cols and gen == "exact_bm":
            flags.append("bridge_max")
        chunks = [list(range(s, min(s + cfg.chunk, cfg.n_paths))) for s in range(0, cfg.n_paths, cfg.chunk)]

        def run_chunk(idx):
            return _chunk_interval(problem, sampler, grid_f, drift_f, length, cfg.seed, idx, ks_f, ks_c,
                                   bridge_cols if gen == "exact_bm" else [])

        with ThreadPoolExecutor(_threads(cfg)) as ex:
            for idx, (vf, vc) in zip(chunks, ex.map(run_chunk, chunks)):
                results_f[idx] = vf
                results_c[idx] = vc
    else:
        gen = cfg.generator or ""
    out = []
    col = {j: c for c, j in enumerate(live)}
    for j, x in enumerate(xs):
        if j not in col:
            out.append(MCEstimate(0.0, 0.0, cfg.n_paths, dt, 0.0, 0.0, 0.0, gen, flags + ["x_at_measure"]))
            continue
        c = col[j]
        vc, sc = _summarise(results_c[:, c])
        vf, sf = _summarise(results_f[:, c])
        out.append(MCEstimate(vc, sc, cfg.n_paths, dt, abs(vc - vf), vf, sf, gen, list(flags)))
    return out


def _chunk_interval(problem, sampler, grid_f, drift_f, length, seed, idx, ks_f, ks_c, bridge_cols):
    """Chunk of paths for grids built in one shot (any generator)."""
    n_norm = sampler.n_normals
    want_bridge = bool(bridge_cols)
    normals = np.empty((len(idx), n_norm))
    uni = np.empty((len(idx), grid_f.size)) if want_bridge else None
    extra = np.empty(len(idx)) if want_bridge else None
    for r, i in enumerate(idx):
        g = path_stream(seed, i)
        normals[r] = g.standard_normal(n_norm)
        if want_bridge:
            uni[r] = g.random(grid_f.size)
            extra[r] = g.standard_normal()
    B = sampler(normals)
    M = math.sqrt(2.0) * B - drift_f[None, :]
    vf = _kth(M, ks_f) if ks_f else np.zeros((len(idx), 0))
    vc = _kth(M[:, ::2], ks_c) if ks_c else np.zeros((len(idx), 0))
    if want_bridge:
        # Brownian bridges between consecutive grid points, plus the last cell
        # up to the right end of E (one further Gaussian increment)
        h = grid_f[1] - grid_f[0] if grid_f.size > 1 else length
        t_end = grid_f[0] + length
        last = grid_f[-1]
        d_end = float(_drift_total(problem, np.array([t_end]))[0])
        B_end = B[:, -1] + math.sqrt(t_end - last) * extra
        M_end = math.sqrt(2.0) * B_end - d_end
        right = np.concatenate((M[:, 1:], M_end[:, None]), axis=1)
        var = np.full(grid_f.size, 2.0 * h)
        var[-1] = 2.0 * (t_end - last)
        top = np.empty(len(idx))
        for r in range(len(idx)):
            top[r] = float(np.max(_bridge_var(M[r], right[r], uni[r], var)))
        for col in bridge_cols:
            vf[:, col] = top
            vc[:, col] = top
    return np.exp(vf), np.exp(vc)


def _bridge_var(left, right, u, var):
    d = right - left
    return 0.5 * (left + right + np.sqrt(d * d - 2.0 * var * np.log(u)))


def mc_pb(problem: Problem, cfg: MCConfig = MCConfig()) -> MCEstimate:
    """Order-statistic Monte Carlo estimate of B_alpha^h(x, E)."""
    return mc_pb_sweep(problem, [problem.x], cfg)[0]


def mc_pb_naive(problem: Problem, cfg: MCConfig = MCConfig(), dz: float = 1e-3, z_lo: float = -30.0) -> MCEstimate:
    """Cross-check estimator: explicit z-grid with per-level indicator averaging.

    For each path the sojourn L(z) is evaluated on the z-grid by counting grid
    values above z, and e^z 1{L(z) > x} is integrated cell by cell (exact
    e^z weight, indicator at the cell midpoint).  Uses the step-dt grid only.
    """
    _check_finite(problem)
    problem = _reflect(problem)
    x = problem.x
    if x >= problem.domain.measure:
        return MCEstimate(0.0, 0.0, cfg.n_paths, cfg.dt, 0.0, flags=["x_at_measure"])
    dt = cfg.dt
    grid_f, length = _grid(problem, dt / 2.0, cfg)
    gen = cfg.generator or _auto_generator(problem.alpha, grid_f.size, grid_f)
    sampler = _Sampler(problem.alpha, grid_f, gen)
    drift_f = _drift_total(problem, grid_f)
    vals = np.empty(cfg.n_paths)
    n_c = grid_f[::2].size
    k = _k(x, dt)
    if k > n_c:
        raise GridTooCoarse("x/dt exceeds the number of grid points in E")
    for s in range(0, cfg.n_paths, cfg.chunk):
        idx = list(range(s, min(s + cfg.chunk, cfg.n_paths)))
        normals = np.stack([path_stream(cfg.seed, i).standard_normal(sampler.n_normals) for i in idx])
        M = (math.sqrt(2.0) * sampler(normals) - drift_f[None, :])[:, ::2]
        Ms = np.sort(M, axis=1)
        for r, i in enumerate(idx):
            top = Ms[r, -1]
            edges = np.arange(z_lo, top + dz, dz)
            mids = 0.5 * (edges[:-1] + edges[1:])
            # L(z) > x on the grid means at least k points above z
            count = n_c - np.searchsorted(Ms[r], mids, side="right")
            w = np.exp(edges[1:]) - np.exp(edges[:-1])
            vals[i] = math.exp(z_lo) + float(np.sum(w * (count >= k)))
    v, se = _summarise(vals)
    return MCEstimate(v, se, cfg.n_paths, dt, math.nan, generator=sampler.method, flags=["naive_z_grid"])


def mc_sojourn_survival(x: float, c: float, cfg: MCConfig = MCConfig()) -> MCEstimate:
    """P{mes{t >= 0 : sqrt2 B(t) - (1+c) t > 0} > x} by exact Brownian increments."""
    if x < 0:
        raise ValueError("x must be nonnegative")
    dt = cfg.dt
    h = dt / 2.0
    mu = 1.0 + c
    T = cfg.horizon if cfg.horizon is not None else max(horizon_for(Problem(1.0, PowerAlpha(c), HalfLine(), 0.0)), 2.0 * x + 10.0)
    n_steps = int(math.ceil(T / h))
    if _k(x, dt) > n_steps // 2:
        raise GridTooCoarse("x/dt exceeds the number of grid points before the horizon")
    margin = 28.0 / mu
    bridge = cfg.bridge_max and x == 0.0
    ind_f = np.zeros(cfg.n_paths)
    ind_c = np.zeros(cfg.n_paths)
    sd = math.sqrt(2.0 * h)
    step = mu * h
    for i in range(cfg.n_paths):
        g = path_stream(cfg.seed, i)
        m = 0.0
        done = 0
        cnt_f = 0
        cnt_c = 0
        hit = False
        while done < n_steps:
            nb = min(BLOCK, n_steps - done)
            vals = kernels.walk_block(g.standard_normal(BLOCK)[:nb], m, sd, step)
            u = g.random(BLOCK)[:nb]
            if bridge and not hit:
                left = np.concatenate(([m], vals[:-1]))
                hit = bool(kernels.bridge_max(left, vals, u, 2.0 * h).max() > 0.0)
            above = vals > 0.0
            cnt_f += int(above.sum())
            first = (done + 1) % 2
            cnt_c += int((above[1 - first::2] if first else above[0::2]).sum())
            m = float(vals[-1])
            done += nb
            if m < -margin or hit:
                break
        if bridge:
            # a positive bridge maximum on some cell means a positive sojourn a.s.
            ind_f[i] = ind_c[i] = hit
        else:
            ind_f[i] = cnt_f * h > x
            ind_c[i] = cnt_c * dt > x
    pc = float(ind_c.mean())
    pf = float(ind_f.mean())
    n = cfg.n_paths
    return MCEstimate(pc, math.sqrt(max(pc * (1 - pc), 0.0) / n), n, dt, abs(pc - pf), pf,
                      math.sqrt(max(pf * (1 - pf), 0.0) / n), "exact_bm", ["bridge_max"] if bridge else [])
