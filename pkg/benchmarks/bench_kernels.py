"""Compare the compiled and pure-Python kernel backends.

Run with ``python3 benchmarks/bench_kernels.py [--repeat N]``.  Each kernel is
timed on the same inputs in both backends; the table lists the best of N
repetitions and the speed-up.  Results are also checked for equality.
"""
from __future__ import annotations

import argparse
import sys
import time

import numpy as np

from pbfun import _kernels_py

try:
    from pbfun import _kernels as _kernels_c
except ImportError:  # pragma: no cover
    _kernels_c = None


def _cases(rng, n):
    z = rng.uniform(-6.0, 3.0, n)
    x = rng.uniform(0.0, 1.5, n)
    C = rng.choice([1.0, 2.0, 4.0], n)
    lam = rng.choice([1.0, 1.5, 2.0, 3.0], n)
    a = rng.uniform(-2.0, 1.0, n)
    b = a + rng.uniform(0.5, 3.0, n)
    return z, x, C, lam, a, b


def make_workloads(seed=7):
    rng = np.random.default_rng(seed)
    z, x, C, lam, a, b = _cases(rng, 200)
    s = rng.normal(0.0, 2.0, 4000)
    zz, _, CC, LL, aa, bb = _cases(rng, 4000)
    normals = rng.standard_normal(4096 * 8)
    uniforms = rng.random(4096 * 8)
    walk = np.cumsum(0.03 * normals - 1e-3)

    def prob(mod):
        return [mod.prob_exceeds(z[i], x[i], C[i], lam[i], a[i], b[i]) for i in range(z.size)]

    def sojourn(mod):
        return [mod.sojourn_length(zz[i], s[i], CC[i], LL[i], aa[i], bb[i]) for i in range(s.size)]

    def topk(mod):
        t = mod.TopK(2001)
        for j in range(8):
            t.push_array(walk[j * 4096:(j + 1) * 4096])
        return list(t.values())

    def walk_fn(mod):
        out = []
        m = 0.0
        for j in range(8):
            v = mod.walk_block(normals[j * 4096:(j + 1) * 4096], m, 0.0316, 1e-3)
            m = float(v[-1])
            out.append(v)
        return np.concatenate(out).tolist()

    def bridge(mod):
        return mod.bridge_max(walk[:-1], walk[1:], uniforms[1:], 2e-3).tolist()

    return {"prob_exceeds x200": prob, "sojourn_length x4000": sojourn, "TopK 8 blocks": topk,
            "walk_block 8 blocks": walk_fn, "bridge_max 32k": bridge}


def best_time(fn, mod, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(mod)
        best = min(best, time.perf_counter() - t0)
    return best


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    if _kernels_c is None:
        print("compiled backend not built; only the Python backend is available", file=sys.stderr)
        return 1
    print(f"{'kernel':24s} {'python [s]':>12s} {'cython [s]':>12s} {'speed-up':>9s}  match")
    for name, fn in make_workloads().items():
        tp = best_time(fn, _kernels_py, args.repeat)
        tc = best_time(fn, _kernels_c, args.repeat)
        same = np.allclose(fn(_kernels_py), fn(_kernels_c), rtol=1e-12, atol=1e-13)
        print(f"{name:24s} {tp:12.5f} {tc:12.5f} {tp / tc:9.1f}  {'yes' if same else 'NO'}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
