import os
import subprocess
import sys

import numpy as np
import pytest

from pbfun import _kernels_py, kernels

compiled = pytest.importorskip("pbfun._kernels")


@pytest.fixture(scope="module")
def rng():
    return np.random.default_rng(11)


def test_sojourn_length_parity(rng):
    for _ in range(500):
        z = rng.uniform(-5, 3)
        s = rng.normal(0, 3)
        C = rng.choice([0.5, 1.0, 3.0])
        lam = rng.choice([0.5, 1.0, 1.5, 2.0, 3.0])
        a = rng.uniform(-2, 1)
        b = a + rng.uniform(0.1, 3) if rng.random() < 0.8 else np.inf
        py = _kernels_py.sojourn_length(z, s, C, lam, a, b)
        cy = compiled.sojourn_length(z, s, C, lam, a, b)
        assert cy == pytest.approx(py, rel=1e-10, abs=1e-10)


def test_prob_exceeds_parity(rng):
    for _ in range(40):
        z = rng.uniform(-5, 2)
        x = rng.uniform(0, 1.5)
        C = rng.choice([1.0, 2.0])
        lam = rng.choice([1.0, 1.5, 2.0])
        a = rng.uniform(-2, 1)
        b = a + rng.uniform(0.5, 3)
        py = _kernels_py.prob_exceeds(z, x, C, lam, a, b)
        cy = compiled.prob_exceeds(z, x, C, lam, a, b)
        assert cy == pytest.approx(py, abs=1e-11)


def test_topk_parity(rng):
    for k in (1, 7, 100, 5000):
        tp, tc = _kernels_py.TopK(k), compiled.TopK(k)
        for _ in range(6):
            block = rng.normal(size=int(rng.integers(1, 3000)))
            tp.push_array(block)
            tc.push_array(block)
            assert tc.count() == tp.count()
            assert tc.kth() == tp.kth()
        np.testing.assert_array_equal(tc.values(), tp.values())


def test_topk_matches_sort(rng):
    data = rng.normal(size=10_000)
    t = kernels.TopK(123)
    for chunk in np.array_split(data, 17):
        t.push_array(chunk)
    np.testing.assert_array_equal(t.values(), np.sort(data)[::-1][:123])
    assert t.kth() == np.sort(data)[-123]


def test_topk_not_full_reports_minus_inf():
    t = kernels.TopK(5)
    t.push_array(np.array([1.0, 2.0]))
    assert t.kth() == -np.inf and t.count() == 2


def test_walk_and_bridge_parity(rng):
    n = rng.normal(size=4096)
    u = rng.random(4096)
    w_py = _kernels_py.walk_block(n, 0.3, 0.05, 1e-3)
    w_cy = compiled.walk_block(n, 0.3, 0.05, 1e-3)
    np.testing.assert_allclose(w_cy, w_py, rtol=1e-12, atol=1e-12)
    left = np.concatenate(([0.3], w_py[:-1]))
    np.testing.assert_allclose(compiled.bridge_max(left, w_py, u, 0.0025),
                               _kernels_py.bridge_max(left, w_py, u, 0.0025), rtol=1e-12)


def test_bridge_max_dominates_endpoints(rng):
    left = rng.normal(size=1000)
    right = rng.normal(size=1000)
    m = kernels.bridge_max(left, right, rng.random(1000), 0.1)
    assert np.all(m >= np.maximum(left, right) - 1e-12)


def test_pure_backend_selected_by_env():
    env = dict(os.environ, PBFUN_PURE="1")
    out = subprocess.run([sys.executable, "-c", "from pbfun import kernels; print(kernels.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"
    assert kernels.BACKEND == ("python" if os.environ.get("PBFUN_PURE") == "1" else "cython")
