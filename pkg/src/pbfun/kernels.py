"""Backend selection for the hot kernels.

The compiled module is used when it imports; otherwise, or when the
environment variable PBFUN_PURE=1 is set, the pure-Python fallback is used.
"""
from __future__ import annotations

import os

from . import _kernels_py

if os.environ.get("PBFUN_PURE", "") == "1":
    _impl = _kernels_py
    BACKEND = "python"
else:
    try:
        from . import _kernels as _impl  # type: ignore[attr-defined]

        BACKEND = "cython"
    except ImportError:  # pragma: no cover - depends on the build
        _impl = _kernels_py
        BACKEND = "python"

sojourn_length = _impl.sojourn_length
prob_exceeds = _impl.prob_exceeds
TopK = _impl.TopK
walk_block = _impl.walk_block
bridge_max = _impl.bridge_max

BACKENDS = {"python": _kernels_py, BACKEND: _impl}
