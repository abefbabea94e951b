"""Generalized Piterbarg-Berman functions B_alpha^h(x, E)."""
from .model import *  # noqa: F401,F403
from .core import pb_event_decomposition, pb_quadrature, prob_sojourn_exceeds
from .closed_forms import (
    bm1_constructive,
    bm1_kernel,
    bm1_kernel_check,
    pickands2_interval,
    pickands2_rate,
    prop21_lambda1,
    prop21_lambda2,
)
from .bounds import lower_bound_concave, sandwich_bounds, upper_bound_convex
from .mc import MCConfig, MCEstimate, mc_pb, mc_pb_sweep, mc_sojourn_survival
from .kernels import BACKEND

__version__ = "0.1.0"
