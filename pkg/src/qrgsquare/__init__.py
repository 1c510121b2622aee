"""Quantum Riemannian geometry on the square graph Z2 x Z2."""

from .scalars import EXACT, FLOAT, Regime, approx_equal, exact, make_phase
from .geometry import Connection, Metric, make_metric
from .model import ModelParams, MomentumParams, eh_action, qlc_family
from .solver import qlc_solve

__version__ = "0.1.0"

__all__ = [
    "EXACT", "FLOAT", "Regime", "approx_equal", "exact", "make_phase",
    "Connection", "Metric", "make_metric",
    "ModelParams", "MomentumParams", "eh_action", "qlc_family",
    "qlc_solve",
]
