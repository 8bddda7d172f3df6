# src/retinex_admm/__init__.py
"""Phân rã Retinex giải bằng ADMM unfolding với các prior cắm rời."""
from .decomposition import decomposition_shapes, init_decomposition_entries, initialize_decomposition
from .monitor import HISTORY_COLUMNS, ConvergenceMonitor
from .state import AdmmState, NonFiniteStateError, SolverConfig
from .subproblems import PriorEvaluationError, update_L, update_multipliers, update_P, update_Q, update_R
from .unfolding import EnhanceResult, build_priors, compose_output, run_unfolding

__all__ = [
    "HISTORY_COLUMNS",
    "AdmmState",
    "ConvergenceMonitor",
    "EnhanceResult",
    "NonFiniteStateError",
    "PriorEvaluationError",
    "SolverConfig",
    "build_priors",
    "compose_output",
    "decomposition_shapes",
    "init_decomposition_entries",
    "initialize_decomposition",
    "run_unfolding",
    "update_L",
    "update_P",
    "update_Q",
    "update_R",
    "update_multipliers",
]
