# src/retinex_admm/monitor.py
"""Theo dõi residual qua từng vòng lặp và số NaN bị kẹp."""
import logging

from src.tensor_core import ImageTensor

from .state import AdmmState

logger = logging.getLogger(__name__)

HISTORY_COLUMNS = ("iteration", "r_minus_p", "l_minus_q", "recon_error", "mu")


class ConvergenceMonitor:
    """Lịch sử residual theo từng vòng lặp cùng số NaN đã bị clamp01 nuốt mất."""

    def __init__(self):
        self.history: list[dict[str, float]] = []
        self.nan_events: list[tuple[str, int]] = []

    @property
    def nan_count(self) -> int:
        return sum(count for _, count in self.nan_events)

    def record_nan(self, count: int, where: str) -> None:
        logger.warning("%d NaN values clamped to 0 in %s", count, where)
        self.nan_events.append((where, count))

    def record(self, state: AdmmState, I: ImageTensor, mu: float) -> dict[str, float]:
        """`mu` là penalty mà vòng lặp đã dùng (trước khi tăng theo lịch)."""
        row = {
            "iteration": state.k,
            "r_minus_p": (state.R - state.P).frobenius_norm(),
            "l_minus_q": (state.L - state.Q).frobenius_norm(),
            "recon_error": ((state.R * state.L) - I).frobenius_norm(),
            "mu": float(mu),
        }
        logger.debug("iteration %(iteration)d: |R-P| %(r_minus_p).3e |L-Q| %(l_minus_q).3e "
                     "|RL-I| %(recon_error).3e mu %(mu).3g", row)
        self.history.append(row)
        return row
