# src/retinex_admm/unfolding.py
"""Vòng lặp unfolding: phân rã ban đầu, sau đó K vòng cập nhật R, L, P, Q và nhân tử."""
import logging
from dataclasses import dataclass

from src.data_processing.weight_archive import WeightArchive
from src.priors import PriorFn, build_prior
from src.tensor_core import DimensionError, ImageTensor, clamp01
from src.tensor_core.ops import power

from .decomposition import initialize_decomposition
from .monitor import ConvergenceMonitor
from .state import AdmmState, NonFiniteStateError, SolverConfig
from .subproblems import Prior, update_L, update_multipliers, update_P, update_Q, update_R

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class EnhanceResult:
    """Ảnh kết quả, phân rã ban đầu, trạng thái cuối và lịch sử residual."""

    output: ImageTensor
    R0: ImageTensor
    L0: ImageTensor
    state: AdmmState
    history: tuple[dict[str, float], ...]
    nan_count: int = 0

    @property
    def P(self) -> ImageTensor:
        return self.state.P

    @property
    def Q(self) -> ImageTensor:
        return self.state.Q


def build_priors(config: SolverConfig, weights: WeightArchive | None = None) -> tuple[PriorFn, PriorFn]:
    """Dựng cặp prior (R, L) theo loại ghi trong `config`."""
    prior_r = build_prior(
        config.prior_r, weights, prefix="prior_r/", unet_config=config.unet, **config.prior_options(config.prior_r)
    )
    prior_l = build_prior(config.prior_l, weights, prefix="prior_l/", **config.prior_options(config.prior_l))
    return prior_r, prior_l


def _check_finite(state: AdmmState, names: tuple[str, ...]) -> None:
    for name in names:
        if not getattr(state, name).is_finite():
            raise NonFiniteStateError(state.k, name)


def compose_output(
    P: ImageTensor, Q: ImageTensor, exposure_gamma: float = 1.0, monitor: ConvergenceMonitor | None = None
) -> ImageTensor:
    """clamp01(P * Q^(1/exposure_gamma))."""
    return clamp01(P * power(Q, 1.0 / exposure_gamma), monitor, where="output")


def run_unfolding(
    I: ImageTensor,
    config: SolverConfig | None = None,
    weights: WeightArchive | None = None,
    prior_r: Prior | None = None,
    prior_l: Prior | None = None,
    monitor: ConvergenceMonitor | None = None,
) -> EnhanceResult:
    """
    Chạy toàn bộ unfolding trên ảnh `I`.

    Args:
        I: ảnh RGB đầu vào.
        config: cấu hình solver (mặc định SolverConfig()).
        weights: archive trọng số cho phân rã học và các prior học.
        prior_r, prior_l: callable prior tường minh; nếu None thì dựng theo `config`.
        monitor: nơi ghi lịch sử residual và số NaN bị kẹp.

    Returns:
        EnhanceResult.
    """
    config = config or SolverConfig()
    monitor = monitor or ConvergenceMonitor()
    if I.channels != 3:
        raise DimensionError(f"enhancement needs a 3-channel image, got {I.channels} channels")
    if prior_r is None or prior_l is None:
        built_r, built_l = build_priors(config, weights)
        prior_r = prior_r or built_r
        prior_l = prior_l or built_l

    R0, L0 = initialize_decomposition(I, weights, config.epsilon, monitor)
    state = AdmmState.initial(R0, L0, config.mu0)
    for k in range(1, config.iterations + 1):
        state = state.update(k=k)
        mu = state.mu
        state = state.update(R=update_R(state, I, config.epsilon))
        _check_finite(state, ("R",))
        state = state.update(L=update_L(state, I, config.epsilon))
        _check_finite(state, ("L",))
        state = state.update(P=update_P(state, prior_r, config.lam))
        _check_finite(state, ("P",))
        state = state.update(Q=update_Q(state, prior_l, config.gamma))
        _check_finite(state, ("Q",))
        Y1, Y2, next_mu = update_multipliers(state, config.rho)
        state = state.update(Y1=Y1, Y2=Y2)
        _check_finite(state, ("Y1", "Y2"))
        monitor.record(state, I, mu)
        state = state.update(mu=next_mu)

    output = compose_output(state.P, state.Q, config.exposure_gamma, monitor)
    logger.debug("unfolding done: %d iterations, %d NaN values clamped", config.iterations, monitor.nan_count)
    return EnhanceResult(
        output=output, R0=R0, L0=L0, state=state, history=tuple(monitor.history), nan_count=monitor.nan_count
    )
