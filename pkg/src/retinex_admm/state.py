# src/retinex_admm/state.py
"""Cấu hình solver và tập biến của mỗi vòng lặp unfolding."""
from dataclasses import dataclass, field, replace

from src.relight_unet import UNetConfig
from src.tensor_core import DIVISION_EPSILON, DimensionError, ImageTensor

STATE_TENSORS = ("R", "L", "P", "Q", "Y1", "Y2")


class NonFiniteStateError(RuntimeError):
    """Một tensor trạng thái bị NaN hoặc Inf trong một vòng lặp."""

    def __init__(self, iteration: int, tensor_name: str):
        self.iteration = iteration
        self.tensor_name = tensor_name
        super().__init__(f"non-finite values in {tensor_name} at iteration {iteration}")


@dataclass(frozen=True)
class SolverConfig:
    """
    Tham số của bộ giải. `lam`, `gamma` là trọng số prior cho R và L;
    `mu0`, `rho` là penalty ban đầu và hệ số tăng mỗi vòng.
    """

    lam: float = 0.1
    gamma: float = 0.05
    mu0: float = 1.0
    rho: float = 1.0
    iterations: int = 3
    prior_r: str = "zero"
    prior_l: str = "zero"
    exposure_gamma: float = 1.0
    epsilon: float = DIVISION_EPSILON
    # tham số của các prior cổ điển
    box_radius: int = 1
    tv_steps: int = 5
    tv_weight: float = 0.1
    unet: UNetConfig = field(default_factory=UNetConfig)

    def __post_init__(self):
        if self.lam <= 0 or self.gamma <= 0 or self.mu0 <= 0:
            raise ValueError(f"lambda, gamma and mu0 must be > 0, got {self.lam}, {self.gamma}, {self.mu0}")
        if self.rho < 1:
            raise ValueError(f"rho must be >= 1, got {self.rho}")
        if self.iterations < 1:
            raise ValueError(f"iterations must be >= 1, got {self.iterations}")
        if self.exposure_gamma <= 0:
            raise ValueError(f"exposure_gamma must be > 0, got {self.exposure_gamma}")
        if self.epsilon <= 0:
            raise ValueError(f"epsilon must be > 0, got {self.epsilon}")

    def prior_options(self, kind: str) -> dict:
        """Tham số phụ truyền vào build_prior cho loại prior `kind`."""
        if kind == "box_residual":
            return {"radius": self.box_radius}
        if kind == "tv_residual":
            return {"steps": self.tv_steps, "weight": self.tv_weight}
        return {}


@dataclass(frozen=True)
class AdmmState:
    """Trạng thái bất biến (R, L, P, Q, Y1, Y2, mu) sau vòng lặp thứ k."""

    R: ImageTensor
    L: ImageTensor
    P: ImageTensor
    Q: ImageTensor
    Y1: ImageTensor
    Y2: ImageTensor
    mu: float
    k: int = 0

    def __post_init__(self):
        shapes = {name: getattr(self, name).shape for name in STATE_TENSORS}
        if len(set(shapes.values())) != 1:
            raise DimensionError(f"state tensors disagree in shape: {shapes}")
        if not self.mu > 0:
            raise ValueError(f"mu must be > 0, got {self.mu}")

    @classmethod
    def initial(cls, R0: ImageTensor, L0: ImageTensor, mu0: float) -> "AdmmState":
        """Trạng thái ban đầu: P = R0, Q = L0, nhân tử Lagrange bằng 0."""
        zeros = ImageTensor.zeros(*R0.shape)
        return cls(R=R0, L=L0, P=R0, Q=L0, Y1=zeros, Y2=zeros, mu=mu0, k=0)

    def update(self, **changes) -> "AdmmState":
        return replace(self, **changes)
