# src/retinex_admm/subproblems.py
"""
Các bước cập nhật ADMM dạng đóng. Mọi cập nhật đều cục bộ theo pixel: bài toán
con bậc hai của R và L tách thành một phương trình vô hướng cho mỗi phần tử.
"""
from typing import Callable

import numpy as np

from src.tensor_core import ImageTensor

from .state import AdmmState

Prior = Callable[[ImageTensor, ImageTensor | None], ImageTensor]


class PriorEvaluationError(RuntimeError):
    """Prior bị lỗi bên trong bài toán con P hoặc Q."""

    def __init__(self, subproblem: str, cause: Exception):
        self.subproblem = subproblem
        super().__init__(f"{subproblem}: prior evaluation failed: {cause}")


def _closed_form(
    I: np.ndarray, other: np.ndarray, target: np.ndarray, multiplier: np.ndarray, mu: float, epsilon: float
) -> np.ndarray:
    """
    Nghiệm theo từng phần tử của
    argmin_X ||I - X*other||^2 + <Y, X - target> + mu/2 ||X - target||^2.

    Mẫu số được cộng thêm `epsilon` trước khi chia.
    """
    mu = np.float32(mu)
    numerator = np.float32(2.0) * I * other + mu * target - multiplier
    denominator = np.float32(2.0) * other * other + mu
    return numerator / (denominator + np.float32(epsilon))


def update_R(state: AdmmState, I: ImageTensor, epsilon: float = 1e-6) -> ImageTensor:
    """R = (2 I L + mu P - Y1) / (2 L^2 + mu + epsilon)."""
    return ImageTensor(_closed_form(I.data, state.L.data, state.P.data, state.Y1.data, state.mu, epsilon))


def update_L(state: AdmmState, I: ImageTensor, epsilon: float = 1e-6) -> ImageTensor:
    """L = (2 I R + mu Q - Y2) / (2 R^2 + mu + epsilon)."""
    return ImageTensor(_closed_form(I.data, state.R.data, state.Q.data, state.Y2.data, state.mu, epsilon))


def _denoise_step(
    x: ImageTensor, multiplier: ImageTensor, mu: float, weight: float,
    prior: Prior, context: ImageTensor | None, subproblem: str,
) -> ImageTensor:
    noisy = ImageTensor(x.data + multiplier.data / np.float32(mu))
    try:
        correction = prior(noisy, context)
    except Exception as e:
        raise PriorEvaluationError(subproblem, e) from e
    return ImageTensor(noisy.data + np.float32(weight / mu) * correction.data)


def update_P(state: AdmmState, prior: Prior, lam: float) -> ImageTensor:
    """M = R + Y1/mu, P = M + (lam/mu) f(M); L hiện tại là ngữ cảnh illumination cho prior."""
    return _denoise_step(state.R, state.Y1, state.mu, lam, prior, state.L, "P-subproblem")


def update_Q(state: AdmmState, prior: Prior, gamma: float) -> ImageTensor:
    """N = L + Y2/mu, Q = N + (gamma/mu) g(N)."""
    return _denoise_step(state.L, state.Y2, state.mu, gamma, prior, None, "Q-subproblem")


def update_multipliers(state: AdmmState, rho: float = 1.0) -> tuple[ImageTensor, ImageTensor, float]:
    """
    Bước dual ascent cho nhân tử Lagrange.

    Returns:
        (Y1, Y2, mu mới = rho * mu).
    """
    mu = np.float32(state.mu)
    Y1 = ImageTensor(state.Y1.data + mu * (state.R.data - state.P.data))
    Y2 = ImageTensor(state.Y2.data + mu * (state.L.data - state.Q.data))
    return Y1, Y2, rho * state.mu
