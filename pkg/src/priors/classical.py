# src/priors/classical.py
"""
Các prior cổ điển (không cần học). Mỗi hàm trả về denoised(x) - x.
Biên ảnh lặp lại pixel ở mép, nên ảnh hằng là điểm bất động.
"""
import numpy as np
from scipy.ndimage import uniform_filter

from src.tensor_core import ImageTensor

TV_STEP_SIZE = 0.1
TV_EPSILON = 0.05


def zero(x: ImageTensor, context: ImageTensor | None = None) -> ImageTensor:
    """Không hiệu chỉnh gì."""
    return ImageTensor.zeros(*x.shape)


def box_residual(x: ImageTensor, context: ImageTensor | None = None, radius: int = 1) -> ImageTensor:
    if radius < 0:
        raise ValueError(f"box radius must be >= 0, got {radius}")
    size = 2 * radius + 1
    blurred = uniform_filter(x.data.astype(np.float64), size=(size, size, 1), mode="nearest")
    return ImageTensor(blurred.astype(np.float32) - x.data)


def _tv_flux(u: np.ndarray) -> np.ndarray:
    """Tổng trên 4 pixel lân cận của phi(u_lân_cận - u), với phi(s) = s / sqrt(s^2 + eps^2)."""
    flux = np.zeros_like(u)
    for axis in (0, 1):
        d = np.diff(u, axis=axis)
        phi = d / np.sqrt(d * d + TV_EPSILON ** 2)
        head = [slice(None)] * u.ndim
        tail = [slice(None)] * u.ndim
        head[axis] = slice(None, -1)
        tail[axis] = slice(1, None)
        flux[tuple(head)] += phi
        flux[tuple(tail)] -= phi
    return flux


def tv_residual(
    x: ImageTensor,
    context: ImageTensor | None = None,
    steps: int = 5,
    weight: float = 0.1,
    step_size: float = TV_STEP_SIZE,
) -> ImageTensor:
    """
    Chạy `steps` bước khuếch tán total-variation tường minh rồi trừ đi input.
    Mỗi bước là một bước gradient cỡ step_size * weight trên `tv_energy`;
    cỡ bước không quá 0.0125 thì năng lượng luôn giảm.
    """
    if steps < 0 or weight < 0:
        raise ValueError(f"TV steps and weight must be non-negative, got {steps}, {weight}")
    u = x.data.astype(np.float64)
    for _ in range(steps):
        u = u + step_size * weight * _tv_flux(u)
    return ImageTensor(u.astype(np.float32) - x.data)


def tv_energy(x: ImageTensor) -> float:
    """Total variation dị hướng đã làm trơn: tổng trên các cặp lân cận của sqrt(d^2 + eps^2)."""
    u = x.data.astype(np.float64)
    return float(sum(np.sqrt(np.diff(u, axis=axis) ** 2 + TV_EPSILON ** 2).sum() for axis in (0, 1)))
