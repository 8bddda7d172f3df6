# src/tensor_core/ops.py
"""
Các phép toán theo từng pixel trên ImageTensor. Mọi hàm đều trả về tensor mới
và không sửa input.
"""
import logging
from typing import Protocol

import numpy as np

from .errors import DimensionError
from .image_tensor import ImageTensor

logger = logging.getLogger(__name__)

# Cộng vào mọi mẫu số khi chia theo pixel.
DIVISION_EPSILON = 1e-6

_ELEMENTWISE = {
    "add": np.add,
    "sub": np.subtract,
    "mul": np.multiply,
}


class NanSink(Protocol):
    """Nơi nhận số lượng NaN bị kẹp (thường là ConvergenceMonitor)."""

    def record_nan(self, count: int, where: str) -> None: ...


def _check_same_shape(a: ImageTensor, b: ImageTensor) -> None:
    if a.shape != b.shape:
        raise DimensionError(f"shape mismatch: {a.shape} vs {b.shape}")


def elementwise(a: ImageTensor, b: ImageTensor, op: str, epsilon: float = DIVISION_EPSILON) -> ImageTensor:
    """
    Phép toán hai ngôi theo pixel: out[p] = a[p] op b[p].

    Args:
        a, b: hai tensor cùng shape.
        op: một trong "add", "sub", "mul", "div".
        epsilon: với "div" thì tính a[p] / (b[p] + epsilon).

    Returns:
        ImageTensor mới cùng shape.
    """
    _check_same_shape(a, b)
    if op == "div":
        return ImageTensor(a.data / (b.data + np.float32(epsilon)))
    try:
        fn = _ELEMENTWISE[op]
    except KeyError:
        raise ValueError(f"unknown elementwise op '{op}', expected one of add, sub, mul, div") from None
    return ImageTensor(fn(a.data, b.data))


def clamp01(x: ImageTensor, monitor: NanSink | None = None, where: str = "clamp01") -> ImageTensor:
    """
    Kẹp giá trị về [0, 1]; NaN được thay bằng 0 và được đếm vào `monitor`.

    Args:
        x: tensor cần kẹp.
        monitor: nơi ghi nhận số NaN (có thể None).
        where: tên vị trí, dùng trong log và trong monitor.
    """
    nan_mask = np.isnan(x.data)
    nan_count = int(nan_mask.sum())
    out = np.clip(np.where(nan_mask, np.float32(0.0), x.data), 0.0, 1.0)
    if nan_count:
        logger.debug("%s: %d NaN values mapped to 0", where, nan_count)
        if monitor is not None:
            monitor.record_nan(nan_count, where)
    return ImageTensor(out)


def relu(x: ImageTensor) -> ImageTensor:
    return ImageTensor(np.maximum(x.data, np.float32(0.0)))


def sigmoid(x: ImageTensor) -> ImageTensor:
    return ImageTensor(sigmoid_array(x.data))


def sigmoid_array(x: np.ndarray) -> np.ndarray:
    # exp(-|x|) không bao giờ tràn số
    e = np.exp(-np.abs(x))
    return np.where(x >= 0, 1.0 / (1.0 + e), e / (1.0 + e)).astype(np.float32)


def silu_array(x: np.ndarray) -> np.ndarray:
    return (x * sigmoid_array(x)).astype(np.float32)


def softplus_array(x: np.ndarray) -> np.ndarray:
    return (np.maximum(x, 0.0) + np.log1p(np.exp(-np.abs(x)))).astype(np.float32)


def channel_max(x: ImageTensor) -> ImageTensor:
    """Max theo kênh, broadcast lại cho mọi kênh."""
    m = x.data.max(axis=2, keepdims=True)
    return ImageTensor(np.broadcast_to(m, x.shape))


def power(x: ImageTensor, exponent: float) -> ImageTensor:
    """x ** exponent trên phần không âm của x."""
    if exponent == 1.0:
        return x
    return ImageTensor(np.power(np.maximum(x.data, 0.0), np.float32(exponent)))


def area_downsample(x: ImageTensor, factor: int) -> ImageTensor:
    """Lấy trung bình trên các khối factor×factor không chồng lấn."""
    if factor < 1:
        raise DimensionError(f"downsample factor must be >= 1, got {factor}")
    if factor == 1:
        return x
    h, w, c = x.shape
    if h % factor or w % factor:
        raise DimensionError(f"image {x.shape} is not divisible by downsample factor {factor}")
    blocks = x.data.reshape(h // factor, factor, w // factor, factor, c)
    return ImageTensor(blocks.mean(axis=(1, 3), dtype=np.float64))


def flip(x: ImageTensor, axis: int) -> ImageTensor:
    """Lật ảnh theo hàng (axis 0) hoặc theo cột (axis 1)."""
    if axis not in (0, 1):
        raise DimensionError(f"flip axis must be 0 or 1, got {axis}")
    return ImageTensor(np.flip(x.data, axis=axis))
