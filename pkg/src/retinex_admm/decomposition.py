# src/retinex_admm/decomposition.py
"""
Phân rã ban đầu ảnh đầu vào thành reflectance và illumination.

Chế độ học: bốn lớp conv 3x3 3 -> 16 -> 16 -> 16 -> 6, ReLU ở giữa và sigmoid ở
đầu ra; kênh 0..2 là R0, kênh 3..5 là L0. Tên trọng số:
decom/conv{i}.w (out, in, 3, 3) và decom/conv{i}.b (out,).
Chế độ cổ điển: L0 = max-RGB broadcast ra 3 kênh, R0 = I / (L0 + eps).
"""
import logging

import numpy as np

from src.data_processing.weight_archive import WeightArchive
from src.tensor_core import DIVISION_EPSILON, DimensionError, ImageTensor, clamp01, conv2d, elementwise
from src.tensor_core.ops import NanSink, channel_max, relu, sigmoid

logger = logging.getLogger(__name__)

DECOMPOSITION_PREFIX = "decom/"
DECOMPOSITION_CHANNELS = (3, 16, 16, 16, 6)
KERNEL_SIZE = 3


def decomposition_shapes(prefix: str = DECOMPOSITION_PREFIX) -> dict[str, tuple[int, ...]]:
    shapes = {}
    for i, (cin, cout) in enumerate(zip(DECOMPOSITION_CHANNELS, DECOMPOSITION_CHANNELS[1:])):
        shapes[f"{prefix}conv{i}.w"] = (cout, cin, KERNEL_SIZE, KERNEL_SIZE)
        shapes[f"{prefix}conv{i}.b"] = (cout,)
    return shapes


def init_decomposition_entries(
    rng: np.random.Generator | None = None,
    prefix: str = DECOMPOSITION_PREFIX,
    std: float = 0.02,
) -> dict[str, np.ndarray]:
    return {
        n: (np.zeros(s, dtype=np.float32) if rng is None else rng.normal(0.0, std, s).astype(np.float32))
        for n, s in decomposition_shapes(prefix).items()
    }


def classical_decomposition(
    I: ImageTensor, epsilon: float = DIVISION_EPSILON, monitor: NanSink | None = None,
) -> tuple[ImageTensor, ImageTensor]:
    L0 = channel_max(I)
    R0 = elementwise(I, L0, "div", epsilon)
    return clamp01(R0, monitor, "R0"), clamp01(L0, monitor, "L0")


def learned_decomposition(
    I: ImageTensor, weights: WeightArchive, monitor: NanSink | None = None,
) -> tuple[ImageTensor, ImageTensor]:
    shapes = decomposition_shapes()
    weights.require(list(shapes))
    x = I
    last = len(DECOMPOSITION_CHANNELS) - 2
    for i in range(last + 1):
        x = conv2d(x, weights[f"{DECOMPOSITION_PREFIX}conv{i}.w"], padding="same",
                   bias=weights[f"{DECOMPOSITION_PREFIX}conv{i}.b"])
        x = sigmoid(x) if i == last else relu(x)
    R0 = ImageTensor(x.data[:, :, :3])
    L0 = ImageTensor(x.data[:, :, 3:])
    return clamp01(R0, monitor, "R0"), clamp01(L0, monitor, "L0")


def initialize_decomposition(
    I: ImageTensor,
    weights: WeightArchive | None = None,
    epsilon: float = DIVISION_EPSILON,
    monitor: NanSink | None = None,
) -> tuple[ImageTensor, ImageTensor]:
    """
    Trả về (R0, L0): dùng mạng phân rã khi `weights` có prefix decom/, ngược lại dùng max-RGB.

    Args:
        I: ảnh RGB đầu vào.
        weights: archive trọng số (tùy chọn).
        epsilon: hằng số cộng vào mẫu số ở chế độ cổ điển.
        monitor: nơi đếm NaN bị kẹp khi đưa R0, L0 về [0, 1].
    """
    if I.channels != 3:
        raise DimensionError(f"decomposition needs a 3-channel image, got {I.channels} channels")
    if weights is not None and weights.has_prefix(DECOMPOSITION_PREFIX):
        logger.debug("learned decomposition on %s", I.shape)
        return learned_decomposition(I, weights, monitor)
    logger.debug("classical max-RGB decomposition on %s", I.shape)
    return classical_decomposition(I, epsilon, monitor)
