# src/tensor_core/image_tensor.py
"""
Các kiểu tensor dày dùng chung cho mọi package.

`ImageTensor` bọc một mảng float32 chỉ-đọc, C-contiguous, shape
(height, width, channels): theo hàng, các kênh xen kẽ, cùng thứ tự bộ nhớ
với dữ liệu PNG sau khi giải mã. `TokenSequence` chứa ma trận token
(length, dim) sinh ra khi cắt ảnh thành patch.
"""
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError


def _frozen_f32(data: np.ndarray) -> np.ndarray:
    arr = np.array(data, dtype=np.float32, order="C", copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class ImageTensor:
    """Tensor float32 H×W×C. Ảnh (I, R, L, output) nằm trong khoảng [0, 1]."""

    data: np.ndarray

    def __post_init__(self):
        arr = self.data
        if arr.ndim == 2:
            arr = arr[:, :, None]
        if arr.ndim != 3:
            raise DimensionError(f"ImageTensor needs a 3-D array (H, W, C), got shape {arr.shape}")
        if min(arr.shape) < 1:
            raise DimensionError(f"ImageTensor dimensions must be >= 1, got {arr.shape}")
        object.__setattr__(self, "data", _frozen_f32(arr))

    @classmethod
    def zeros(cls, height: int, width: int, channels: int = 3) -> "ImageTensor":
        return cls(np.zeros((height, width, channels), dtype=np.float32))

    @classmethod
    def full(cls, height: int, width: int, channels: int, value: float) -> "ImageTensor":
        return cls(np.full((height, width, channels), value, dtype=np.float32))

    @classmethod
    def random(cls, rng: np.random.Generator, height: int, width: int, channels: int = 3) -> "ImageTensor":
        """Ảnh ngẫu nhiên phân phối đều trên [0, 1), sinh từ `rng`."""
        return cls(rng.random((height, width, channels), dtype=np.float32))

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def channels(self) -> int:
        return self.data.shape[2]

    @property
    def shape(self) -> tuple[int, int, int]:
        return self.data.shape

    def numpy(self) -> np.ndarray:
        """Bản sao ghi được của mảng bên dưới."""
        return self.data.copy()

    def is_finite(self) -> bool:
        return bool(np.isfinite(self.data).all())

    def frobenius_norm(self) -> float:
        return float(np.linalg.norm(self.data.astype(np.float64).ravel()))

    # Các phép toán đều đi qua `ops.elementwise`, kiểm tra shape chỉ nằm ở đó.
    def __add__(self, other):
        from .ops import elementwise
        return elementwise(self, other, "add")

    def __sub__(self, other):
        from .ops import elementwise
        return elementwise(self, other, "sub")

    def __mul__(self, other):
        from .ops import elementwise
        return elementwise(self, other, "mul")

    def __truediv__(self, other):
        from .ops import elementwise
        return elementwise(self, other, "div")

    def scale(self, factor: float) -> "ImageTensor":
        return ImageTensor(self.data * np.float32(factor))

    def __repr__(self) -> str:
        return f"ImageTensor(shape={self.shape})"


@dataclass(frozen=True, eq=False)
class TokenSequence:
    """
    Ma trận token float32 (length, dim).

    `grid` ghi lại cách token được cắt từ ảnh (số hàng patch, số cột patch,
    patch size, số kênh) để `unpatchify` dựng lại được ảnh; `has_cls` đánh dấu
    có class token ở đầu chuỗi.
    """

    data: np.ndarray
    grid: tuple[int, int, int, int] | None = None
    has_cls: bool = field(default=False)

    def __post_init__(self):
        if self.data.ndim != 2:
            raise DimensionError(f"TokenSequence needs a 2-D array (length, dim), got shape {self.data.shape}")
        object.__setattr__(self, "data", _frozen_f32(self.data))

    @property
    def length(self) -> int:
        return self.data.shape[0]

    @property
    def dim(self) -> int:
        return self.data.shape[1]

    def with_data(self, data: np.ndarray) -> "TokenSequence":
        """Giữ nguyên grid và class token, thay giá trị mới (dim có thể đổi)."""
        return TokenSequence(data, grid=self.grid, has_cls=self.has_cls)

    def reversed(self) -> "TokenSequence":
        return self.with_data(self.data[::-1])

    def __repr__(self) -> str:
        return f"TokenSequence(length={self.length}, dim={self.dim}, has_cls={self.has_cls})"
