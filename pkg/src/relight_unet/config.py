# src/relight_unet/config.py
"""Cấu hình kiến trúc của U-net relighting."""
from dataclasses import dataclass

from src.ssm_mamba.params import DEFAULT_EXPAND, DEFAULT_STATE
from src.tensor_core import DimensionError

LEVELS = 2


@dataclass(frozen=True)
class UNetConfig:
    """
    U-net hai tầng. Tầng i chạy ở độ phân giải H/2^i x W/2^i với
    2^i * base_channels kênh đặc trưng; `patch_sizes[i]` là patch size của token ở tầng đó.
    """

    base_channels: int = 16
    patch_sizes: tuple[int, int] = (1, 1)
    blocks_per_level: int = 1
    class_token: bool = False
    state: int = DEFAULT_STATE
    expand: int = DEFAULT_EXPAND
    # switch ablation: False/False là backbone Mamba thuần
    bidirectional: bool = True
    fuse_illumination: bool = True

    def __post_init__(self):
        if self.base_channels < 1:
            raise ValueError(f"base_channels must be >= 1, got {self.base_channels}")
        if len(self.patch_sizes) != LEVELS or min(self.patch_sizes) < 1:
            raise ValueError(f"patch_sizes must hold {LEVELS} positive sizes, got {self.patch_sizes}")
        if self.blocks_per_level < 1:
            raise ValueError(f"blocks_per_level must be >= 1, got {self.blocks_per_level}")
        if self.state < 1 or self.expand < 1:
            raise ValueError(f"state and expand must be >= 1, got {self.state}, {self.expand}")

    @property
    def levels(self) -> int:
        return LEVELS

    def channels(self, level: int) -> int:
        return self.base_channels * 2 ** level

    def embed_dim(self, level: int) -> int:
        """Độ rộng token ở tầng `level`: P^2 * channels."""
        return self.patch_sizes[level] ** 2 * self.channels(level)

    def feature_shape(self, height: int, width: int, level: int) -> tuple[int, int, int]:
        return height // 2 ** level, width // 2 ** level, self.channels(level)

    def check_input(self, height: int, width: int) -> None:
        """Ném DimensionError khi kích thước ảnh không chia hết cho downsample hoặc patch size."""
        for level in range(LEVELS):
            scale = 2 ** level
            patch = self.patch_sizes[level]
            if height % scale or width % scale or (height // scale) % patch or (width // scale) % patch:
                raise DimensionError(
                    f"input {height}x{width} incompatible with level {level} "
                    f"(downsample {scale}, patch {patch})"
                )
