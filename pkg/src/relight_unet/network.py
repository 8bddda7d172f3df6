# src/relight_unet/network.py
"""
U-net relighting với các khối IFBMamba.

    enc0: 3x3 conv (3 -> C) -> IFBMamba              F_0: H x W x C
    down: 4x4 stride-2 conv (C -> 2C) -> IFBMamba     F_1: H/2 x W/2 x 2C (bottleneck)
    up:   2x2 transposed conv (2C -> C) + skip(enc0)
    dec0: IFBMamba -> 3x3 conv (C -> 3)

Illumination được lấy trung bình vùng về độ phân giải của từng tầng trước khi hợp nhất.
Tên trong archive tính tương đối với prefix của mạng (mặc định "relight/").
"""
import logging
from dataclasses import dataclass, field

import numpy as np

from src.data_processing.weight_archive import WeightArchive
from src.ssm_mamba.block import ScanFn
from src.ssm_mamba.scan import selective_scan_par
from src.tensor_core import ImageTensor, area_downsample, conv2d, transposed_conv2d

from .config import UNetConfig
from .ifbmamba import IfbmambaBlock, ifbmamba_forward

logger = logging.getLogger(__name__)

DEFAULT_PREFIX = "relight/"

# stage -> tầng đặc trưng mà stage đó chạy trên
STAGE_LEVELS = {"enc0": 0, "enc1": 1, "dec0": 0}


def unit_prefix(stage: str, index: int) -> str:
    """'enc0/ifbm.' cho khối đầu tiên của stage, 'enc0/ifbm1.' cho các khối tiếp theo."""
    return f"{stage}/ifbm{'' if index == 0 else index}."


def conv_shapes(config: UNetConfig) -> dict[str, tuple[int, ...]]:
    c = config.base_channels
    return {
        "enc0/conv.w": (c, 3, 3, 3),
        "enc0/conv.b": (c,),
        "down/conv.w": (2 * c, c, 4, 4),
        "down/conv.b": (2 * c,),
        "up/deconv.w": (2 * c, c, 2, 2),
        "up/deconv.b": (c,),
        "out/conv.w": (3, c, 3, 3),
        "out/conv.b": (3,),
    }


def canonical_shapes(config: UNetConfig) -> dict[str, tuple[int, ...]]:
    """Mọi tên tham số (tương đối với prefix của mạng) cùng shape của nó."""
    shapes = dict(conv_shapes(config))
    for stage, level in STAGE_LEVELS.items():
        unit = IfbmambaBlock.shapes(
            config.channels(level),
            config.patch_sizes[level],
            config.state,
            config.expand,
            class_token=config.class_token,
            bidirectional=config.bidirectional,
            fuse_illumination=config.fuse_illumination,
        )
        for index in range(config.blocks_per_level):
            prefix = unit_prefix(stage, index)
            shapes.update({prefix + n: s for n, s in unit.items()})
    return shapes


@dataclass(frozen=True, eq=False)
class RelightNetwork:
    """U-net relighting đã nạp trọng số."""

    config: UNetConfig
    convs: dict[str, np.ndarray]
    units: dict[str, list[IfbmambaBlock]] = field(default_factory=dict)

    @classmethod
    def from_archive(cls, archive: WeightArchive, config: UNetConfig, prefix: str = DEFAULT_PREFIX) -> "RelightNetwork":
        # kiểm tra mọi tên trong một lượt để lỗi liệt kê đủ tên còn thiếu
        archive.require([prefix + n for n in canonical_shapes(config)])
        convs = {n: archive[prefix + n] for n in conv_shapes(config)}
        units = {
            stage: [
                IfbmambaBlock.from_archive(
                    archive,
                    prefix + unit_prefix(stage, i),
                    patch=config.patch_sizes[level],
                    class_token=config.class_token,
                    bidirectional=config.bidirectional,
                    fuse_illumination=config.fuse_illumination,
                )
                for i in range(config.blocks_per_level)
            ]
            for stage, level in STAGE_LEVELS.items()
        }
        return cls(config=config, convs=convs, units=units)

    def _stage(self, stage: str, x: ImageTensor, illum: ImageTensor, scan: ScanFn) -> ImageTensor:
        for unit in self.units[stage]:
            x = ifbmamba_forward(x, illum, unit, scan)
        return x

    def forward(
        self,
        R: ImageTensor,
        L: ImageTensor,
        scan: ScanFn = selective_scan_par,
        return_features: bool = False,
    ):
        """
        Ảnh H x W x 3 đã khôi phục.

        Args:
            R: reflectance (H, W, 3).
            L: illumination (H, W, 3), dùng khi fuse_illumination bật.
            return_features: trả thêm dict các đặc trưng trung gian.
            scan: kernel scan.
        """
        self.config.check_input(R.height, R.width)
        illum0 = L if self.config.fuse_illumination else None
        illum1 = area_downsample(L, 2) if self.config.fuse_illumination else None
        w = self.convs

        f0 = conv2d(R, w["enc0/conv.w"], padding="same", bias=w["enc0/conv.b"])
        e0 = self._stage("enc0", f0, illum0, scan)
        f1 = conv2d(e0, w["down/conv.w"], stride=2, padding="same", bias=w["down/conv.b"])
        e1 = self._stage("enc1", f1, illum1, scan)
        up = transposed_conv2d(e1, w["up/deconv.w"], stride=2, bias=w["up/deconv.b"])
        d_in = up + e0
        d0 = self._stage("dec0", d_in, illum0, scan)
        out = conv2d(d0, w["out/conv.w"], padding="same", bias=w["out/conv.b"])
        logger.debug("relight forward: F_0 %s, F_1 %s, out %s", f0.shape, f1.shape, out.shape)

        if return_features:
            return out, {"F_0": f0, "enc0": e0, "F_1": f1, "enc1": e1, "up": up, "decoder_input": d_in, "dec0": d0}
        return out


def relight_forward(
    R: ImageTensor,
    L: ImageTensor,
    config: UNetConfig,
    weights: WeightArchive,
    prefix: str = DEFAULT_PREFIX,
) -> ImageTensor:
    """Nạp mạng từ `weights` rồi chạy forward một lần."""
    return RelightNetwork.from_archive(weights, config, prefix).forward(R, L)


def init_entries(
    config: UNetConfig,
    rng: np.random.Generator | None = None,
    prefix: str = DEFAULT_PREFIX,
    std: float = 0.02,
) -> dict[str, np.ndarray]:
    """Các tensor chuẩn của mạng, lấy mẫu N(0, std^2) từ `rng` hoặc toàn 0 khi rng là None."""
    return {
        prefix + n: (np.zeros(s, dtype=np.float32) if rng is None else rng.normal(0.0, std, s).astype(np.float32))
        for n, s in canonical_shapes(config).items()
    }


__all__ = ["RelightNetwork", "canonical_shapes", "init_entries", "relight_forward"]
