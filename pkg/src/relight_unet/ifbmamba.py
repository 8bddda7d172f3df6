# src/relight_unet/ifbmamba.py
"""
Khối Mamba hai chiều có hợp nhất illumination (IFBMamba).

Đặc trưng reflectance và illumination (đã lấy mẫu lại) được cắt thành token
patch và chiếu về cùng độ rộng; hai dòng token được cộng lại, quét bằng cặp
Mamba xuôi/ngược, chiếu ngược về không gian patch rồi cộng vào đặc trưng đầu vào.

Tên trong archive, dưới prefix của khối (ví dụ "relight/enc0/ifbm."):
    proj.w         (d, P*P*C)     chiếu patch reflectance thành token
    illum_proj.w   (d, P*P*3)     chiếu patch illumination thành token
    unproj.w       (P*P*C, d)     chiếu ngược về không gian patch
    cls            (d,)           chỉ có khi dùng class_token
    fwd.*, bwd.*                  các khối Mamba (bwd chỉ có khi bidirectional)
"""
from dataclasses import dataclass

import numpy as np

from src.data_processing.weight_archive import WeightArchive
from src.ssm_mamba import SsmBlockParams, bidirectional_mamba, mamba_block, param_shapes
from src.ssm_mamba.block import ScanFn
from src.ssm_mamba.scan import selective_scan_par
from src.tensor_core import DimensionError, ImageTensor, TokenSequence, area_downsample, patchify, unpatchify

ILLUMINATION_CHANNELS = 3


@dataclass(frozen=True, eq=False)
class IfbmambaBlock:
    """Tham số của một khối IFBMamba; `illum_proj_w`, `bwd`, `cls` là None khi tắt tính năng tương ứng."""

    patch: int
    proj_w: np.ndarray
    unproj_w: np.ndarray
    fwd: SsmBlockParams
    illum_proj_w: np.ndarray | None = None
    bwd: SsmBlockParams | None = None
    cls: np.ndarray | None = None

    @property
    def dim(self) -> int:
        return self.proj_w.shape[0]

    @property
    def channels(self) -> int:
        return self.proj_w.shape[1] // self.patch ** 2

    @staticmethod
    def shapes(
        channels: int,
        patch: int,
        state: int,
        expand: int,
        class_token: bool = False,
        bidirectional: bool = True,
        fuse_illumination: bool = True,
    ) -> dict[str, tuple[int, ...]]:
        dim = patch ** 2 * channels
        out = {"proj.w": (dim, patch ** 2 * channels), "unproj.w": (patch ** 2 * channels, dim)}
        if fuse_illumination:
            out["illum_proj.w"] = (dim, patch ** 2 * ILLUMINATION_CHANNELS)
        if class_token:
            out["cls"] = (dim,)
        branches = ("fwd", "bwd") if bidirectional else ("fwd",)
        for branch in branches:
            out.update({f"{branch}.{n}": s for n, s in param_shapes(dim, state, expand).items()})
        return out

    @classmethod
    def from_archive(
        cls,
        archive: WeightArchive,
        prefix: str,
        patch: int,
        class_token: bool = False,
        bidirectional: bool = True,
        fuse_illumination: bool = True,
    ) -> "IfbmambaBlock":
        required = [prefix + "proj.w", prefix + "unproj.w"]
        if fuse_illumination:
            required.append(prefix + "illum_proj.w")
        if class_token:
            required.append(prefix + "cls")
        archive.require(required)
        return cls(
            patch=patch,
            proj_w=archive[prefix + "proj.w"],
            unproj_w=archive[prefix + "unproj.w"],
            fwd=SsmBlockParams.from_archive(archive, prefix + "fwd."),
            illum_proj_w=archive[prefix + "illum_proj.w"] if fuse_illumination else None,
            bwd=SsmBlockParams.from_archive(archive, prefix + "bwd.") if bidirectional else None,
            cls=archive[prefix + "cls"] if class_token else None,
        )

    def fused_tokens(self, refl_feat: ImageTensor, illum: ImageTensor | None) -> TokenSequence:
        """Chuỗi token trước khi quét: phép chiếu patch của R (+ L), class token đứng đầu nếu có."""
        if refl_feat.channels != self.channels:
            raise DimensionError(f"IFBMamba unit expects {self.channels} channels, got {refl_feat.channels}")
        tokens = patchify(refl_feat, self.patch)
        fused = tokens.data @ self.proj_w.T
        if self.illum_proj_w is not None:
            if illum is None:
                raise DimensionError("illumination-fused unit called without an illumination tensor")
            illum = _match_resolution(illum, refl_feat)
            fused = fused + patchify(illum, self.patch).data @ self.illum_proj_w.T
        if self.cls is not None:
            return TokenSequence(np.vstack([self.cls[None, :], fused]), grid=tokens.grid, has_cls=True)
        return tokens.with_data(fused)


def _match_resolution(illum: ImageTensor, target: ImageTensor) -> ImageTensor:
    """Lấy trung bình vùng để đưa illumination về độ phân giải của `target`."""
    if illum.shape[:2] == target.shape[:2]:
        return illum
    factor = illum.height // target.height
    if factor < 1 or illum.height != factor * target.height or illum.width != factor * target.width:
        raise DimensionError(f"illumination {illum.shape[:2]} cannot be area-resampled to {target.shape[:2]}")
    return area_downsample(illum, factor)


def ifbmamba_forward(
    refl_feat: ImageTensor,
    illum: ImageTensor | None,
    block: IfbmambaBlock,
    scan: ScanFn = selective_scan_par,
) -> ImageTensor:
    """
    Chạy một khối IFBMamba.

    Args:
        refl_feat: đặc trưng reflectance (H, W, C).
        illum: illumination, hoặc None khi không hợp nhất.
        block: tham số của khối.
        scan: kernel scan.

    Returns:
        refl_feat cộng phần hiệu chỉnh, cùng shape.
    """
    fused = block.fused_tokens(refl_feat, illum)
    if block.bwd is not None:
        scanned = bidirectional_mamba(fused, block.fwd, block.bwd, scan)
    else:
        scanned = mamba_block(fused, block.fwd, "forward", scan)
    restored = unpatchify(scanned.with_data(scanned.data @ block.unproj_w.T))
    return refl_feat + restored
