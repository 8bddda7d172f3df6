# src/priors/learned.py
"""
Các prior dựa trên mạng học.

* mamba_block: token patch -> embed -> một khối Mamba chiều xuôi -> unembed,
  cộng lại vào input (không có dạng U, không dùng illumination).
  Tên tensor dưới "<prefix>mamba/": embed.w (dim, P*P*3), unembed.w (P*P*3, dim), block.*
* ifbmamba_unet / vanilla_mamba_unet: U-net relighting, tensor dưới "<prefix>relight/".
"""
from dataclasses import dataclass

import numpy as np

from src.data_processing.weight_archive import WeightArchive
from src.relight_unet import RelightNetwork, UNetConfig
from src.ssm_mamba import SsmBlockParams, mamba_block, param_shapes
from src.ssm_mamba.params import DEFAULT_DIM, DEFAULT_EXPAND, DEFAULT_STATE
from src.tensor_core import ImageTensor, patchify, unpatchify

MAMBA_PREFIX = "mamba/"
RELIGHT_PREFIX = "relight/"


class PriorContextError(ValueError):
    """Prior có hợp nhất illumination nhưng được gọi mà không có tensor illumination."""


@dataclass(frozen=True, eq=False)
class MambaTokenPrior:
    """Prior mamba_block: embed token, quét một khối Mamba rồi unembed."""

    patch: int
    embed_w: np.ndarray
    unembed_w: np.ndarray
    block: SsmBlockParams

    @staticmethod
    def shapes(
        patch: int = 1,
        dim: int = DEFAULT_DIM,
        state: int = DEFAULT_STATE,
        expand: int = DEFAULT_EXPAND,
        channels: int = 3,
    ) -> dict[str, tuple[int, ...]]:
        width = patch * patch * channels
        out = {"embed.w": (dim, width), "unembed.w": (width, dim)}
        out.update({f"block.{n}": s for n, s in param_shapes(dim, state, expand).items()})
        return out

    @classmethod
    def from_archive(cls, archive: WeightArchive, prefix: str, patch: int = 1) -> "MambaTokenPrior":
        archive.require([prefix + "embed.w", prefix + "unembed.w"])
        return cls(
            patch=patch,
            embed_w=archive[prefix + "embed.w"],
            unembed_w=archive[prefix + "unembed.w"],
            block=SsmBlockParams.from_archive(archive, prefix + "block."),
        )

    def restore(self, x: ImageTensor) -> ImageTensor:
        """Ảnh đã khôi phục: x cộng phần hiệu chỉnh của mạng."""
        tokens = patchify(x, self.patch)
        embedded = tokens.with_data(tokens.data @ self.embed_w.T)
        scanned = mamba_block(embedded, self.block, "forward")
        return x + unpatchify(tokens.with_data(scanned.data @ self.unembed_w.T))


def mamba_block_residual(x: ImageTensor, context: ImageTensor | None = None, *, model: MambaTokenPrior) -> ImageTensor:
    return model.restore(x) - x


def ifbmamba_unet_residual(
    x: ImageTensor,
    context: ImageTensor | None = None,
    *,
    network: RelightNetwork,
) -> ImageTensor:
    if context is None:
        if network.config.fuse_illumination:
            raise PriorContextError("ifbmamba_unet prior needs the illumination tensor as context")
        context = x
    return network.forward(x, context) - x


def load_mamba_prior(weights: WeightArchive, prefix: str, patch: int = 1) -> MambaTokenPrior:
    return MambaTokenPrior.from_archive(weights, prefix + MAMBA_PREFIX, patch)


def load_relight_network(weights: WeightArchive, prefix: str, config: UNetConfig) -> RelightNetwork:
    return RelightNetwork.from_archive(weights, config, prefix + RELIGHT_PREFIX)


def init_mamba_entries(
    rng: np.random.Generator | None = None,
    prefix: str = "prior_l/",
    patch: int = 1,
    std: float = 0.02,
) -> dict[str, np.ndarray]:
    """Các tensor chuẩn của prior mamba_block, lấy mẫu N(0, std^2) hoặc bằng 0 khi rng là None."""
    return {
        prefix + MAMBA_PREFIX + n: (
            np.zeros(s, dtype=np.float32) if rng is None else rng.normal(0.0, std, s).astype(np.float32)
        )
        for n, s in MambaTokenPrior.shapes(patch).items()
    }
