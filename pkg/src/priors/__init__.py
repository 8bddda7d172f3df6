# src/priors/__init__.py
"""
Package này chứa các prior cắm rời dùng trong bài toán con P và Q.
Dictionary PRIORS ánh xạ tên loại prior (dùng trên dòng lệnh và trong .env)
tới hàm đánh giá tương ứng. Mỗi hàm trả về một phần hiệu chỉnh được cộng vào
input, nên prior "zero" nghĩa là không khử nhiễu.
"""
import logging
from dataclasses import dataclass, field, replace
from types import MappingProxyType
from typing import Any, Callable, Mapping

from src.data_processing.weight_archive import WeightArchive
from src.relight_unet import UNetConfig
from src.tensor_core import DimensionError, ImageTensor

from . import classical, learned
from .learned import MambaTokenPrior, PriorContextError

logger = logging.getLogger(__name__)

PRIORS: dict[str, Callable[..., ImageTensor]] = {
    "zero": classical.zero,
    "box_residual": classical.box_residual,
    "tv_residual": classical.tv_residual,
    "mamba_block": learned.mamba_block_residual,
    "ifbmamba_unet": learned.ifbmamba_unet_residual,
    "vanilla_mamba_unet": learned.ifbmamba_unet_residual,
}

LEARNED_KINDS = ("mamba_block", "ifbmamba_unet", "vanilla_mamba_unet")
DEFAULT_PRIOR = "zero"


@dataclass(frozen=True, eq=False)
class PriorFn:
    """Một prior đã được cấu hình: loại prior cùng tham số (hoặc mô hình) của nó."""

    kind: str
    params: Mapping[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in PRIORS:
            raise ValueError(f"Unknown prior '{self.kind}'. Available: {', '.join(PRIORS)}")
        object.__setattr__(self, "params", MappingProxyType(dict(self.params)))

    def __call__(self, x: ImageTensor, context: ImageTensor | None = None) -> ImageTensor:
        return eval_prior(self, x, context)


def eval_prior(prior: PriorFn, x: ImageTensor, context: ImageTensor | None = None) -> ImageTensor:
    """Đánh giá prior trên `x`; kết quả phải giữ nguyên shape của `x`."""
    if context is not None and context.shape[:2] != x.shape[:2]:
        raise DimensionError(f"prior context {context.shape} does not match input {x.shape}")
    out = PRIORS[prior.kind](x, context, **prior.params)
    if out.shape != x.shape:
        raise DimensionError(f"prior '{prior.kind}' changed shape {x.shape} -> {out.shape}")
    return out


def build_prior(
    kind: str,
    weights: WeightArchive | None = None,
    prefix: str = "",
    unet_config: UNetConfig | None = None,
    **options,
) -> PriorFn:
    """
    Dựng một PriorFn.

    Args:
        kind: tên loại prior, phải có trong PRIORS.
        weights: archive trọng số, bắt buộc với các loại prior học.
        prefix: tiền tố tên tensor ("prior_r/" hoặc "prior_l/").
        unet_config: cấu hình U-net cho ifbmamba_unet và vanilla_mamba_unet.
        **options: tham số của prior cổ điển (radius cho box_residual; steps, weight cho tv_residual).

    Returns:
        PriorFn sẵn sàng để gọi.
    """
    if kind not in PRIORS:
        raise ValueError(f"Unknown prior '{kind}'. Available: {', '.join(PRIORS)}")
    if kind not in LEARNED_KINDS:
        return PriorFn(kind, options)
    if weights is None:
        raise ValueError(f"prior '{kind}' needs a weight archive (--weights)")

    if kind == "mamba_block":
        model = learned.load_mamba_prior(weights, prefix, patch=options.get("patch", 1))
        return PriorFn(kind, {"model": model})

    config = unet_config or UNetConfig()
    if kind == "vanilla_mamba_unet":
        config = replace(config, bidirectional=False, fuse_illumination=False)
    network = learned.load_relight_network(weights, prefix, config)
    logger.debug("built %s prior from '%s' (%d tensors)", kind, prefix, len(weights.subset(prefix)))
    return PriorFn(kind, {"network": network})


__all__ = [
    "DEFAULT_PRIOR",
    "LEARNED_KINDS",
    "MambaTokenPrior",
    "PRIORS",
    "PriorContextError",
    "PriorFn",
    "build_prior",
    "eval_prior",
]
