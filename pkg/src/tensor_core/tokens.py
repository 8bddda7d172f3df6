# src/tensor_core/tokens.py
"""Cắt ảnh thành token: ảnh (H, W, C) <-> token (J, P*P*C) theo thứ tự raster."""
import numpy as np
from einops import rearrange

from .errors import DimensionError
from .image_tensor import ImageTensor, TokenSequence


def patchify(x: ImageTensor, patch: int) -> TokenSequence:
    """Cắt ảnh thành các patch patch×patch không chồng lấn, mỗi patch là một token."""
    if patch < 1:
        raise DimensionError(f"patch size must be >= 1, got {patch}")
    h, w, c = x.shape
    if h % patch or w % patch:
        raise DimensionError(f"image {h}x{w} is not divisible by patch size {patch}")
    tokens = rearrange(x.data, "(h p1) (w p2) c -> (h w) (p1 p2 c)", p1=patch, p2=patch)
    return TokenSequence(tokens, grid=(h // patch, w // patch, patch, c))


def unpatchify(tokens: TokenSequence) -> ImageTensor:
    """Dựng lại ảnh từ token theo `grid`; class token (nếu có) bị bỏ qua."""
    if tokens.grid is None:
        raise DimensionError("token sequence carries no patch grid; it was not produced by patchify")
    rows, cols, patch, channels = tokens.grid
    data = tokens.data[1:] if tokens.has_cls else tokens.data
    if data.shape != (rows * cols, patch * patch * channels):
        raise DimensionError(
            f"token matrix {data.shape} does not fit grid {rows}x{cols} of {patch}x{patch}x{channels} patches"
        )
    image = rearrange(data, "(h w) (p1 p2 c) -> (h p1) (w p2) c", h=rows, w=cols, p1=patch, p2=patch)
    return ImageTensor(np.ascontiguousarray(image))
