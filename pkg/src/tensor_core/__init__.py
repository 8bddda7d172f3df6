# src/tensor_core/__init__.py
"""Tensor ảnh/đặc trưng dạng dày và các kernel mà mọi package khác dùng chung."""
from .conv import conv2d, transposed_conv2d
from .errors import DimensionError
from .image_tensor import ImageTensor, TokenSequence
from .ops import DIVISION_EPSILON, area_downsample, clamp01, elementwise, flip
from .tokens import patchify, unpatchify

__all__ = [
    "DIVISION_EPSILON",
    "DimensionError",
    "ImageTensor",
    "TokenSequence",
    "area_downsample",
    "clamp01",
    "conv2d",
    "elementwise",
    "flip",
    "patchify",
    "transposed_conv2d",
    "unpatchify",
]
