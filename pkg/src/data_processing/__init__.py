# src/data_processing/__init__.py
"""Đọc/ghi ảnh PNG và file trọng số .llew."""
from .image_io import ImageFormatError, load_image, save_image
from .weight_archive import MissingWeightsError, WeightArchive, WeightArchiveError, load_weights, save_weights

__all__ = [
    "ImageFormatError",
    "MissingWeightsError",
    "WeightArchive",
    "WeightArchiveError",
    "load_image",
    "load_weights",
    "save_image",
    "save_weights",
]
