# src/tensor_core/errors.py
"""Ngoại lệ dùng chung của tensor_core."""


class DimensionError(ValueError):
    """Kích thước, số kênh, stride hoặc patch size của tensor không tương thích."""
