# src/data_processing/image_io.py
"""Chuyển đổi giữa file PNG RGB 8-bit và ImageTensor."""
from pathlib import Path

import numpy as np
from PIL import Image

from src.tensor_core import ImageTensor, clamp01

PNG_SIGNATURE = b"\x89PNG\r\n\x1a\n"
_COLOR_TYPES = {0: "grayscale", 2: "RGB", 3: "palette", 4: "grayscale+alpha", 6: "RGBA"}


class ImageFormatError(ValueError):
    """File không phải PNG RGB 8-bit."""


def _check_png_header(path: Path) -> None:
    """Đọc bit depth và color type trực tiếp từ chunk IHDR."""
    with path.open("rb") as f:
        head = f.read(26)
    if len(head) < 26 or head[:8] != PNG_SIGNATURE or head[12:16] != b"IHDR":
        raise ImageFormatError(f"{path}: not a PNG file")
    bit_depth, color_type = head[24], head[25]
    if bit_depth != 8 or color_type != 2:
        kind = _COLOR_TYPES.get(color_type, f"color type {color_type}")
        raise ImageFormatError(f"{path}: unsupported PNG ({bit_depth}-bit {kind}); only 8-bit RGB is supported")


def load_image(path: str | Path) -> ImageTensor:
    """
    Đọc ảnh PNG RGB 8-bit.

    Args:
        path: đường dẫn file PNG.

    Returns:
        ImageTensor (H, W, 3) với giá trị byte / 255.
    """
    path = Path(path)
    _check_png_header(path)
    with Image.open(path) as img:
        pixels = np.asarray(img.convert("RGB"), dtype=np.uint8)
    return ImageTensor(pixels.astype(np.float32) / np.float32(255.0))


def to_bytes(image: ImageTensor) -> np.ndarray:
    """Lượng tử hóa về uint8 bằng round(v * 255) sau khi kẹp về [0, 1]."""
    if image.channels != 3:
        raise ImageFormatError(f"only 3-channel images can be saved, got {image.channels} channels")
    return np.round(clamp01(image).data * np.float32(255.0)).astype(np.uint8)


def save_image(image: ImageTensor, path: str | Path) -> None:
    """Ghi ảnh ra file PNG RGB 8-bit."""
    Image.fromarray(to_bytes(image)).save(Path(path), format="PNG")
