# src/tensor_core/conv.py
"""
Các kernel tích chập trên ImageTensor (layout H, W, C).

Kernel của `conv2d` có dạng (out_ch, in_ch, kh, kw), của `transposed_conv2d`
có dạng (in_ch, out_ch, kh, kw); truyền cùng một mảng cho cả hai hàm sẽ được
một cặp toán tử liên hợp.
"""
import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .errors import DimensionError
from .image_tensor import ImageTensor


def _resolve_padding(padding: str | int, kh: int, kw: int) -> tuple[int, int]:
    if padding == "valid":
        return 0, 0
    if padding == "same":
        return (kh - 1) // 2, (kw - 1) // 2
    if isinstance(padding, int) and padding >= 0:
        return padding, padding
    raise DimensionError(f"padding must be 'same', 'valid' or a non-negative int, got {padding!r}")


def _check_bias(bias: np.ndarray | None, channels: int) -> None:
    if bias is not None and bias.shape != (channels,):
        raise DimensionError(f"bias shape {bias.shape} does not match {channels} output channels")


def conv2d(
    x: ImageTensor,
    kernel: np.ndarray,
    stride: int = 1,
    padding: str | int = "same",
    bias: np.ndarray | None = None,
) -> ImageTensor:
    """
    Tương quan chéo (cross-correlation) với zero padding.

    Args:
        x: ảnh đầu vào (H, W, in_ch).
        kernel: mảng (out_ch, in_ch, kh, kw).
        stride: bước trượt, >= 1.
        padding: "same", "valid" hoặc số nguyên không âm.
        bias: vector (out_ch,) hoặc None.

    Returns:
        ImageTensor với kích thước mỗi trục floor((H + 2p - kh) / stride) + 1.
    """
    if kernel.ndim != 4:
        raise DimensionError(f"kernel must be (out_ch, in_ch, kh, kw), got shape {kernel.shape}")
    if stride < 1:
        raise DimensionError(f"stride must be >= 1, got {stride}")
    out_ch, in_ch, kh, kw = kernel.shape
    if in_ch != x.channels:
        raise DimensionError(f"kernel expects {in_ch} input channels, image has {x.channels}")
    _check_bias(bias, out_ch)
    ph, pw = _resolve_padding(padding, kh, kw)

    xp = np.pad(x.data, ((ph, ph), (pw, pw), (0, 0)))
    if xp.shape[0] < kh or xp.shape[1] < kw:
        raise DimensionError(f"kernel {kh}x{kw} is larger than padded input {xp.shape[:2]}")
    # (Ho, Wo, C, kh, kw)
    windows = sliding_window_view(xp, (kh, kw), axis=(0, 1))[::stride, ::stride]
    out = np.tensordot(windows, kernel.astype(np.float32), axes=([2, 3, 4], [1, 2, 3]))
    if bias is not None:
        out = out + bias.astype(np.float32)
    return ImageTensor(out)


def transposed_conv2d(
    x: ImageTensor,
    kernel: np.ndarray,
    stride: int = 2,
    padding: int = 0,
    bias: np.ndarray | None = None,
) -> ImageTensor:
    """
    Toán tử liên hợp của `conv2d` với cùng kernel và stride.
    Kích thước mỗi trục: (H - 1) * stride + kh - 2 * padding.
    """
    if kernel.ndim != 4:
        raise DimensionError(f"kernel must be (in_ch, out_ch, kh, kw), got shape {kernel.shape}")
    if stride < 1:
        raise DimensionError(f"stride must be >= 1, got {stride}")
    in_ch, out_ch, kh, kw = kernel.shape
    if in_ch != x.channels:
        raise DimensionError(f"kernel expects {in_ch} input channels, image has {x.channels}")
    _check_bias(bias, out_ch)

    h, w, _ = x.shape
    full_h, full_w = (h - 1) * stride + kh, (w - 1) * stride + kw
    if full_h - 2 * padding < 1 or full_w - 2 * padding < 1:
        raise DimensionError(f"padding {padding} leaves an empty output for input {x.shape}")
    out = np.zeros((full_h, full_w, out_ch), dtype=np.float32)
    k = kernel.astype(np.float32)
    for i in range(kh):
        for j in range(kw):
            out[i:i + (h - 1) * stride + 1:stride, j:j + (w - 1) * stride + 1:stride] += x.data @ k[:, :, i, j]
    if padding:
        out = out[padding:full_h - padding, padding:full_w - padding]
    if bias is not None:
        out = out + bias.astype(np.float32)
    return ImageTensor(out)
