# src/metrics/quality.py
"""PSNR và SSIM một thang đo, tích lũy bằng float64."""
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.signal import convolve2d

from src.tensor_core import DimensionError, ImageTensor

SSIM_WINDOW = 11
SSIM_SIGMA = 1.5
SSIM_K1 = 0.01
SSIM_K2 = 0.03


def _check_pair(x: ImageTensor, y: ImageTensor) -> None:
    if x.shape != y.shape:
        raise DimensionError(f"metric inputs differ in shape: {x.shape} vs {y.shape}")


def _psnr_array(x: np.ndarray, y: np.ndarray, peak: float) -> float:
    mse = float(np.mean((x.astype(np.float64) - y.astype(np.float64)) ** 2))
    if mse == 0.0:
        return math.inf
    return 10.0 * math.log10(peak * peak / mse)


def psnr(x: ImageTensor, y: ImageTensor, peak: float = 1.0) -> float:
    """
    Tính PSNR = 10 log10(peak^2 / MSE).

    Args:
        x, y: hai ảnh cùng shape.
        peak: giá trị đỉnh của thang đo (mặc định 1.0).

    Returns:
        float: PSNR theo dB; hai ảnh giống hệt nhau cho +inf.
    """
    _check_pair(x, y)
    return _psnr_array(x.data, y.data, peak)


def gaussian_window(size: int = SSIM_WINDOW, sigma: float = SSIM_SIGMA) -> np.ndarray:
    coords = np.arange(size, dtype=np.float64) - (size - 1) / 2.0
    g = np.exp(-(coords ** 2) / (2.0 * sigma ** 2))
    g /= g.sum()
    return np.outer(g, g)


def _ssim_channel(x: np.ndarray, y: np.ndarray, window: np.ndarray, peak: float) -> float:
    c1 = (SSIM_K1 * peak) ** 2
    c2 = (SSIM_K2 * peak) ** 2

    def filt(a):
        return convolve2d(a, window, mode="valid")

    mu_x, mu_y = filt(x), filt(y)
    var_x = filt(x * x) - mu_x * mu_x
    var_y = filt(y * y) - mu_y * mu_y
    cov = filt(x * y) - mu_x * mu_y
    ssim_map = ((2 * mu_x * mu_y + c1) * (2 * cov + c2)) / ((mu_x ** 2 + mu_y ** 2 + c1) * (var_x + var_y + c2))
    return float(ssim_map.mean())


def _ssim_channels(x: ImageTensor, y: ImageTensor, peak: float) -> list[float]:
    _check_pair(x, y)
    if x.height < SSIM_WINDOW or x.width < SSIM_WINDOW:
        raise DimensionError(f"SSIM needs at least {SSIM_WINDOW}x{SSIM_WINDOW} pixels, got {x.height}x{x.width}")
    window = gaussian_window()
    xd, yd = x.data.astype(np.float64), y.data.astype(np.float64)
    return [_ssim_channel(xd[:, :, c], yd[:, :, c], window, peak) for c in range(x.channels)]


def ssim(x: ImageTensor, y: ImageTensor, peak: float = 1.0) -> float:
    """SSIM trung bình trên mọi cửa sổ Gaussian 11x11 hợp lệ và trên các kênh."""
    return float(np.mean(_ssim_channels(x, y, peak)))


@dataclass(frozen=True)
class MetricReport:
    """Kết quả so sánh hai ảnh, kèm giá trị theo từng kênh."""

    psnr: float
    ssim: float
    per_channel_psnr: tuple[float, ...] = field(default_factory=tuple)
    per_channel_ssim: tuple[float, ...] = field(default_factory=tuple)

    def to_dict(self) -> dict:
        """Dạng dict an toàn cho JSON; PSNR vô hạn được ghi thành chuỗi "inf"."""
        fmt = lambda v: "inf" if math.isinf(v) else v
        return {
            "psnr": fmt(self.psnr),
            "ssim": self.ssim,
            "per_channel_psnr": [fmt(v) for v in self.per_channel_psnr],
            "per_channel_ssim": list(self.per_channel_ssim),
        }

    def __str__(self) -> str:
        db = "inf" if math.isinf(self.psnr) else f"{self.psnr:.4f}"
        return f"PSNR {db} dB | SSIM {self.ssim:.6f}"


def compare(reference: ImageTensor, test: ImageTensor, peak: float = 1.0) -> MetricReport:
    """Tính cả PSNR và SSIM, kèm giá trị theo từng kênh."""
    _check_pair(reference, test)
    channels = _ssim_channels(reference, test, peak)
    return MetricReport(
        psnr=psnr(reference, test, peak),
        ssim=float(np.mean(channels)),
        per_channel_psnr=tuple(
            _psnr_array(reference.data[:, :, c], test.data[:, :, c], peak) for c in range(reference.channels)
        ),
        per_channel_ssim=tuple(channels),
    )
