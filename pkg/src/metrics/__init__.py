# src/metrics/__init__.py
"""Chỉ số chất lượng ảnh: PSNR và SSIM."""
from .quality import MetricReport, compare, gaussian_window, psnr, ssim

__all__ = ["MetricReport", "compare", "gaussian_window", "psnr", "ssim"]
