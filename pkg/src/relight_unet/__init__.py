# src/relight_unet/__init__.py
"""Mạng dạng U dẫn hướng bởi illumination, xây từ các khối IFBMamba."""
from .config import UNetConfig
from .ifbmamba import IfbmambaBlock, ifbmamba_forward
from .network import RelightNetwork, canonical_shapes, init_entries, relight_forward

__all__ = [
    "IfbmambaBlock",
    "RelightNetwork",
    "UNetConfig",
    "canonical_shapes",
    "ifbmamba_forward",
    "init_entries",
    "relight_forward",
]
