# src/ssm_mamba/__init__.py
"""Các kernel selective scan (state-space) và khối Mamba một chiều / hai chiều."""
from .block import bidirectional_mamba, mamba_block
from .params import SsmBlockParams, param_shapes
from .scan import ScanError, chunked_linear_scan, selective_scan_par, selective_scan_seq

__all__ = [
    "ScanError",
    "SsmBlockParams",
    "bidirectional_mamba",
    "chunked_linear_scan",
    "mamba_block",
    "param_shapes",
    "selective_scan_par",
    "selective_scan_seq",
]
