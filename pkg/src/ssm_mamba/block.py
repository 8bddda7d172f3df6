# src/ssm_mamba/block.py
"""
Khối Mamba residual kiểu pre-norm và lớp bọc hai chiều.

    norm -> in_proj -> (stream, gate)
    stream -> causal depthwise conv1d (width 4, left pad 3) -> SiLU
           -> delta, B, C from x_proj / dt_proj (softplus on delta)
           -> selective scan
    -> * SiLU(gate) -> out_proj -> + input
"""
from typing import Callable, Literal

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from src.tensor_core import DimensionError, TokenSequence
from src.tensor_core.ops import silu_array, softplus_array

from .params import SsmBlockParams
from .scan import selective_scan_par

Direction = Literal["forward", "backward"]
ScanFn = Callable[..., np.ndarray]

RMS_EPSILON = 1e-5


def rms_norm(x: np.ndarray, scale: np.ndarray) -> np.ndarray:
    """RMSNorm theo trục cuối."""
    inv = 1.0 / np.sqrt(np.mean(np.square(x), axis=-1, keepdims=True) + np.float32(RMS_EPSILON))
    return (x * inv * scale).astype(np.float32)


def causal_depthwise_conv1d(x: np.ndarray, weight: np.ndarray, bias: np.ndarray) -> np.ndarray:
    """
    Conv1d depthwise nhân quả: output tại t chỉ phụ thuộc các input <= t.

    Args:
        x: mảng (T, channels).
        weight: mảng (channels, width).
        bias: mảng (channels,).
    """
    width = weight.shape[1]
    padded = np.concatenate([np.zeros((width - 1, x.shape[1]), dtype=x.dtype), x])
    windows = sliding_window_view(padded, width, axis=0)  # (T, channels, width)
    return ((windows * weight).sum(axis=-1) + bias).astype(np.float32)


def _forward_block(x: np.ndarray, params: SsmBlockParams, scan: ScanFn) -> np.ndarray:
    inner, rank, state = params.inner, params.dt_rank, params.state

    xz = rms_norm(x, params.norm_w) @ params.in_proj_w.T
    stream, gate = xz[:, :inner], xz[:, inner:]

    stream = silu_array(causal_depthwise_conv1d(stream, params.conv1d_w, params.conv1d_b))

    x_dbl = stream @ params.x_proj_w.T
    dt = x_dbl[:, :rank]
    B = x_dbl[:, rank:rank + state]
    C = x_dbl[:, rank + state:]
    delta = softplus_array(dt @ params.dt_proj_w.T + params.dt_proj_b)

    y = scan(stream, delta, params.A, B, C, params.D)
    y = y * silu_array(gate)
    return x + y @ params.out_proj_w.T


def mamba_block(
    tokens: TokenSequence,
    params: SsmBlockParams,
    direction: Direction = "forward",
    scan: ScanFn = selective_scan_par,
) -> TokenSequence:
    """
    Chạy một khối Mamba trên chuỗi token.

    Args:
        tokens: chuỗi token (length, dim).
        params: tham số của khối.
        direction: "forward" hoặc "backward"; chiều ngược là đảo chuỗi -> khối xuôi -> đảo lại.
        scan: kernel scan, mặc định selective_scan_par.

    Returns:
        TokenSequence cùng shape với input.
    """
    if tokens.dim != params.dim:
        raise DimensionError(f"token dim {tokens.dim} does not match Mamba block dim {params.dim}")
    if direction == "forward":
        return tokens.with_data(_forward_block(tokens.data, params, scan))
    if direction == "backward":
        out = _forward_block(np.ascontiguousarray(tokens.data[::-1]), params, scan)
        return tokens.with_data(out[::-1])
    raise ValueError(f"direction must be 'forward' or 'backward', got {direction!r}")


def bidirectional_mamba(
    tokens: TokenSequence,
    params_fwd: SsmBlockParams,
    params_bwd: SsmBlockParams,
    scan: ScanFn = selective_scan_par,
) -> TokenSequence:
    """Tổng output của hai nhánh xuôi/ngược, phần residual chỉ được cộng một lần."""
    if params_fwd.dim != params_bwd.dim:
        raise DimensionError(f"branch dims differ: forward {params_fwd.dim}, backward {params_bwd.dim}")
    fwd = mamba_block(tokens, params_fwd, "forward", scan)
    bwd = mamba_block(tokens, params_bwd, "backward", scan)
    return tokens.with_data(fwd.data + bwd.data - tokens.data)


__all__ = ["bidirectional_mamba", "causal_depthwise_conv1d", "mamba_block", "rms_norm"]
