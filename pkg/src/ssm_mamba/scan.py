# src/ssm_mamba/scan.py
"""
Các kernel selective scan.

Cả hai kernel đều tính, với mỗi kênh inner e và chỉ số trạng thái n,

    h_t = exp(delta_t * A) * h_{t-1} + delta_t * B_t * u_t,   h_0 = 0
    y_t = sum_n C_t[n] * h_t[n] + D * u_t

`selective_scan_seq` là bản tham chiếu chạy từng bước (float32). `selective_scan_par`
tính cùng hệ thức truy hồi tuyến tính h_t = a_t * h_{t-1} + b_t bằng scan theo chunk:
mỗi chunk được scan cục bộ (mọi chunk cùng lúc), carry giữa các chunk được ghép
bằng (a, b) o (a', b') = (a * a', a' * b + b'), rồi mỗi chunk được hiệu chỉnh
bằng carry đi vào nó. Các kênh inner được chia cho worker pool; phép tính của
mỗi kênh giống hệt nhau với mọi số worker.
"""
import logging

import numpy as np

from src.config.settings import get_num_threads, get_scan_chunk
from src.tensor_core.parallel import parallel_map, split_range

logger = logging.getLogger(__name__)

# số chunk trong một đoạn thời gian của kernel song song
SEGMENT_CHUNKS = 64


class ScanError(ValueError):
    """Input của scan sai shape hoặc chứa giá trị không hữu hạn; `step` là bước thời gian lỗi."""

    def __init__(self, message: str, step: int | None = None):
        self.step = step
        super().__init__(message if step is None else f"{message} (step {step})")


def _validate(u, delta, A, B, C, D) -> None:
    if u.ndim != 2:
        raise ScanError(f"u must be (T, inner), got shape {u.shape}")
    T, E = u.shape
    N = A.shape[1] if A.ndim == 2 else -1
    expected = {"delta": (delta, (T, E)), "A": (A, (E, N)), "B": (B, (T, N)), "C": (C, (T, N)), "D": (D, (E,))}
    for name, (arr, shape) in expected.items():
        if arr.shape != shape:
            raise ScanError(f"{name} has shape {arr.shape}, expected {shape}")
    if T == 0:
        return
    for name, arr in (("u", u), ("delta", delta), ("B", B), ("C", C)):
        bad = ~np.isfinite(arr).reshape(T, -1).all(axis=1)
        if bad.any():
            raise ScanError(f"non-finite value in {name}", step=int(np.argmax(bad)))
    if (delta < 0).any():
        raise ScanError("delta must be non-negative (softplus output)", step=int(np.argmax((delta < 0).any(axis=1))))
    if not np.isfinite(A).all() or not np.isfinite(D).all():
        raise ScanError("non-finite value in A or D")


def selective_scan_seq(u, delta, A, B, C, D) -> np.ndarray:
    """
    Kernel tham chiếu: mỗi token một bước Python.

    Args:
        u, delta: mảng (T, inner).
        A: mảng (inner, state).
        B, C: mảng (T, state).
        D: mảng (inner,).

    Returns:
        np.ndarray (T, inner).
    """
    u, delta, A, B, C, D = (np.asarray(v, dtype=np.float32) for v in (u, delta, A, B, C, D))
    _validate(u, delta, A, B, C, D)
    T, E = u.shape
    h = np.zeros((E, A.shape[1]), dtype=np.float32)
    y = np.empty((T, E), dtype=np.float32)
    for t in range(T):
        dA = np.exp(delta[t][:, None] * A)
        dBu = delta[t][:, None] * B[t][None, :] * u[t][:, None]
        h = dA * h + dBu
        y[t] = (h * C[t][None, :]).sum(axis=-1)
    return y + u * D


def chunked_linear_scan(a: np.ndarray, b: np.ndarray, chunk: int, h0: np.ndarray | None = None) -> np.ndarray:
    """
    Mọi trạng thái của h_t = a_t * h_{t-1} + b_t theo trục 0, bắt đầu từ `h0`
    (mặc định là 0). Các trục phía sau là các làn độc lập.
    """
    if a.shape != b.shape:
        raise ScanError(f"a and b differ in shape: {a.shape} vs {b.shape}")
    if chunk < 1:
        raise ScanError(f"chunk size must be >= 1, got {chunk}")
    T = a.shape[0]
    if T == 0:
        return np.zeros_like(b)
    lanes = a.shape[1:]
    n_chunks = -(-T // chunk)
    pad = n_chunks * chunk - T
    if pad:
        a = np.concatenate([a, np.ones((pad, *lanes), dtype=a.dtype)])
        b = np.concatenate([b, np.zeros((pad, *lanes), dtype=b.dtype)])
    a = a.reshape(n_chunks, chunk, *lanes)
    b = b.reshape(n_chunks, chunk, *lanes)

    # scan cục bộ từng chunk, các chunk đặt cạnh nhau
    local = np.empty_like(b)
    decay = np.empty_like(a)
    h = np.zeros((n_chunks, *lanes), dtype=b.dtype)
    p = np.ones((n_chunks, *lanes), dtype=a.dtype)
    for i in range(chunk):
        h = a[:, i] * h + b[:, i]
        p = p * a[:, i]
        local[:, i] = h
        decay[:, i] = p

    # carry đi vào mỗi chunk
    carry_in = np.empty((n_chunks, *lanes), dtype=b.dtype)
    carry = np.zeros(lanes, dtype=b.dtype) if h0 is None else np.asarray(h0, dtype=b.dtype)
    for c in range(n_chunks):
        carry_in[c] = carry
        carry = decay[c, -1] * carry + local[c, -1]

    states = local + decay * carry_in[:, None]
    return states.reshape(n_chunks * chunk, *lanes)[:T]


def selective_scan_par(u, delta, A, B, C, D, chunk: int | None = None) -> np.ndarray:
    """Scan theo chunk, cùng hợp đồng với `selective_scan_seq`; `chunk` mặc định lấy từ LLEM_SCAN_CHUNK."""
    u, delta, A, B, C, D = (np.asarray(v, dtype=np.float32) for v in (u, delta, A, B, C, D))
    _validate(u, delta, A, B, C, D)
    chunk = chunk or get_scan_chunk()
    T, E = u.shape

    segment = chunk * SEGMENT_CHUNKS

    def run(channels: slice) -> np.ndarray:
        # xử lý thời gian theo từng đoạn để giới hạn bộ nhớ (T, inner, state)
        out = np.empty((T, channels.stop - channels.start), dtype=np.float32)
        h_last = None
        for start in range(0, T, segment):
            t = slice(start, min(start + segment, T))
            a = np.exp(delta[t, channels, None] * A[None, channels])
            b = delta[t, channels, None] * B[t, None, :] * u[t, channels, None]
            h = chunked_linear_scan(a, b, chunk, h0=h_last)
            out[t] = (h * C[t, None, :]).sum(axis=-1)
            h_last = h[-1]
        return out

    slices = split_range(E, get_num_threads())
    parts = parallel_map(run, slices)
    y = np.concatenate(parts, axis=1) if len(parts) > 1 else parts[0]
    logger.debug("parallel scan: T=%d inner=%d chunk=%d slices=%d", T, E, chunk, len(slices))
    return y + u * D
