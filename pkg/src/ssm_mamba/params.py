# src/ssm_mamba/params.py
"""
Các tensor học được của một khối selective-scan (Mamba).

Trọng số tuyến tính theo quy ước (out_features, in_features), nên phép chiếu
là `x @ w.T`. Tên trong archive, dưới prefix của khối:

    norm.w       (dim,)
    in_proj.w    (2 * inner, dim)
    conv1d.w     (inner, conv_width)
    conv1d.b     (inner,)
    x_proj.w     (dt_rank + 2 * state, inner)
    dt_proj.w    (inner, dt_rank)
    dt_proj.b    (inner,)
    A_log        (inner, state)      A = -exp(A_log)
    D            (inner,)
    out_proj.w   (dim, inner)
"""
import math
from dataclasses import dataclass, fields

import numpy as np

from src.data_processing.weight_archive import WeightArchive

DEFAULT_DIM = 48
DEFAULT_STATE = 16
DEFAULT_EXPAND = 2
CONV_WIDTH = 4

PARAM_NAMES = (
    "norm.w",
    "in_proj.w",
    "conv1d.w",
    "conv1d.b",
    "x_proj.w",
    "dt_proj.w",
    "dt_proj.b",
    "A_log",
    "D",
    "out_proj.w",
)


def dt_rank_for(dim: int) -> int:
    """Hạng của phép chiếu delta: ceil(dim / 16)."""
    return math.ceil(dim / 16)


def param_shapes(dim: int, state: int = DEFAULT_STATE, expand: int = DEFAULT_EXPAND) -> dict[str, tuple[int, ...]]:
    inner = expand * dim
    rank = dt_rank_for(dim)
    return {
        "norm.w": (dim,),
        "in_proj.w": (2 * inner, dim),
        "conv1d.w": (inner, CONV_WIDTH),
        "conv1d.b": (inner,),
        "x_proj.w": (rank + 2 * state, inner),
        "dt_proj.w": (inner, rank),
        "dt_proj.b": (inner,),
        "A_log": (inner, state),
        "D": (inner,),
        "out_proj.w": (dim, inner),
    }


@dataclass(frozen=True, eq=False)
class SsmBlockParams:
    """Bộ tham số của một khối Mamba; tên thuộc tính là tên archive với "." đổi thành "_"."""

    norm_w: np.ndarray
    in_proj_w: np.ndarray
    conv1d_w: np.ndarray
    conv1d_b: np.ndarray
    x_proj_w: np.ndarray
    dt_proj_w: np.ndarray
    dt_proj_b: np.ndarray
    A_log: np.ndarray
    D: np.ndarray
    out_proj_w: np.ndarray

    def __post_init__(self):
        for f in fields(self):
            arr = np.array(getattr(self, f.name), dtype=np.float32, copy=True)
            arr.setflags(write=False)
            object.__setattr__(self, f.name, arr)
        expected = param_shapes(self.dim, self.state, self.expand)
        for name, shape in expected.items():
            actual = getattr(self, _attr(name)).shape
            if actual != shape:
                raise ValueError(
                    f"inconsistent Mamba block: '{name}' has shape {actual}, expected {shape} "
                    f"for dim={self.dim}, state={self.state}, expand={self.expand}"
                )

    @property
    def dim(self) -> int:
        return self.norm_w.shape[0]

    @property
    def inner(self) -> int:
        return self.D.shape[0]

    @property
    def state(self) -> int:
        return self.A_log.shape[1]

    @property
    def expand(self) -> int:
        return self.inner // self.dim

    @property
    def dt_rank(self) -> int:
        return self.dt_proj_w.shape[1]

    @property
    def A(self) -> np.ndarray:
        """Ma trận trạng thái liên tục (đường chéo theo từng kênh), luôn âm."""
        return -np.exp(self.A_log)

    @classmethod
    def from_archive(cls, archive: WeightArchive, prefix: str) -> "SsmBlockParams":
        names = [prefix + n for n in PARAM_NAMES]
        archive.require(names)
        return cls(**{_attr(n): archive[prefix + n] for n in PARAM_NAMES})

    @classmethod
    def zeros(cls, dim: int = DEFAULT_DIM, state: int = DEFAULT_STATE, expand: int = DEFAULT_EXPAND) -> "SsmBlockParams":
        shapes = param_shapes(dim, state, expand)
        return cls(**{_attr(n): np.zeros(s, dtype=np.float32) for n, s in shapes.items()})

    @classmethod
    def random(
        cls,
        rng: np.random.Generator,
        dim: int = DEFAULT_DIM,
        state: int = DEFAULT_STATE,
        expand: int = DEFAULT_EXPAND,
        std: float = 0.02,
    ) -> "SsmBlockParams":
        shapes = param_shapes(dim, state, expand)
        return cls(**{_attr(n): rng.normal(0.0, std, s).astype(np.float32) for n, s in shapes.items()})

    def to_entries(self, prefix: str) -> dict[str, np.ndarray]:
        return {prefix + n: getattr(self, _attr(n)) for n in PARAM_NAMES}


def _attr(name: str) -> str:
    return name.replace(".", "_")
