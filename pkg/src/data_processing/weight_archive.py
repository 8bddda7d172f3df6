# src/data_processing/weight_archive.py
"""
Kho tensor có tên và định dạng file nhị phân của nó.

Bố cục (mọi số nguyên đều little-endian):
    magic  b"LLEW"            4 byte
    version u32 = 1
    count   u32
    per entry:
        name_len u16, name (UTF-8)
        rank u8, dims u32 * rank
        payload f32 * prod(dims)
"""
import logging
import struct
from collections.abc import Iterator, Mapping
from pathlib import Path

import numpy as np

logger = logging.getLogger(__name__)

MAGIC = b"LLEW"
VERSION = 1
_HEADER = struct.Struct("<4sII")


class WeightArchiveError(ValueError):
    """File trọng số sai định dạng hoặc có entry không nhất quán."""


class MissingWeightsError(WeightArchiveError):
    """Thiếu tensor bắt buộc; `missing` liệt kê đầy đủ các tên còn thiếu."""

    def __init__(self, missing: list[str]):
        self.missing = sorted(missing)
        listed = "\n  ".join(self.missing)
        super().__init__(f"{len(self.missing)} required weight(s) missing from archive:\n  {listed}")


class WeightArchive(Mapping[str, np.ndarray]):
    """Ánh xạ giữ thứ tự chèn, từ tên tham số tới mảng float32 chỉ-đọc."""

    def __init__(self, entries: Mapping[str, np.ndarray] | None = None):
        self._entries: dict[str, np.ndarray] = {}
        for name, tensor in (entries or {}).items():
            self.add(name, tensor)

    def add(self, name: str, tensor: np.ndarray) -> None:
        if name in self._entries:
            raise WeightArchiveError(f"duplicate weight name '{name}'")
        if len(name.encode("utf-8")) > 0xFFFF:
            raise WeightArchiveError(f"weight name too long: '{name[:40]}...'")
        arr = np.array(tensor, dtype=np.float32, order="C", copy=True)
        if arr.ndim > 0xFF:
            raise WeightArchiveError(f"rank {arr.ndim} of '{name}' exceeds 255")
        arr.setflags(write=False)
        self._entries[name] = arr

    def __getitem__(self, name: str) -> np.ndarray:
        return self._entries[name]

    def __iter__(self) -> Iterator[str]:
        return iter(self._entries)

    def __len__(self) -> int:
        return len(self._entries)

    def require(self, names: list[str]) -> None:
        """Ném MissingWeightsError liệt kê mọi entry còn thiếu."""
        missing = [n for n in names if n not in self._entries]
        if missing:
            raise MissingWeightsError(missing)

    def subset(self, prefix: str) -> "WeightArchive":
        """Các entry nằm dưới `prefix`, tên đã bỏ phần prefix."""
        return WeightArchive({n[len(prefix):]: t for n, t in self._entries.items() if n.startswith(prefix)})

    def has_prefix(self, prefix: str) -> bool:
        return any(n.startswith(prefix) for n in self._entries)

    def num_parameters(self, prefix: str = "") -> int:
        return sum(t.size for n, t in self._entries.items() if n.startswith(prefix))

    # --- tuần tự hóa -----------------------------------------------------

    def to_bytes(self) -> bytes:
        result = bytearray(_HEADER.pack(MAGIC, VERSION, len(self._entries)))
        for name, tensor in self._entries.items():
            name_bytes = name.encode("utf-8")
            result.extend(struct.pack("<H", len(name_bytes)))
            result.extend(name_bytes)
            result.extend(struct.pack("<B", tensor.ndim))
            result.extend(struct.pack(f"<{tensor.ndim}I", *tensor.shape))
            result.extend(tensor.astype("<f4").tobytes())
        return bytes(result)

    @classmethod
    def from_bytes(cls, raw: bytes) -> "WeightArchive":
        """Giải mã toàn bộ file; byte thừa ở cuối, tên trùng hoặc tên không phải UTF-8 đều là lỗi."""
        if len(raw) < _HEADER.size:
            raise WeightArchiveError(f"truncated archive: {len(raw)} bytes is shorter than the header")
        magic, version, count = _HEADER.unpack_from(raw, 0)
        if magic != MAGIC:
            raise WeightArchiveError(f"bad magic {magic!r}, expected {MAGIC!r}")
        if version != VERSION:
            raise WeightArchiveError(f"unsupported archive version {version}")

        archive = cls()
        offset = _HEADER.size

        def take(size: int, what: str) -> bytes:
            nonlocal offset
            if offset + size > len(raw):
                raise WeightArchiveError(f"truncated archive while reading {what} at byte {offset}")
            chunk = raw[offset:offset + size]
            offset += size
            return chunk

        for index in range(count):
            (name_len,) = struct.unpack("<H", take(2, f"name length of entry {index}"))
            try:
                name = take(name_len, f"name of entry {index}").decode("utf-8")
            except UnicodeDecodeError as e:
                raise WeightArchiveError(f"entry {index}: name is not valid UTF-8") from e
            (rank,) = struct.unpack("<B", take(1, f"rank of '{name}'"))
            dims = struct.unpack(f"<{rank}I", take(4 * rank, f"dims of '{name}'"))
            numel = int(np.prod(dims, dtype=np.int64)) if rank else 1
            payload = np.frombuffer(take(4 * numel, f"payload of '{name}'"), dtype="<f4")
            archive.add(name, payload.reshape(dims))

        if offset != len(raw):
            raise WeightArchiveError(f"{len(raw) - offset} trailing bytes after {count} entries")
        return archive


def save_weights(archive: WeightArchive, path: str | Path) -> None:
    """Ghi toàn bộ archive ra file .llew."""
    raw = archive.to_bytes()
    Path(path).write_bytes(raw)
    logger.debug("Wrote %d weights (%d bytes) to %s", len(archive), len(raw), path)


def load_weights(path: str | Path) -> WeightArchive:
    """
    Đọc file .llew.

    Returns:
        WeightArchive: các tensor theo đúng thứ tự trong file.
    """
    archive = WeightArchive.from_bytes(Path(path).read_bytes())
    logger.debug("Loaded %d weights from %s", len(archive), path)
    return archive
