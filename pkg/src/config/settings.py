# src/config/settings.py
"""
Cấu hình runtime đọc từ biến môi trường (và file `.env` nếu có).
Mọi giá trị đều có mặc định nên CLI chạy được khi không cấu hình gì.
"""
import os

from dotenv import load_dotenv

load_dotenv()

DEFAULT_SCAN_CHUNK = 64

# Giá trị từ dòng lệnh (`--threads`) được ưu tiên hơn LLEM_THREADS.
_thread_override: int | None = None


def set_thread_override(threads: int | None) -> None:
    """Cố định số worker cho tiến trình này; None thì quay về giá trị trong env."""
    global _thread_override
    _thread_override = threads


def get_thread_override() -> int | None:
    return _thread_override


def get_num_threads() -> int:
    """
    Số worker cho các phép tính song song bên trong.

    Returns:
        int: số luồng; LLEM_THREADS = 0 hoặc không đặt nghĩa là dùng tất cả các lõi.
    """
    threads = _thread_override
    if threads is None:
        threads = int(os.getenv("LLEM_THREADS", 0))
    if threads < 0:
        raise ValueError(f"LLEM_THREADS must be >= 0, got {threads}")
    return threads or (os.cpu_count() or 1)


def get_scan_chunk() -> int:
    chunk = int(os.getenv("LLEM_SCAN_CHUNK", DEFAULT_SCAN_CHUNK))
    if chunk < 1:
        raise ValueError(f"LLEM_SCAN_CHUNK must be >= 1, got {chunk}")
    return chunk


def get_default_prior(component: str) -> str:
    """Loại prior mặc định cho nhánh reflectance ('r') hoặc illumination ('l')."""
    return os.getenv(f"LLEM_PRIOR_{component.upper()}", "zero")


def get_seed() -> int:
    return int(os.getenv("LLEM_SEED", 0))
