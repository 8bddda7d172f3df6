# src/tensor_core/parallel.py
"""
Worker pool dùng chung cho cả tiến trình. Công việc luôn được chia thành các
phần độc lập và kết quả được gom theo đúng thứ tự submit, nên output không
phụ thuộc vào số worker.
"""
import threading
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, TypeVar

from src.config.settings import get_num_threads

T = TypeVar("T")
R = TypeVar("R")

# Singleton pattern, tạo lại khi số luồng cấu hình thay đổi
_executor: ThreadPoolExecutor | None = None
_executor_size = 0
_executor_lock = threading.Lock()


def get_executor() -> ThreadPoolExecutor:
    """Trả về pool hiện tại; nhiều luồng gọi cùng lúc vẫn nhận cùng một pool."""
    global _executor, _executor_size
    size = get_num_threads()
    with _executor_lock:
        if _executor is None or _executor_size != size:
            if _executor is not None:
                _executor.shutdown(wait=True)
            _executor = ThreadPoolExecutor(max_workers=size, thread_name_prefix="llem")
            _executor_size = size
        return _executor


def parallel_map(fn: Callable[[T], R], items: Iterable[T]) -> list[R]:
    """map song song, kết quả giữ đúng thứ tự của `items`."""
    items = list(items)
    if len(items) <= 1 or get_num_threads() == 1:
        return [fn(item) for item in items]
    return list(get_executor().map(fn, items))


def split_range(n: int, parts: int) -> list[slice]:
    """Chia range(n) thành tối đa `parts` đoạn liên tiếp, không rỗng."""
    parts = max(1, min(parts, n))
    bounds = [round(i * n / parts) for i in range(parts + 1)]
    return [slice(bounds[i], bounds[i + 1]) for i in range(parts) if bounds[i + 1] > bounds[i]]
