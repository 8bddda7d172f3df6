# src/config/paths.py
"""
Module này chịu trách nhiệm thiết lập các đường dẫn output cho từng tác vụ.
Tập trung quản lý đường dẫn ở một nơi giúp dễ dàng thay đổi và bảo trì.
"""

from pathlib import Path

# Giả định rằng file này nằm trong src/config/
PROJECT_ROOT = Path(__file__).resolve().parent.parent.parent


def setup_output_paths(output: str | Path, trace: str | Path | None = None) -> dict:
    """
    Tạo thư mục chứa ảnh output và trả về các đường dẫn liên quan.
    Args:
        output: Đường dẫn file PNG kết quả (hoặc thư mục, với tác vụ decompose).
        trace: Đường dẫn file CSV trace (tùy chọn).
    Returns:
        dict: Các đường dẫn đã được cấu hình.
    """
    output = Path(output)
    output_dir = output if output.suffix == "" else output.parent
    output_dir.mkdir(parents=True, exist_ok=True)

    paths = {
        "output": output,
        "output_dir": output_dir,
        "reflectance": output_dir / "R0.png",
        "illumination": output_dir / "L0.png",
        "trace": Path(trace) if trace else None,
    }
    if paths["trace"] is not None:
        paths["trace"].parent.mkdir(parents=True, exist_ok=True)

    print("\n--- Output paths ---")
    for key, value in paths.items():
        if value is None:
            continue
        try:
            print(f"{key:<15}: {Path(value).resolve().relative_to(PROJECT_ROOT)}")
        except ValueError:
            print(f"{key:<15}: {value}")
    print("--------------------\n")

    return paths
