# src/pipeline/output_generator.py
"""
Module này chịu trách nhiệm ghi các file output: ảnh PNG, file CSV trace
của từng vòng lặp, kết quả bench và bảng đánh giá.
"""
from pathlib import Path

import pandas as pd

from src.data_processing import save_image
from src.retinex_admm import HISTORY_COLUMNS
from src.tensor_core import ImageTensor


class OutputGenerator:
    """
    Ghi các file output của một tác vụ vào `output_dir`.
    """
    def __init__(self, output_dir: str | Path):
        self.output_dir = Path(output_dir)

    def save_image(self, image: ImageTensor, path: str | Path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        save_image(image, path)
        print(f"💾 Đã lưu ảnh: {path}")
        return path

    def save_trace(self, history, path: str | Path) -> Path:
        """CSV gồm các cột iteration,r_minus_p,l_minus_q,recon_error,mu."""
        frame = pd.DataFrame(list(history), columns=list(HISTORY_COLUMNS))
        frame.to_csv(path, index=False, float_format="%.9e")
        print(f"💾 Đã lưu trace ({len(frame)} vòng lặp): {path}")
        return Path(path)

    def save_bench(self, frame: pd.DataFrame, path: str | Path) -> Path:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        frame.to_csv(path, index=False)
        print(f"💾 Đã lưu kết quả bench: {path}")
        return Path(path)

    def save_evaluation(self, frame: pd.DataFrame, path: str | Path) -> Path:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        frame.to_csv(path, index=False)
        print(f"💾 Đã lưu bảng đánh giá: {path}")
        return Path(path)
