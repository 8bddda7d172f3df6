# src/pipeline/tasks.py
"""
Module này điều phối các tác vụ chính của pipeline:
enhance, decompose, metrics, bench, init-weights và evaluate.
Tác vụ verify nằm riêng trong `verification.py`.
"""
import json
import time
from pathlib import Path

import numpy as np
import pandas as pd

from src.config.paths import setup_output_paths
from src.config.settings import get_num_threads, get_scan_chunk
from src.data_processing import WeightArchive, load_image, load_weights, save_image, save_weights
from src.metrics import compare
from src.priors.learned import init_mamba_entries
from src.relight_unet import UNetConfig, init_entries
from src.retinex_admm import (
    EnhanceResult,
    SolverConfig,
    init_decomposition_entries,
    initialize_decomposition,
    run_unfolding,
)
from src.ssm_mamba import selective_scan_par, selective_scan_seq
from .output_generator import OutputGenerator

BENCH_LENGTHS = (256, 1024, 4096)


def _load_optional_weights(weights_path: str | Path | None) -> WeightArchive | None:
    if weights_path is None:
        print("⚠️ Không có file trọng số: dùng phân rã max-RGB cổ điển.")
        return None
    weights = load_weights(weights_path)
    print(f"✅ Đã tải {len(weights)} tensor ({weights.num_parameters():,} tham số) từ: {weights_path}")
    return weights


def run_enhance_task(
    input_path: str | Path,
    output_path: str | Path,
    config: SolverConfig,
    weights_path: str | Path | None = None,
    trace_path: str | Path | None = None,
) -> EnhanceResult:
    """
    Chạy tác vụ enhance: đọc ảnh, phân rã, chạy K vòng ADMM và lưu ảnh kết quả.
    """
    print("\n" + "=" * 25 + " BẮT ĐẦU TÁC VỤ ENHANCE " + "=" * 25)
    paths = setup_output_paths(output_path, trace_path)
    image = load_image(input_path)
    print(f"🖼️ Ảnh đầu vào: {input_path} ({image.height}x{image.width})")
    weights = _load_optional_weights(weights_path)
    print(
        f"🔄 K={config.iterations} | prior R={config.prior_r} | prior L={config.prior_l} | "
        f"λ={config.lam} γ={config.gamma} μ0={config.mu0} ρ={config.rho}"
    )

    result = run_unfolding(image, config, weights)

    generator = OutputGenerator(paths["output_dir"])
    generator.save_image(result.output, paths["output"])
    if paths["trace"] is not None:
        generator.save_trace(result.history, paths["trace"])
    if result.nan_count:
        print(f"⚠️ {result.nan_count} giá trị NaN đã bị kẹp về 0.")
    last = result.history[-1]
    print(f"✅ |R-P|={last['r_minus_p']:.3e} |L-Q|={last['l_minus_q']:.3e} |RL-I|={last['recon_error']:.3e}")

    print("\n" + "=" * 24 + " HOÀN THÀNH TÁC VỤ ENHANCE " + "=" * 24)
    return result


def run_decompose_task(input_path: str | Path, output_dir: str | Path, weights_path: str | Path | None = None) -> dict:
    """
    Chạy tác vụ decompose: chỉ phân rã ảnh thành R0 và L0 rồi lưu hai file PNG.
    """
    print("\n" + "=" * 24 + " BẮT ĐẦU TÁC VỤ DECOMPOSE " + "=" * 24)
    paths = setup_output_paths(output_dir)
    image = load_image(input_path)
    weights = _load_optional_weights(weights_path)

    R0, L0 = initialize_decomposition(image, weights)
    generator = OutputGenerator(paths["output_dir"])
    generator.save_image(R0, paths["reflectance"])
    generator.save_image(L0, paths["illumination"])

    print("\n" + "=" * 23 + " HOÀN THÀNH TÁC VỤ DECOMPOSE " + "=" * 23)
    return paths


def run_metrics_task(ref_path: str | Path, test_path: str | Path):
    """
    Tính PSNR/SSIM giữa ảnh tham chiếu và ảnh cần đánh giá.
    In ra cả dạng dễ đọc và một dòng JSON.
    """
    report = compare(load_image(ref_path), load_image(test_path))
    print(f"📊 {report}")
    print(json.dumps({"ref": str(ref_path), "test": str(test_path), **report.to_dict()}))
    return report


def _bench_inputs(rng: np.random.Generator, length: int, inner: int, state: int):
    u = rng.standard_normal((length, inner)).astype(np.float32)
    delta = np.log1p(np.exp(rng.standard_normal((length, inner)))).astype(np.float32) * np.float32(0.1)
    A = -np.exp(rng.standard_normal((inner, state))).astype(np.float32)
    B = rng.standard_normal((length, state)).astype(np.float32)
    C = rng.standard_normal((length, state)).astype(np.float32)
    D = np.ones(inner, dtype=np.float32)
    return u, delta, A, B, C, D


def _time_kernel(fn, args, repeats: int) -> float:
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - start)
    return best


def run_bench_task(
    output_csv: str | Path | None = None,
    lengths: tuple[int, ...] = BENCH_LENGTHS,
    inner: int = 96,
    state: int = 16,
    repeats: int = 3,
    seed: int = 0,
) -> pd.DataFrame:
    """
    Đo thông lượng của selective_scan_seq và selective_scan_par (token/giây).
    """
    print("\n" + "=" * 27 + " BẮT ĐẦU TÁC VỤ BENCH " + "=" * 27)
    rng = np.random.default_rng(seed)
    threads = get_num_threads()
    rows = []
    for length in lengths:
        args = _bench_inputs(rng, length, inner, state)
        for name, kernel in (("seq", selective_scan_seq), ("par", selective_scan_par)):
            seconds = _time_kernel(kernel, args, repeats)
            rows.append({
                "kernel": name,
                "T": length,
                "inner": inner,
                "state": state,
                "threads": threads,
                "chunk": get_scan_chunk(),
                "seconds": seconds,
                "tokens_per_second": length / seconds if seconds > 0 else float("inf"),
            })
            print(f"⏱️ {name:<3} T={length:<5} {seconds * 1e3:9.2f} ms")

    frame = pd.DataFrame(rows)
    if output_csv is not None:
        OutputGenerator(Path(output_csv).parent).save_bench(frame, output_csv)
    else:
        print(frame.to_csv(index=False), end="")
    print("\n" + "=" * 26 + " HOÀN THÀNH TÁC VỤ BENCH " + "=" * 26)
    return frame


def build_init_archive(seed: int, unet_config: UNetConfig | None = None, std: float = 0.02) -> WeightArchive:
    """Toàn bộ tên tensor chuẩn, khởi tạo N(0, std²) với seed cố định."""
    rng = np.random.default_rng(seed)
    entries = {}
    entries.update(init_decomposition_entries(rng, std=std))
    entries.update(init_entries(unet_config or UNetConfig(), rng, prefix="prior_r/relight/", std=std))
    entries.update(init_mamba_entries(rng, prefix="prior_l/", std=std))
    return WeightArchive(entries)


def run_init_weights_task(output_path: str | Path, seed: int, unet_config: UNetConfig | None = None) -> WeightArchive:
    """
    Ghi một file trọng số khởi tạo ngẫu nhiên với đầy đủ tên chuẩn.
    """
    print("\n" + "=" * 23 + " BẮT ĐẦU TÁC VỤ INIT-WEIGHTS " + "=" * 23)
    archive = build_init_archive(seed, unet_config)
    Path(output_path).parent.mkdir(parents=True, exist_ok=True)
    save_weights(archive, output_path)
    for prefix in ("decom/", "prior_r/", "prior_l/"):
        print(f"   {prefix:<10} {archive.num_parameters(prefix):>10,} tham số")
    print(f"💾 Đã lưu {len(archive)} tensor (seed={seed}) vào: {output_path}")
    print("\n" + "=" * 22 + " HOÀN THÀNH TÁC VỤ INIT-WEIGHTS " + "=" * 22)
    return archive


def run_evaluate_task(
    input_dir: str | Path,
    ref_dir: str | Path,
    config: SolverConfig,
    weights_path: str | Path | None = None,
    output_dir: str | Path | None = None,
    csv_path: str | Path | None = None,
) -> pd.DataFrame | None:
    """
    Đánh giá trên cặp thư mục: mỗi ảnh thiếu sáng trong `input_dir` được
    enhance và so với ảnh cùng tên trong `ref_dir`.
    """
    print("\n" + "=" * 25 + " BẮT ĐẦU TÁC VỤ EVALUATE " + "=" * 25)
    input_dir, ref_dir = Path(input_dir), Path(ref_dir)
    pairs = [(p, ref_dir / p.name) for p in sorted(input_dir.glob("*.png")) if (ref_dir / p.name).exists()]
    if not pairs:
        print(f"❌ Không tìm thấy cặp ảnh PNG trùng tên giữa {input_dir} và {ref_dir}")
        return None

    weights = _load_optional_weights(weights_path)
    generator = OutputGenerator(Path(output_dir) if output_dir else input_dir)
    rows = []
    for low_path, ref_path in pairs:
        result = run_unfolding(load_image(low_path), config, weights)
        if output_dir is not None:
            generator.save_image(result.output, Path(output_dir) / low_path.name)
        report = compare(load_image(ref_path), result.output)
        row = {"image": low_path.name, **report.to_dict()}
        rows.append(row)
        print(json.dumps(row))

    frame = pd.DataFrame(rows)[["image", "psnr", "ssim"]]
    numeric = pd.to_numeric(frame["psnr"], errors="coerce")
    print(f"✅ {len(frame)} ảnh | PSNR trung bình {numeric.mean():.4f} dB | SSIM trung bình {frame['ssim'].mean():.6f}")
    if csv_path is not None:
        generator.save_evaluation(frame, csv_path)
    print("\n" + "=" * 24 + " HOÀN THÀNH TÁC VỤ EVALUATE " + "=" * 24)
    return frame
