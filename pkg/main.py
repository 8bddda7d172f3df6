# main.py
"""
Đây là entry point chính của toàn bộ pipeline tăng sáng ảnh thiếu sáng.
Nó chịu trách nhiệm phân tích các đối số dòng lệnh (command-line arguments)
và gọi các tác vụ tương ứng trong module pipeline.

Mã thoát: 0 thành công, 1 lỗi khi chạy, 2 sai cú pháp lệnh.
"""

import argparse
import sys
from pathlib import Path

# Thêm thư mục gốc của dự án vào Python path để có thể import các module
# một cách nhất quán từ thư mục gốc của dự án.
sys.path.insert(0, str(Path(__file__).resolve().parent))

from src.config.settings import get_default_prior, get_seed, set_thread_override
from src.priors import PRIORS
from src.relight_unet import UNetConfig
from src.retinex_admm import SolverConfig
from src.pipeline.tasks import (
    run_bench_task,
    run_decompose_task,
    run_enhance_task,
    run_evaluate_task,
    run_init_weights_task,
    run_metrics_task,
)
from src.pipeline.verification import CHECKS, run_verify_task

DEFAULTS = SolverConfig()


def _add_unet_args(parser: argparse.ArgumentParser):
    defaults = UNetConfig()
    parser.add_argument("--base-channels", type=int, default=defaults.base_channels,
                        help="Số kênh đặc trưng ở tầng 0 của U-net (mặc định: %(default)s)")
    parser.add_argument("--patch-sizes", type=int, nargs=2, default=list(defaults.patch_sizes),
                        metavar=("P0", "P1"), help="Kích thước patch token ở tầng 0 và 1")
    parser.add_argument("--blocks", type=int, default=defaults.blocks_per_level,
                        help="Số khối IFBMamba mỗi tầng")
    parser.add_argument("--class-token", action="store_true", help="Thêm class token vào chuỗi token")
    parser.add_argument("--unidirectional", action="store_true",
                        help="Ablation: chỉ quét chiều xuôi trong IFBMamba")
    parser.add_argument("--no-fusion", action="store_true",
                        help="Ablation: bỏ hợp nhất token độ chiếu sáng")


def _add_solver_args(parser: argparse.ArgumentParser):
    parser.add_argument("--weights", help="File trọng số .llew (tùy chọn)")
    parser.add_argument("--iters", type=int, default=DEFAULTS.iterations, help="Số vòng unfolding K")
    parser.add_argument("--prior-r", choices=list(PRIORS), default=get_default_prior("r"),
                        help="Prior cho reflectance (mặc định: %(default)s)")
    parser.add_argument("--prior-l", choices=list(PRIORS), default=get_default_prior("l"),
                        help="Prior cho illumination (mặc định: %(default)s)")
    parser.add_argument("--lambda", dest="lam", type=float, default=DEFAULTS.lam)
    parser.add_argument("--gamma", type=float, default=DEFAULTS.gamma)
    parser.add_argument("--mu0", type=float, default=DEFAULTS.mu0)
    parser.add_argument("--rho", type=float, default=DEFAULTS.rho, help="Hệ số tăng μ mỗi vòng (>= 1)")
    parser.add_argument("--exposure-gamma", type=float, default=DEFAULTS.exposure_gamma)
    parser.add_argument("--epsilon", type=float, default=DEFAULTS.epsilon, help="Hằng số chống chia cho 0")
    parser.add_argument("--box-radius", type=int, default=DEFAULTS.box_radius)
    parser.add_argument("--tv-steps", type=int, default=DEFAULTS.tv_steps)
    parser.add_argument("--tv-weight", type=float, default=DEFAULTS.tv_weight)
    _add_unet_args(parser)


def unet_config_from_args(args) -> UNetConfig:
    return UNetConfig(
        base_channels=args.base_channels,
        patch_sizes=tuple(args.patch_sizes),
        blocks_per_level=args.blocks,
        class_token=args.class_token,
        bidirectional=not args.unidirectional,
        fuse_illumination=not args.no_fusion,
    )


def solver_config_from_args(args) -> SolverConfig:
    return SolverConfig(
        lam=args.lam,
        gamma=args.gamma,
        mu0=args.mu0,
        rho=args.rho,
        iterations=args.iters,
        prior_r=args.prior_r,
        prior_l=args.prior_l,
        exposure_gamma=args.exposure_gamma,
        epsilon=args.epsilon,
        box_radius=args.box_radius,
        tv_steps=args.tv_steps,
        tv_weight=args.tv_weight,
        unet=unet_config_from_args(args),
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        description="Tăng sáng ảnh thiếu sáng bằng Retinex + ADMM unfolding với prior Mamba",
        formatter_class=argparse.RawTextHelpFormatter,
    )
    parser.add_argument("--threads", type=int, default=None,
                        help="Số luồng tính toán (0 = tự động; ghi đè LLEM_THREADS)")
    sub = parser.add_subparsers(dest="task", required=True, metavar="TASK")

    enhance = sub.add_parser("enhance", help="Tăng sáng một ảnh PNG")
    enhance.add_argument("--input", required=True)
    enhance.add_argument("--output", required=True)
    enhance.add_argument("--trace", help="Ghi CSV trace từng vòng lặp")
    _add_solver_args(enhance)

    decompose = sub.add_parser("decompose", help="Chỉ phân rã ảnh thành R0/L0")
    decompose.add_argument("--input", required=True)
    decompose.add_argument("--output", required=True, help="Thư mục chứa R0.png và L0.png")
    decompose.add_argument("--weights")

    verify = sub.add_parser("verify", help="Chạy bộ kiểm tra chấp nhận")
    verify.add_argument("--seed", type=int, default=get_seed())
    verify.add_argument("--only", nargs="+", choices=list(CHECKS), help="Chỉ chạy các kiểm tra này")

    bench = sub.add_parser("bench", help="Đo thông lượng selective scan")
    bench.add_argument("--output", help="File CSV kết quả (mặc định: in ra màn hình)")
    bench.add_argument("--lengths", type=int, nargs="+", default=[256, 1024, 4096])
    bench.add_argument("--inner", type=int, default=96)
    bench.add_argument("--state", type=int, default=16)
    bench.add_argument("--repeats", type=int, default=3)
    bench.add_argument("--seed", type=int, default=get_seed())

    metrics = sub.add_parser("metrics", help="Tính PSNR/SSIM giữa hai ảnh")
    metrics.add_argument("--ref", required=True)
    metrics.add_argument("--test", required=True)

    init = sub.add_parser("init-weights", help="Tạo file trọng số khởi tạo ngẫu nhiên")
    init.add_argument("--output", required=True)
    init.add_argument("--seed", type=int, default=get_seed())
    _add_unet_args(init)

    evaluate = sub.add_parser("evaluate", help="Đánh giá trên cặp thư mục ảnh")
    evaluate.add_argument("--input-dir", required=True)
    evaluate.add_argument("--ref-dir", required=True)
    evaluate.add_argument("--output-dir", help="Lưu ảnh đã tăng sáng vào thư mục này")
    evaluate.add_argument("--csv", help="Ghi bảng PSNR/SSIM ra CSV")
    _add_solver_args(evaluate)
    return parser


def dispatch(args) -> int:
    if args.task == "enhance":
        run_enhance_task(args.input, args.output, solver_config_from_args(args), args.weights, args.trace)
    elif args.task == "decompose":
        run_decompose_task(args.input, args.output, args.weights)
    elif args.task == "verify":
        return 0 if run_verify_task(args.seed, args.only) else 1
    elif args.task == "bench":
        run_bench_task(args.output, tuple(args.lengths), args.inner, args.state, args.repeats, args.seed)
    elif args.task == "metrics":
        run_metrics_task(args.ref, args.test)
    elif args.task == "init-weights":
        run_init_weights_task(args.output, args.seed, unet_config_from_args(args))
    elif args.task == "evaluate":
        frame = run_evaluate_task(
            args.input_dir, args.ref_dir, solver_config_from_args(args), args.weights, args.output_dir, args.csv
        )
        return 0 if frame is not None else 1
    return 0


def main(argv: list[str] | None = None) -> int:
    """
    Hàm chính điều phối toàn bộ pipeline; trả về mã thoát.
    """
    args = build_parser().parse_args(argv)

    print(f"\n{'*'*80}\n{' BẮT ĐẦU PIPELINE '.center(80,'*')}\n{'*'*80}")
    print(f"Tác vụ: {args.task.upper()}")

    try:
        if args.threads is not None:
            if args.threads < 0:
                raise ValueError(f"--threads phải >= 0, nhận được {args.threads}")
            set_thread_override(args.threads)
        code = dispatch(args)
    except FileNotFoundError as e:
        print(f"\n❌ Không tìm thấy file: {e}", file=sys.stderr)
        code = 1
    except Exception as e:
        print(f"\n❌ Tác vụ '{args.task}' thất bại: {type(e).__name__}: {e}", file=sys.stderr)
        code = 1

    print(f"\n{'*'*80}\n{' PIPELINE KẾT THÚC '.center(80,'*')}\n{'*'*80}\n")
    return code


if __name__ == "__main__":
    sys.exit(main())
