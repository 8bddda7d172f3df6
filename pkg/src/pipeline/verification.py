# src/pipeline/verification.py
"""
Module này chứa bộ kiểm tra chấp nhận (acceptance suite) chạy bằng `main.py verify`.
CHECKS ánh xạ tên kiểm tra tới hàm kiểm tra; mỗi hàm trả về một chuỗi mô tả
khi đạt và ném VerificationFailure khi không đạt.
"""
import tempfile
import time
import traceback
from pathlib import Path

import numpy as np

from src.config.settings import get_num_threads, get_thread_override, set_thread_override
from src.data_processing import WeightArchive, load_image, save_image, save_weights
from src.data_processing.image_io import to_bytes
from src.metrics import psnr, ssim
from src.relight_unet import RelightNetwork, UNetConfig, init_entries
from src.retinex_admm import AdmmState, SolverConfig, run_unfolding, update_L, update_R
from src.ssm_mamba import SsmBlockParams, bidirectional_mamba, mamba_block, selective_scan_par, selective_scan_seq
from src.tensor_core import ImageTensor, TokenSequence
from .tasks import build_init_archive, run_bench_task, run_enhance_task


class VerificationFailure(AssertionError):
    """Một kiểm tra chấp nhận không đạt."""


def _expect(condition: bool, message: str) -> None:
    if not condition:
        raise VerificationFailure(message)


def _random_state(rng: np.random.Generator, shape=(8, 8, 3)) -> tuple[AdmmState, ImageTensor]:
    def img():
        return ImageTensor(rng.random(shape, dtype=np.float32))

    def signed():
        return ImageTensor(rng.uniform(-0.5, 0.5, shape).astype(np.float32))

    state = AdmmState(R=img(), L=img(), P=img(), Q=img(), Y1=signed(), Y2=signed(), mu=float(rng.uniform(0.1, 10.0)))
    return state, img()


def subproblem_gradient(
    x: np.ndarray, I: np.ndarray, other: np.ndarray, target: np.ndarray, multiplier: np.ndarray, mu: float,
    step: float = 1e-4,
) -> np.ndarray:
    """
    Sai phân hữu hạn trung tâm (float64) của
    ||I - X*other||^2 + <Y, X - target> + mu/2 ||X - target||^2
    theo từng phần tử của X.
    """
    x, I, other, target, multiplier = (np.asarray(a, dtype=np.float64) for a in (x, I, other, target, multiplier))

    def objective(v):
        return (I - v * other) ** 2 + multiplier * (v - target) + 0.5 * mu * (v - target) ** 2

    return (objective(x + step) - objective(x - step)) / (2.0 * step)


def check_stationarity(rng: np.random.Generator) -> str:
    worst = 0.0
    for _ in range(20):
        state, I = _random_state(rng)
        R = update_R(state, I)
        g_r = subproblem_gradient(R.data, I.data, state.L.data, state.P.data, state.Y1.data, state.mu)
        L = update_L(state, I)
        g_l = subproblem_gradient(L.data, I.data, state.R.data, state.Q.data, state.Y2.data, state.mu)
        worst = max(worst, float(np.abs(g_r).max()), float(np.abs(g_l).max()))
    _expect(worst < 1e-3, f"max |grad| = {worst:.3e}")
    return f"max |grad| = {worst:.3e}"


def check_identity_roundtrip(rng: np.random.Generator) -> str:
    config = SolverConfig(mu0=1e4, iterations=1, rho=1.0, exposure_gamma=1.0)
    worst = 0.0
    for _ in range(10):
        I = ImageTensor.random(rng, 64, 64)
        out = run_unfolding(I, config).output
        worst = max(worst, (out - I).frobenius_norm() / I.frobenius_norm())
    _expect(worst < 1e-2, f"relative error {worst:.3e}")
    return f"max relative error {worst:.3e}"


def check_residual_monotonicity(rng: np.random.Generator) -> str:
    checked = 0
    for mu0 in (0.1, 1.0, 10.0):
        config = SolverConfig(mu0=mu0, iterations=10, rho=1.0)
        for _ in range(5):
            history = run_unfolding(ImageTensor.random(rng, 16, 16), config).history
            residuals = [row["r_minus_p"] for row in history]
            increases = [b - a for a, b in zip(residuals, residuals[1:])]
            _expect(max(increases, default=0.0) <= 1e-7, f"|R-P| grew by {max(increases):.3e} (mu0={mu0})")
            checked += 1
    return f"{checked} runs non-increasing"


def random_scan_inputs(rng: np.random.Generator, length: int, inner: int, state: int = 4):
    u = rng.standard_normal((length, inner)).astype(np.float32)
    delta = rng.uniform(0.0, 1.0, (length, inner)).astype(np.float32)
    A = -np.exp(rng.normal(0.0, 0.5, (inner, state))).astype(np.float32)
    B = rng.standard_normal((length, state)).astype(np.float32)
    C = rng.standard_normal((length, state)).astype(np.float32)
    D = rng.standard_normal(inner).astype(np.float32)
    return u, delta, A, B, C, D


def check_scan_oracle(rng: np.random.Generator) -> str:
    worst = 0.0
    for length in (1, 2, 17, 64, 257):
        for state in (1, 4, 16):
            for _ in range(10):
                args = random_scan_inputs(rng, length, inner=8, state=state)
                diff = np.abs(selective_scan_par(*args, chunk=8) - selective_scan_seq(*args)).max()
                worst = max(worst, float(diff))
    _expect(worst < 1e-5, f"max |par - seq| = {worst:.3e}")
    return f"max |par - seq| = {worst:.3e}"


def check_bidirectional_identity(rng: np.random.Generator) -> str:
    dim = 8
    tokens = TokenSequence(rng.standard_normal((33, dim)).astype(np.float32))
    params = SsmBlockParams.random(rng, dim=dim, state=4, std=0.3)
    backward = mamba_block(tokens, params, "backward")
    mirrored = mamba_block(tokens.reversed(), params, "forward").reversed()
    _expect(np.array_equal(backward.data, mirrored.data), "backward != reverse o forward o reverse")
    zero = SsmBlockParams.zeros(dim=dim, state=4)
    out = bidirectional_mamba(tokens, zero, zero)
    _expect(np.array_equal(out.data, tokens.data), "zero-weight bidirectional block is not the identity")
    return "bit-exact"


def check_unet_contract(rng: np.random.Generator) -> str:
    config = UNetConfig(base_channels=16)
    network = RelightNetwork.from_archive(WeightArchive(init_entries(config, rng, std=0.2)), config)
    R = ImageTensor.random(rng, 64, 64)
    L = ImageTensor.random(rng, 64, 64)
    out, features = network.forward(R, L, return_features=True)
    _expect(features["F_1"].shape == (32, 32, 32), f"F_1 shape {features['F_1'].shape}")
    _expect(out.shape == (64, 64, 3), f"output shape {out.shape}")
    h = 0.05
    plus = network.forward(R, ImageTensor(L.data + h))
    minus = network.forward(R, ImageTensor(L.data - h))
    sensitivity = float(np.abs((plus.data - minus.data) / (2 * h)).max())
    _expect(sensitivity > 0.0, "output does not depend on illumination")
    return f"F_1 {features['F_1'].shape}, d out / d L = {sensitivity:.3e}"


def check_metrics(rng: np.random.Generator) -> str:
    half = ImageTensor.full(16, 16, 3, 0.5)
    quarter = ImageTensor.full(16, 16, 3, 0.25)
    value = psnr(half, quarter)
    _expect(abs(value - 12.0412) < 1e-3, f"psnr = {value}")
    x = ImageTensor.random(rng, 32, 32)
    _expect(abs(ssim(x, x) - 1.0) < 1e-9, "ssim(x, x) != 1")
    c1 = 0.01 ** 2
    constant = ssim(ImageTensor.zeros(16, 16, 3), ImageTensor.full(16, 16, 3, 1.0))
    _expect(abs(constant - c1 / (1 + c1)) < 1e-7, f"constant ssim = {constant}")
    return f"psnr {value:.4f} dB, constant ssim {constant:.6e}"


def check_determinism(rng: np.random.Generator) -> str:
    weights = build_init_archive(seed=int(rng.integers(1 << 31)))
    config = SolverConfig(prior_r="ifbmamba_unet", prior_l="mamba_block", iterations=2)
    many = max(get_num_threads(), 4)
    previous = get_thread_override()
    with tempfile.TemporaryDirectory() as tmp:
        tmp = Path(tmp)
        save_image(ImageTensor.random(rng, 16, 16), tmp / "low.png")
        save_weights(weights, tmp / "init.llew")
        files = []
        try:
            for threads in (1, many):
                set_thread_override(threads)
                out = tmp / f"enhanced_{threads}.png"
                run_enhance_task(tmp / "low.png", out, config, weights_path=tmp / "init.llew")
                files.append(out.read_bytes())
        finally:
            set_thread_override(previous)
    _expect(files[0] == files[1], f"PNG files differ between 1 and {many} threads")
    return f"byte-identical PNG at 1 and {many} threads"


def check_performance(rng: np.random.Generator) -> str:
    frame = run_bench_task(lengths=(4096,), repeats=1, seed=int(rng.integers(1 << 31)))
    rate = dict(zip(frame["kernel"], frame["tokens_per_second"]))
    return f"par/seq throughput x{rate['par'] / rate['seq']:.2f} at T=4096 on {get_num_threads()} threads (not gated)"


def check_io_roundtrip(rng: np.random.Generator) -> str:
    archive = WeightArchive({
        f"layer{i}/w": rng.standard_normal(tuple(rng.integers(1, 5, size=rng.integers(0, 4)))).astype(np.float32)
        for i in range(8)
    })
    raw = archive.to_bytes()
    _expect(WeightArchive.from_bytes(raw).to_bytes() == raw, "weight archive round-trip differs")
    pixels = rng.integers(0, 256, size=(13, 17, 3), dtype=np.uint8)
    with tempfile.TemporaryDirectory() as tmp:
        path = Path(tmp) / "fixture.png"
        save_image(ImageTensor(pixels / np.float32(255.0)), path)
        _expect(np.array_equal(to_bytes(load_image(path)), pixels), "PNG round-trip differs")
    return f"{len(raw)}-byte archive and 13x17 PNG byte-exact"


CHECKS = {
    "stationarity": check_stationarity,
    "identity_roundtrip": check_identity_roundtrip,
    "residual_monotonicity": check_residual_monotonicity,
    "scan_oracle": check_scan_oracle,
    "bidirectional_identity": check_bidirectional_identity,
    "unet_contract": check_unet_contract,
    "metrics": check_metrics,
    "determinism": check_determinism,
    "performance": check_performance,
    "io_roundtrip": check_io_roundtrip,
}


def run_verify_task(seed: int = 0, only: list[str] | None = None) -> bool:
    """
    Chạy toàn bộ bộ kiểm tra, in trạng thái từng kiểm tra.
    Trả về True khi tất cả đều đạt.
    """
    print("\n" + "=" * 26 + " BẮT ĐẦU TÁC VỤ VERIFY " + "=" * 26)
    names = only or list(CHECKS)
    unknown = [n for n in names if n not in CHECKS]
    if unknown:
        raise ValueError(f"Unknown check(s): {', '.join(unknown)}. Available: {', '.join(CHECKS)}")

    failed = []
    for i, name in enumerate(names):
        rng = np.random.default_rng([seed, i])
        start = time.perf_counter()
        try:
            detail = CHECKS[name](rng)
            print(f"✅ {name:<24} {time.perf_counter() - start:7.2f}s  {detail}")
        except VerificationFailure as e:
            failed.append(name)
            print(f"❌ {name:<24} {time.perf_counter() - start:7.2f}s  {e}")
        except Exception as e:
            failed.append(name)
            print(f"❌ {name:<24} lỗi không mong muốn: {e}")
            traceback.print_exc()

    passed = len(names) - len(failed)
    print(f"\n📊 {passed}/{len(names)} kiểm tra đạt" + (f" | không đạt: {', '.join(failed)}" if failed else ""))
    print("\n" + "=" * 25 + " HOÀN THÀNH TÁC VỤ VERIFY " + "=" * 25)
    return not failed
