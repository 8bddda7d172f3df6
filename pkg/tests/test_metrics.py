# tests/test_metrics.py
import math

import numpy as np
import pytest

from src.metrics import MetricReport, compare, gaussian_window, psnr, ssim
from src.tensor_core import DimensionError, ImageTensor

C1 = 0.01 ** 2


# =============================================================================
# PSNR
# =============================================================================

class TestPsnr:
    def test_half_vs_quarter(self):
        value = psnr(ImageTensor.full(16, 16, 3, 0.5), ImageTensor.full(16, 16, 3, 0.25))
        assert value == pytest.approx(12.0412, abs=1e-4)

    def test_identical_is_infinite(self, random_image):
        x = random_image()
        assert math.isinf(psnr(x, x))

    def test_black_vs_white_is_zero_db(self):
        assert psnr(ImageTensor.zeros(4, 4), ImageTensor.full(4, 4, 3, 1.0)) == pytest.approx(0.0)

    def test_peak_scales(self):
        x, y = ImageTensor.full(4, 4, 3, 0.5), ImageTensor.full(4, 4, 3, 0.25)
        assert psnr(x, y, peak=2.0) - psnr(x, y) == pytest.approx(20 * math.log10(2.0))

    def test_symmetric(self, random_image):
        x, y = random_image(), random_image()
        assert psnr(x, y) == psnr(y, x)

    def test_shape_mismatch(self, random_image):
        with pytest.raises(DimensionError):
            psnr(random_image(4, 4), random_image(4, 5))

    def test_decreases_with_noise(self, rng):
        x = ImageTensor.random(rng, 32, 32)
        noise = rng.standard_normal(x.shape).astype(np.float32)
        values = [psnr(x, ImageTensor(x.data + sigma * noise)) for sigma in (0.01, 0.05, 0.2)]
        assert values[0] > values[1] > values[2]

    def test_flip_invariant(self, random_image):
        x, y = random_image(12, 9), random_image(12, 9)
        flipped = psnr(ImageTensor(x.data[::-1, ::-1]), ImageTensor(y.data[::-1, ::-1]))
        assert flipped == pytest.approx(psnr(x, y), rel=1e-9)


# =============================================================================
# SSIM
# =============================================================================

class TestSsim:
    def test_window_normalized(self):
        w = gaussian_window()
        assert w.shape == (11, 11) and w.sum() == pytest.approx(1.0)
        assert np.array_equal(w, w.T) and w[5, 5] == w.max()

    def test_identical(self, random_image):
        x = random_image(32, 32)
        assert ssim(x, x) == pytest.approx(1.0, abs=1e-9)

    def test_constant_black_vs_white(self):
        value = ssim(ImageTensor.zeros(16, 16), ImageTensor.full(16, 16, 3, 1.0))
        assert value == pytest.approx(C1 / (1 + C1), abs=1e-7)

    def test_symmetric(self, random_image):
        x, y = random_image(24, 24), random_image(24, 24)
        assert ssim(x, y) == pytest.approx(ssim(y, x), abs=1e-12)

    def test_flip_invariant(self, random_image):
        x, y = random_image(20, 24), random_image(20, 24)
        flipped = ssim(ImageTensor(x.data[::-1, ::-1]), ImageTensor(y.data[::-1, ::-1]))
        assert flipped == pytest.approx(ssim(x, y), abs=1e-9)

    def test_decreases_with_noise(self, rng):
        x = ImageTensor.random(rng, 32, 32)
        noise = rng.standard_normal(x.shape).astype(np.float32)
        values = [ssim(x, ImageTensor(np.clip(x.data + s * noise, 0, 1))) for s in (0.01, 0.05, 0.2)]
        assert values[0] > values[1] > values[2]

    def test_bounded(self, random_image):
        value = ssim(random_image(16, 16), random_image(16, 16))
        assert -1.0 <= value <= 1.0

    def test_too_small(self, random_image):
        with pytest.raises(DimensionError):
            ssim(random_image(10, 32), random_image(10, 32))


# =============================================================================
# Report
# =============================================================================

class TestCompare:
    def test_per_channel(self):
        ref = ImageTensor.full(12, 12, 3, 0.5)
        data = ref.numpy()
        data[:, :, 1] = 0.25
        report = compare(ref, ImageTensor(data))
        assert math.isinf(report.per_channel_psnr[0]) and math.isinf(report.per_channel_psnr[2])
        assert report.per_channel_psnr[1] == pytest.approx(12.0412, abs=1e-4)
        assert report.ssim == pytest.approx(np.mean(report.per_channel_ssim))
        assert len(report.per_channel_ssim) == 3

    def test_to_dict_reports_inf_as_string(self, random_image):
        x = random_image(16, 16)
        report = compare(x, x).to_dict()
        assert report["psnr"] == "inf" and report["per_channel_psnr"] == ["inf"] * 3
        assert report["ssim"] == pytest.approx(1.0)

    def test_str(self):
        assert str(MetricReport(psnr=12.04119, ssim=0.5)) == "PSNR 12.0412 dB | SSIM 0.500000"
