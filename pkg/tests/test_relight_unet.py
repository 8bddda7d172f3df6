# tests/test_relight_unet.py
from dataclasses import replace

import numpy as np
import pytest

from src.data_processing import MissingWeightsError, WeightArchive
from src.relight_unet import (
    IfbmambaBlock,
    RelightNetwork,
    UNetConfig,
    canonical_shapes,
    ifbmamba_forward,
    init_entries,
    relight_forward,
)
from src.ssm_mamba import SsmBlockParams
from src.tensor_core import DimensionError, ImageTensor

SMALL = UNetConfig(base_channels=4, state=4)


def random_network(rng, config=SMALL, std=0.02):
    return RelightNetwork.from_archive(WeightArchive(init_entries(config, rng, std=std)), config)


def random_unit(rng, channels=4, patch=1, std=0.2, **flags):
    shapes = IfbmambaBlock.shapes(channels, patch, state=4, expand=2, **flags)
    archive = WeightArchive({"u." + n: rng.normal(0.0, std, s) for n, s in shapes.items()})
    return IfbmambaBlock.from_archive(archive, "u.", patch, **flags)


# =============================================================================
# Config and naming
# =============================================================================

class TestConfig:
    def test_feature_pyramid(self):
        config = UNetConfig(base_channels=16)
        assert config.feature_shape(64, 64, 0) == (64, 64, 16)
        assert config.feature_shape(64, 64, 1) == (32, 32, 32)

    def test_rejects_non_divisible_input(self):
        with pytest.raises(DimensionError):
            UNetConfig(patch_sizes=(1, 4)).check_input(16, 16 + 2)

    def test_rejects_bad_values(self):
        with pytest.raises(ValueError):
            UNetConfig(base_channels=0)
        with pytest.raises(ValueError):
            UNetConfig(patch_sizes=(1,))

    def test_canonical_names(self):
        names = canonical_shapes(UNetConfig())
        assert names["enc0/conv.w"] == (16, 3, 3, 3)
        assert names["down/conv.w"] == (32, 16, 4, 4)
        assert names["up/deconv.w"] == (32, 16, 2, 2)
        assert "enc0/ifbm.fwd.A_log" in names and "dec0/ifbm.bwd.out_proj.w" in names
        assert "enc1/ifbm.illum_proj.w" in names

    def test_ablation_drops_names(self):
        names = canonical_shapes(UNetConfig(bidirectional=False, fuse_illumination=False))
        assert not any(".bwd." in n or "illum_proj" in n for n in names)

    def test_extra_blocks_are_numbered(self):
        names = canonical_shapes(UNetConfig(blocks_per_level=2))
        assert "enc0/ifbm1.proj.w" in names


# =============================================================================
# IFBMamba unit
# =============================================================================

class TestIfbmamba:
    def test_zero_weights_identity(self, random_image):
        shapes = IfbmambaBlock.shapes(4, 1, state=4, expand=2)
        block = IfbmambaBlock.from_archive(WeightArchive({"u." + n: np.zeros(s) for n, s in shapes.items()}), "u.", 1)
        feat = ImageTensor(np.random.default_rng(0).standard_normal((6, 6, 4)))
        assert np.array_equal(ifbmamba_forward(feat, random_image(6, 6), block).data, feat.data)

    def test_zero_illumination_is_plain_bidirectional(self, rng):
        block = random_unit(rng)
        feat = ImageTensor(rng.standard_normal((4, 4, 4)))
        fused = ifbmamba_forward(feat, ImageTensor.zeros(4, 4, 3), block)
        plain = ifbmamba_forward(feat, None, replace(block, illum_proj_w=None))
        assert np.array_equal(fused.data, plain.data)

    def test_illumination_projection_is_linear(self, rng, random_image):
        block = random_unit(rng)
        doubled = replace(block, illum_proj_w=2 * block.illum_proj_w)
        zero_refl = ImageTensor.zeros(4, 4, 4)
        L = random_image(4, 4)
        np.testing.assert_allclose(doubled.fused_tokens(zero_refl, L).data,
                                   2 * block.fused_tokens(zero_refl, L).data, rtol=1e-6)

    def test_illumination_resampled_to_level(self, rng, random_image):
        block = random_unit(rng)
        out = ifbmamba_forward(ImageTensor(rng.standard_normal((4, 4, 4))), random_image(8, 8), block)
        assert out.shape == (4, 4, 4)

    def test_missing_illumination(self, rng):
        with pytest.raises(DimensionError):
            ifbmamba_forward(ImageTensor.zeros(4, 4, 4), None, random_unit(rng))

    def test_class_token_prepended_and_dropped(self, rng, random_image):
        block = random_unit(rng, class_token=True)
        feat = ImageTensor(rng.standard_normal((4, 4, 4)))
        tokens = block.fused_tokens(feat, random_image(4, 4))
        assert tokens.has_cls and tokens.length == 17
        assert np.array_equal(tokens.data[0], block.cls)
        assert ifbmamba_forward(feat, random_image(4, 4), block).shape == (4, 4, 4)

    def test_patch_size_two(self, rng, random_image):
        block = random_unit(rng, patch=2)
        assert block.dim == 16
        assert ifbmamba_forward(ImageTensor(rng.standard_normal((4, 4, 4))), random_image(4, 4), block).shape == (4, 4, 4)


# =============================================================================
# Full U-shape
# =============================================================================

class TestRelightNetwork:
    def test_shape_contract(self, rng, random_image):
        config = UNetConfig(base_channels=16)
        network = random_network(rng, config)
        out, features = network.forward(random_image(64, 64), random_image(64, 64), return_features=True)
        assert out.shape == (64, 64, 3)
        assert features["F_0"].shape == (64, 64, 16)
        assert features["F_1"].shape == (32, 32, 32)

    def test_zero_weights_give_zero_image(self, random_image):
        archive = WeightArchive(init_entries(SMALL, prefix="relight/"))
        out = relight_forward(random_image(8, 8), random_image(8, 8), SMALL, archive)
        assert np.all(out.data == 0.0)

    def test_skip_connection_feeds_decoder(self, rng, random_image):
        entries = init_entries(SMALL, rng)
        entries["relight/up/deconv.w"] = np.zeros_like(entries["relight/up/deconv.w"])
        entries["relight/up/deconv.b"] = np.zeros_like(entries["relight/up/deconv.b"])
        network = RelightNetwork.from_archive(WeightArchive(entries), SMALL)
        _, features = network.forward(random_image(8, 8), random_image(8, 8), return_features=True)
        assert np.array_equal(features["decoder_input"].data, features["enc0"].data)

    def test_illumination_sensitivity(self, rng, random_image):
        network = random_network(rng, std=0.2)
        R, L = random_image(8, 8), random_image(8, 8)
        h = 0.05
        bumped = L.numpy()
        bumped[3, 5, :] += h
        base = network.forward(R, L)
        moved = network.forward(R, ImageTensor(bumped))
        assert np.abs((moved.data - base.data) / h).max() > 0.0

    def test_finite_over_random_trials(self, rng):
        for _ in range(100):
            network = random_network(rng)
            R = ImageTensor.random(rng, 4, 4)
            L = ImageTensor.random(rng, 4, 4)
            assert network.forward(R, L).is_finite()

    def test_deterministic(self, rng, random_image):
        network = random_network(rng)
        R, L = random_image(8, 8), random_image(8, 8)
        assert np.array_equal(network.forward(R, L).data, network.forward(R, L).data)

    def test_vanilla_backbone_runs(self, rng, random_image):
        config = replace(SMALL, bidirectional=False, fuse_illumination=False)
        out = random_network(rng, config).forward(random_image(8, 8), random_image(8, 8))
        assert out.shape == (8, 8, 3)

    def test_missing_weights_listed_together(self):
        with pytest.raises(MissingWeightsError) as info:
            RelightNetwork.from_archive(WeightArchive(), SMALL)
        assert len(info.value.missing) == len(canonical_shapes(SMALL))

    def test_odd_input_rejected(self, rng, random_image):
        with pytest.raises(DimensionError):
            random_network(rng).forward(random_image(7, 8), random_image(7, 8))
