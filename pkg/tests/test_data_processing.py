# tests/test_data_processing.py
import struct

import numpy as np
import pytest
from PIL import Image

from src.data_processing import (
    ImageFormatError,
    MissingWeightsError,
    WeightArchive,
    WeightArchiveError,
    load_image,
    load_weights,
    save_image,
    save_weights,
)
from src.data_processing.image_io import to_bytes
from src.tensor_core import ImageTensor


# =============================================================================
# PNG I/O
# =============================================================================

class TestImageIO:
    def test_byte_values(self, tmp_path):
        pixels = np.array([[[255, 0, 128]]], dtype=np.uint8)
        Image.fromarray(pixels).save(tmp_path / "p.png")
        img = load_image(tmp_path / "p.png")
        assert img.data[0, 0, 0] == 1.0
        assert img.data[0, 0, 1] == 0.0
        assert img.data[0, 0, 2] == pytest.approx(128 / 255)

    def test_round_trip_byte_exact(self, tmp_path, rng):
        pixels = rng.integers(0, 256, size=(9, 14, 3), dtype=np.uint8)
        Image.fromarray(pixels).save(tmp_path / "in.png")
        save_image(load_image(tmp_path / "in.png"), tmp_path / "out.png")
        assert np.array_equal(np.asarray(Image.open(tmp_path / "out.png")), pixels)

    def test_save_clamps_and_rounds(self):
        img = ImageTensor(np.array([[[-0.2, 1.7, 0.5]]], dtype=np.float32))
        assert to_bytes(img).tolist() == [[[0, 255, 128]]]

    @pytest.mark.parametrize("mode", ["L", "RGBA", "P"])
    def test_unsupported_color_type(self, tmp_path, mode):
        Image.new(mode, (4, 4)).save(tmp_path / "bad.png")
        with pytest.raises(ImageFormatError):
            load_image(tmp_path / "bad.png")

    def test_sixteen_bit_rejected(self, tmp_path):
        Image.fromarray(np.zeros((4, 4), dtype=np.uint16)).save(tmp_path / "deep.png")
        with pytest.raises(ImageFormatError):
            load_image(tmp_path / "deep.png")

    def test_not_a_png(self, tmp_path):
        (tmp_path / "x.png").write_bytes(b"hello world, definitely not a png")
        with pytest.raises(ImageFormatError):
            load_image(tmp_path / "x.png")


# =============================================================================
# Weight archive
# =============================================================================

class TestWeightArchive:
    def test_empty_archive_is_header_only(self):
        raw = WeightArchive().to_bytes()
        assert raw == b"LLEW" + struct.pack("<II", 1, 0)
        assert len(raw) == 12

    def test_single_scalar_entry_layout(self):
        raw = WeightArchive({"a": np.array([1.0])}).to_bytes()
        assert len(raw) == 24
        assert raw[12:] == struct.pack("<H", 1) + b"a" + struct.pack("<BIf", 1, 1, 1.0)

    def test_round_trip_file(self, tmp_path, rng):
        archive = WeightArchive({
            "decom/conv0.w": rng.standard_normal((16, 3, 3, 3)),
            "x/bias": rng.standard_normal(5),
            "scalar": np.float32(2.5),
        })
        save_weights(archive, tmp_path / "w.llew")
        loaded = load_weights(tmp_path / "w.llew")
        assert list(loaded) == list(archive)
        assert loaded["scalar"].shape == ()
        assert loaded.to_bytes() == (tmp_path / "w.llew").read_bytes()

    def test_bad_magic(self):
        with pytest.raises(WeightArchiveError, match="magic"):
            WeightArchive.from_bytes(b"NOPE" + struct.pack("<II", 1, 0))

    def test_bad_version(self):
        with pytest.raises(WeightArchiveError, match="version"):
            WeightArchive.from_bytes(b"LLEW" + struct.pack("<II", 2, 0))

    def test_truncated(self):
        raw = WeightArchive({"a": np.ones((2, 2))}).to_bytes()
        with pytest.raises(WeightArchiveError, match="truncated"):
            WeightArchive.from_bytes(raw[:-3])

    def test_trailing_bytes(self):
        with pytest.raises(WeightArchiveError, match="trailing"):
            WeightArchive.from_bytes(WeightArchive().to_bytes() + b"\x00")

    def test_duplicate_names_in_file(self):
        entry = struct.pack("<H", 1) + b"a" + struct.pack("<BIf", 1, 1, 1.0)
        raw = b"LLEW" + struct.pack("<II", 1, 2) + entry + entry
        with pytest.raises(WeightArchiveError, match="duplicate"):
            WeightArchive.from_bytes(raw)

    def test_name_not_utf8(self):
        entry = struct.pack("<H", 2) + b"\xff\xfe" + struct.pack("<Bf", 0, 1.0)
        raw = b"LLEW" + struct.pack("<II", 1, 1) + entry
        with pytest.raises(WeightArchiveError, match="UTF-8"):
            WeightArchive.from_bytes(raw)

    def test_require_lists_every_missing_name(self):
        archive = WeightArchive({"a": np.zeros(1)})
        with pytest.raises(MissingWeightsError) as info:
            archive.require(["a", "b", "c"])
        assert info.value.missing == ["b", "c"]

    def test_subset_strips_prefix(self):
        archive = WeightArchive({"p/x": np.zeros(2), "p/y": np.zeros(3), "q/z": np.zeros(1)})
        sub = archive.subset("p/")
        assert sorted(sub) == ["x", "y"]
        assert archive.num_parameters("p/") == 5
        assert archive.has_prefix("q/") and not archive.has_prefix("r/")

    def test_entries_read_only(self):
        archive = WeightArchive({"a": np.zeros(3)})
        with pytest.raises(ValueError):
            archive["a"][0] = 1.0
