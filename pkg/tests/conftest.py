# tests/conftest.py
import sys
from pathlib import Path

import numpy as np
import pytest

# same import root as main.py
sys.path.insert(0, str(Path(__file__).resolve().parent.parent))

from src.config.settings import set_thread_override  # noqa: E402
from src.data_processing import WeightArchive  # noqa: E402
from src.tensor_core import ImageTensor  # noqa: E402


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def random_image(rng):
    def make(height=8, width=8, channels=3):
        return ImageTensor.random(rng, height, width, channels)

    return make


@pytest.fixture
def init_archive():
    """Full canonical archive (decomposition + both priors), seeded."""
    from src.pipeline.tasks import build_init_archive

    return build_init_archive(seed=7)


@pytest.fixture
def empty_archive():
    return WeightArchive()


@pytest.fixture(autouse=True)
def reset_thread_override():
    yield
    set_thread_override(None)
