import os
from pathlib import Path

import numpy as np
import pytest

from minmax_bnn.data.views import make_view
from minmax_bnn.training.runner import TrainingData

from .helpers import IDX_NAMES, synthetic_digits, tiny_mlp, write_synthetic_mnist


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def tiny_manifest():
    return tiny_mlp(hidden=16, d=4)


@pytest.fixture
def synthetic_data():
    """Three classes: 12 train and 5 test images each."""
    classes = [0, 1, 2]
    train = make_view(*synthetic_digits(12, classes, seed=1), classes)
    test = make_view(*synthetic_digits(5, classes, seed=2), classes)
    return TrainingData(train=train, test=test)


@pytest.fixture
def idx_dir(tmp_path):
    """Synthetic MNIST-layout IDX files (classes 0-3) under tmp_path."""
    directory = tmp_path / "mnist"
    write_synthetic_mnist(directory, classes=[0, 1, 2, 3])
    return directory


@pytest.fixture
def mnist_dir():
    """Directory with the canonical MNIST files, or skip."""
    directory = Path(os.getenv("MINMAX_BNN_DATA_DIR", Path.home() / "data" / "mnist"))
    if not all((directory / name).exists() for name in IDX_NAMES.values()):
        pytest.skip("canonical MNIST files not available (set MINMAX_BNN_DATA_DIR)")
    return directory
