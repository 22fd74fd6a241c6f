"""Shared builders for tests: tiny encoders and synthetic digit images."""

from __future__ import annotations

from pathlib import Path

import numpy as np

from minmax_bnn.autodiff.gradcheck import GradCheckResult
from minmax_bnn.data.idx import write_idx
from minmax_bnn.encoders.manifest import ArchitectureManifest, LayerSpec

IDX_NAMES = {
    "train_images": "train-images-idx3-ubyte",
    "train_labels": "train-labels-idx1-ubyte",
    "test_images": "t10k-images-idx3-ubyte",
    "test_labels": "t10k-labels-idx1-ubyte",
}


def tiny_mlp(hidden: int = 3, d: int = 4) -> ArchitectureManifest:
    """An "mlp" manifest small enough for finite-difference checks."""
    return ArchitectureManifest(
        arch="mlp",
        feature_dim=d,
        layers=(
            LayerSpec("fc1", "linear", 28 * 28, hidden),
            LayerSpec("fc2", "linear", hidden, d),
        ),
    )


def synthetic_digits(
    per_class: int, classes: list[int], seed: int = 0
) -> tuple[np.ndarray, np.ndarray]:
    """uint8 28x28 images where each class lights its own horizontal band."""
    rng = np.random.default_rng(seed)
    images, labels = [], []
    for c in classes:
        for _ in range(per_class):
            img = rng.integers(0, 40, size=(28, 28))
            top = 2 + 6 * (c % 4)
            img[top : top + 4, 3 + c : 25] = rng.integers(180, 256)
            images.append(img)
            labels.append(c)
    order = rng.permutation(len(labels))
    return (
        np.asarray(images, dtype=np.uint8)[order],
        np.asarray(labels, dtype=np.uint8)[order],
    )


def write_synthetic_mnist(
    directory: Path,
    classes: list[int],
    train_per_class: int = 12,
    test_per_class: int = 5,
) -> dict[str, Path]:
    """Write the four IDX files of a small synthetic MNIST into ``directory``."""
    train_x, train_y = synthetic_digits(train_per_class, classes, seed=1)
    test_x, test_y = synthetic_digits(test_per_class, classes, seed=2)
    paths = {key: directory / name for key, name in IDX_NAMES.items()}
    write_idx(paths["train_images"], train_x)
    write_idx(paths["train_labels"], train_y)
    write_idx(paths["test_images"], test_x)
    write_idx(paths["test_labels"], test_y)
    return paths


def assert_gradients_close(result: GradCheckResult, rtol: float = 1e-4) -> None:
    """Relative agreement, with an absolute floor scaled to the largest gradient."""
    for analytic, numeric in zip(result.analytic, result.numeric):
        scale = max(float(np.abs(numeric).max()), 1e-8)
        np.testing.assert_allclose(analytic, numeric, rtol=rtol, atol=1e-6 * scale)
