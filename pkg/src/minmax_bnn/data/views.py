"""Class-subset views of a dataset and class-balanced batch streams."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from ..coding_rate.rates import ClassPartition
from ..errors import ConfigError, DataError, DimensionError, EmptyClassError


@dataclass
class DatasetView:
    """Images scaled to [0, 1] and labels relabeled to 0..k-1.

    ``classes[j]`` is the original label of class ``j``.
    """

    images: np.ndarray
    labels: np.ndarray
    classes: tuple[int, ...]
    class_indices: tuple[np.ndarray, ...]

    @property
    def num_classes(self) -> int:
        return len(self.classes)

    def __len__(self) -> int:
        return int(self.labels.shape[0])

    def class_counts(self) -> list[int]:
        return [len(ix) for ix in self.class_indices]


@dataclass
class Batch:
    images: np.ndarray
    labels: np.ndarray
    indices: np.ndarray  # positions in the source view
    partition: ClassPartition

    @property
    def size(self) -> int:
        return int(self.labels.shape[0])


def scale_pixels(images: np.ndarray) -> np.ndarray:
    return np.asarray(images, dtype=np.float64) / 255.0


def make_view(images: np.ndarray, labels: np.ndarray, class_subset: Sequence[int]) -> DatasetView:
    """Keep only ``class_subset`` and relabel in ascending original order."""
    labels = np.asarray(labels)
    if images.shape[0] != labels.shape[0]:
        raise DimensionError("make_view", images.shape, labels.shape)
    classes = tuple(sorted(int(c) for c in class_subset))
    keep = np.flatnonzero(np.isin(labels, classes))
    kept_labels = labels[keep]
    relabeled = np.empty(keep.shape[0], dtype=np.int64)
    for new, original in enumerate(classes):
        hits = kept_labels == original
        if not hits.any():
            raise EmptyClassError(original)
        relabeled[hits] = new
    return DatasetView(
        images=scale_pixels(images[keep]),
        labels=relabeled,
        classes=classes,
        class_indices=tuple(np.flatnonzero(relabeled == j) for j in range(len(classes))),
    )


def limit_per_class(view: DatasetView, per_class: int | None) -> DatasetView:
    """Keep the first ``per_class`` samples of each class, in file order."""
    if per_class is None:
        return view
    for label, index in zip(view.classes, view.class_indices):
        if len(index) < per_class:
            raise DataError(f"class {label} has {len(index)} samples, {per_class} requested")
    keep = np.sort(np.concatenate([index[:per_class] for index in view.class_indices]))
    labels = view.labels[keep]
    return DatasetView(
        images=view.images[keep],
        labels=labels,
        classes=view.classes,
        class_indices=tuple(np.flatnonzero(labels == j) for j in range(view.num_classes)),
    )


def balanced_batches(
    view: DatasetView, batch_per_class: int, rng: np.random.Generator
) -> Iterator[Batch]:
    """Endless stream of batches with ``batch_per_class`` samples of every class.

    Each pass draws every class without replacement and ends when the
    smallest class is exhausted; classes are reshuffled for the next pass.
    """
    if batch_per_class < 1:
        raise ConfigError(f"batch_per_class must be >= 1, got {batch_per_class}")
    smallest = min(view.class_counts())
    if smallest < batch_per_class:
        raise ConfigError(
            f"batch_per_class={batch_per_class} exceeds the smallest class ({smallest} samples)"
        )
    k = view.num_classes
    labels = np.repeat(np.arange(k), batch_per_class)
    partition = ClassPartition.from_labels(labels, k)
    per_pass = smallest // batch_per_class
    while True:
        shuffled = [rng.permutation(index) for index in view.class_indices]
        for b in range(per_pass):
            window = slice(b * batch_per_class, (b + 1) * batch_per_class)
            index = np.concatenate([order[window] for order in shuffled])
            yield Batch(
                images=view.images[index],
                labels=labels.copy(),
                indices=index,
                partition=partition,
            )
