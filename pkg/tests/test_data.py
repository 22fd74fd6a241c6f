"""Tests for IDX parsing, class views and balanced batches."""

import struct

import numpy as np
import pytest

from minmax_bnn.data.idx import (
    IMAGES_MAGIC,
    LABELS_MAGIC,
    idx_bytes,
    load_labels,
    load_split,
    parse_idx,
    parse_idx_bytes,
    write_idx,
)
from minmax_bnn.data.views import balanced_batches, limit_per_class, make_view, scale_pixels
from minmax_bnn.errors import (
    ConfigError,
    DataError,
    EmptyClassError,
    ExtentOverflowError,
    IdxParseError,
    TruncatedPayloadError,
    WrongMagicError,
)

from .helpers import IDX_NAMES


def tiny_images(n: int = 3) -> np.ndarray:
    return np.arange(n * 28 * 28, dtype=np.uint64).reshape(n, 28, 28).astype(np.uint8)


class TestParseIdx:
    def test_images_header(self):
        parsed = parse_idx_bytes(idx_bytes(tiny_images(3)))
        assert parsed.header.magic == 2051
        assert parsed.header.extents == (3, 28, 28)
        assert parsed.header.kind == "images"

    def test_labels_header(self):
        parsed = parse_idx_bytes(idx_bytes(np.array([1, 2, 3], dtype=np.uint8)))
        assert parsed.header.magic == 2049
        assert parsed.header.extents == (3,)

    def test_round_trip_bytes(self):
        raw = idx_bytes(tiny_images(2))
        assert idx_bytes(parse_idx_bytes(raw).data) == raw

    def test_zero_magic(self):
        with pytest.raises(WrongMagicError) as exc:
            parse_idx_bytes(b"\x00\x00\x00\x00" + b"\x00" * 8)
        assert exc.value.offset == 0

    def test_labels_are_not_images(self):
        raw = idx_bytes(np.array([1, 2], dtype=np.uint8))
        with pytest.raises(WrongMagicError):
            parse_idx_bytes(raw, expect_magic=IMAGES_MAGIC)

    def test_truncated_payload(self):
        raw = idx_bytes(tiny_images(2))[:-10]
        with pytest.raises(TruncatedPayloadError):
            parse_idx_bytes(raw)

    def test_truncated_header(self):
        with pytest.raises(TruncatedPayloadError):
            parse_idx_bytes(struct.pack(">II", IMAGES_MAGIC, 2))

    def test_zero_extent(self):
        raw = struct.pack(">III", IMAGES_MAGIC, 0, 28) + struct.pack(">I", 28)
        with pytest.raises(ExtentOverflowError) as exc:
            parse_idx_bytes(raw)
        assert exc.value.offset == 4

    def test_overflowing_extents(self):
        raw = struct.pack(">IIII", IMAGES_MAGIC, 2**31, 28, 28)
        with pytest.raises(ExtentOverflowError):
            parse_idx_bytes(raw)

    def test_trailing_bytes(self):
        with pytest.raises(IdxParseError):
            parse_idx_bytes(idx_bytes(np.array([1, 2], dtype=np.uint8)) + b"\x00")

    def test_missing_file(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            parse_idx(tmp_path / "absent")

    def test_split_count_mismatch(self, tmp_path):
        write_idx(tmp_path / "images", tiny_images(3))
        write_idx(tmp_path / "labels", np.array([0, 1], dtype=np.uint8))
        with pytest.raises(DataError):
            load_split(tmp_path / "images", tmp_path / "labels")


class TestCanonicalMnist:
    def test_train_headers(self, mnist_dir):
        images = parse_idx(mnist_dir / IDX_NAMES["train_images"], IMAGES_MAGIC)
        labels = parse_idx(mnist_dir / IDX_NAMES["train_labels"], LABELS_MAGIC)
        assert images.header.extents == (60000, 28, 28)
        assert labels.header.extents == (60000,)

    def test_round_trip(self, mnist_dir):
        raw = (mnist_dir / IDX_NAMES["train_labels"]).read_bytes()
        assert idx_bytes(parse_idx_bytes(raw).data) == raw

    def test_class_counts(self, mnist_dir):
        images, labels = load_split(
            mnist_dir / IDX_NAMES["train_images"], mnist_dir / IDX_NAMES["train_labels"]
        )
        view = make_view(images, labels, [0, 1, 2])
        assert view.class_counts() == [5923, 6742, 5958]


class TestViews:
    def test_scaling(self):
        scaled = scale_pixels(np.array([0, 128, 255], dtype=np.uint8))
        assert scaled[0] == 0.0
        assert scaled[2] == 1.0
        assert scaled[1] == 128 / 255

    def test_subset_relabels(self):
        labels = np.array([0, 1, 0, 1], dtype=np.uint8)
        view = make_view(tiny_images(4), labels, [1])
        assert len(view) == 2
        np.testing.assert_array_equal(view.labels, [0, 0])
        assert view.classes == (1,)

    def test_all_classes_identity(self):
        labels = np.array([2, 0, 1, 2], dtype=np.uint8)
        view = make_view(tiny_images(4), labels, [2, 1, 0])
        np.testing.assert_array_equal(view.labels, labels)

    def test_empty_class(self):
        with pytest.raises(EmptyClassError) as exc:
            make_view(tiny_images(2), np.array([0, 0], dtype=np.uint8), [0, 5])
        assert exc.value.label == 5

    def test_limit_per_class_keeps_file_order(self):
        labels = np.array([1, 0, 1, 0, 1, 0], dtype=np.uint8)
        view = limit_per_class(make_view(tiny_images(6), labels, [0, 1]), 2)
        assert view.class_counts() == [2, 2]
        np.testing.assert_array_equal(view.labels, [1, 0, 1, 0])

    def test_limit_per_class_too_large(self):
        labels = np.array([1, 0], dtype=np.uint8)
        with pytest.raises(DataError):
            limit_per_class(make_view(tiny_images(2), labels, [0, 1]), 2)

    def test_load_labels(self, idx_dir):
        labels = load_labels(idx_dir / IDX_NAMES["train_labels"])
        assert sorted(set(labels.tolist())) == [0, 1, 2, 3]


class TestBalancedBatches:
    @pytest.fixture
    def view(self):
        labels = np.repeat(np.arange(3, dtype=np.uint8), 10)
        return make_view(np.zeros((30, 28, 28), dtype=np.uint8), labels, [0, 1, 2])

    def test_every_class_present(self, view):
        batch = next(balanced_batches(view, 2, np.random.default_rng(0)))
        assert batch.size == 6
        assert np.bincount(batch.labels).tolist() == [2, 2, 2]
        assert batch.partition.sizes() == [2, 2, 2]
        np.testing.assert_array_equal(view.labels[batch.indices], batch.labels)

    def test_one_pass_covers_each_index_once(self, view):
        stream = balanced_batches(view, 2, np.random.default_rng(0))
        seen = np.concatenate([next(stream).indices for _ in range(5)])
        assert sorted(seen.tolist()) == list(range(30))

    def test_same_seed_same_sequence(self, view):
        a = balanced_batches(view, 3, np.random.default_rng(42))
        b = balanced_batches(view, 3, np.random.default_rng(42))
        for _ in range(7):
            np.testing.assert_array_equal(next(a).indices, next(b).indices)

    def test_class_smaller_than_batch(self, view):
        with pytest.raises(ConfigError):
            next(balanced_batches(view, 11, np.random.default_rng(0)))
