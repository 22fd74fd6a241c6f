"""Read and write IDX files (the MNIST container format).

Layout (big endian):
    u8  0, u8 0       | magic prefix
    u8  type          | 0x08 = unsigned byte payload
    u8  ndim          | number of extents
    u32 extent[ndim]  | one per dimension
    u8[]              | payload, row-major
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from math import prod
from pathlib import Path

import numpy as np

from ..errors import (
    DataError,
    ExtentOverflowError,
    IdxParseError,
    TruncatedPayloadError,
    WrongMagicError,
)

IMAGES_MAGIC = 0x00000803  # 2051
LABELS_MAGIC = 0x00000801  # 2049
KNOWN_MAGICS = {IMAGES_MAGIC: 3, LABELS_MAGIC: 1}
UBYTE_TYPE = 0x08

# Largest payload accepted (elements); guards against absurd extents.
MAX_ELEMENTS = 2**31 - 1


@dataclass(frozen=True)
class IdxHeader:
    magic: int
    extents: tuple[int, ...]

    @property
    def ndim(self) -> int:
        return len(self.extents)

    @property
    def size(self) -> int:
        return 4 + 4 * self.ndim

    @property
    def kind(self) -> str:
        return "images" if self.magic == IMAGES_MAGIC else "labels"


@dataclass
class IdxArray:
    header: IdxHeader
    data: np.ndarray  # uint8, shape == header.extents


def parse_idx_bytes(raw: bytes, expect_magic: int | None = None) -> IdxArray:
    """Parse an in-memory IDX file, validating magic and extents."""
    if len(raw) < 4:
        raise TruncatedPayloadError("file shorter than the magic number", offset=len(raw))
    (magic,) = struct.unpack(">I", raw[:4])
    if magic not in KNOWN_MAGICS:
        raise WrongMagicError(f"unknown magic 0x{magic:08x}", offset=0)
    if expect_magic is not None and magic != expect_magic:
        raise WrongMagicError(
            f"expected magic {expect_magic} ({KNOWN_MAGICS[expect_magic]} dims), got {magic}",
            offset=0,
        )

    ndim = KNOWN_MAGICS[magic]
    header_size = 4 + 4 * ndim
    if len(raw) < header_size:
        raise TruncatedPayloadError("header is truncated", offset=len(raw))
    extents = struct.unpack(f">{ndim}I", raw[4:header_size])
    count = 1
    for axis, extent in enumerate(extents):
        count *= extent
        if extent == 0 or count > MAX_ELEMENTS:
            raise ExtentOverflowError(
                f"extent {extent} on axis {axis} gives an invalid payload size",
                offset=4 + 4 * axis,
            )

    payload = raw[header_size:]
    if len(payload) < count:
        raise TruncatedPayloadError(
            f"payload has {len(payload)} bytes, header declares {count}",
            offset=len(raw),
        )
    if len(payload) > count:
        raise IdxParseError(
            f"{len(payload) - count} trailing bytes after the payload",
            offset=header_size + count,
        )
    data = np.frombuffer(payload, dtype=np.uint8).reshape(extents)
    return IdxArray(header=IdxHeader(magic=magic, extents=tuple(extents)), data=data)


def parse_idx(path: Path, expect_magic: int | None = None) -> IdxArray:
    if not Path(path).exists():
        raise FileNotFoundError(f"IDX file not found: {path}")
    return parse_idx_bytes(Path(path).read_bytes(), expect_magic)


def idx_bytes(data: np.ndarray) -> bytes:
    """Serialize a uint8 array as an IDX file."""
    data = np.asarray(data)
    if data.dtype != np.uint8:
        raise ValueError(f"IDX payload must be uint8, got {data.dtype}")
    magic = (UBYTE_TYPE << 8) | data.ndim
    if magic not in KNOWN_MAGICS:
        raise ValueError(f"no IDX magic for {data.ndim}-dimensional payloads")
    header = struct.pack(f">I{data.ndim}I", magic, *data.shape)
    return header + np.ascontiguousarray(data).tobytes()


def write_idx(path: Path, data: np.ndarray) -> None:
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    Path(path).write_bytes(idx_bytes(data))


def load_images(path: Path) -> np.ndarray:
    return parse_idx(path, IMAGES_MAGIC).data


def load_labels(path: Path) -> np.ndarray:
    return parse_idx(path, LABELS_MAGIC).data


def load_split(images_path: Path, labels_path: Path) -> tuple[np.ndarray, np.ndarray]:
    """Load a matching images/labels pair."""
    images = load_images(images_path)
    labels = load_labels(labels_path)
    if images.shape[0] != labels.shape[0]:
        raise DataError(
            f"{images_path} holds {images.shape[0]} images but "
            f"{labels_path} holds {labels.shape[0]} labels"
        )
    return images, labels
