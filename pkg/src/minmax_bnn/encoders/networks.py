"""Feature encoders f(X, theta): image batch -> unit-norm d x n feature columns.

The same encoder body serves NetD (mean parameters) and NetG (a sampled
parameter draw); only the parameter source differs.
"""

from __future__ import annotations

from abc import ABC, abstractmethod
from contextlib import nullcontext
from typing import Mapping

import numpy as np

from ..autodiff import (
    Tape,
    Tensor,
    add,
    conv2d,
    global_avg_pool,
    l2_normalize_cols,
    matmul,
    relu,
    reshape,
    transpose,
)
from ..errors import DimensionError, MirrorViolationError
from .manifest import IMAGE_SIDE, RESIDUAL_BLOCKS, ArchitectureManifest

ParamSource = Mapping[str, "Tensor | np.ndarray"]


class Encoder(ABC):
    """Base class for encoders built from an ArchitectureManifest."""

    name: str

    def __init__(self, manifest: ArchitectureManifest):
        self.manifest = manifest

    @abstractmethod
    def features(self, params: Mapping[str, Tensor], images: np.ndarray) -> Tensor:
        """Un-normalized d x n features."""

    def forward(self, params: Mapping[str, Tensor], images: np.ndarray) -> Tensor:
        return l2_normalize_cols(self.features(params, images))

    def _linear(self, params: Mapping[str, Tensor], layer: str, x: Tensor) -> Tensor:
        """W x + b for column-major activations x (in_features x n)."""
        weight = params[f"{layer}.weight"]
        bias = params[f"{layer}.bias"]
        return add(matmul(weight, x), reshape(bias, (bias.shape[0], 1)))

    def _conv(self, params: Mapping[str, Tensor], layer: str, x: Tensor) -> Tensor:
        spec = self.manifest.layer(layer)
        weight = params[f"{layer}.weight"]
        bias = params[f"{layer}.bias"]
        out = conv2d(x, weight, stride=spec.stride, padding=spec.kernel // 2)
        return add(out, reshape(bias, (1, bias.shape[0], 1, 1)))


class MlpEncoder(Encoder):
    """784 -> 1024 -> d, relu in between."""

    name = "mlp"

    def features(self, params: Mapping[str, Tensor], images: np.ndarray) -> Tensor:
        x = Tensor(images.reshape(images.shape[0], -1).T)
        hidden = relu(self._linear(params, "fc1", x))
        return self._linear(params, "fc2", hidden)


class ConvResLiteEncoder(Encoder):
    """Small normalization-free residual conv net."""

    name = "conv-res-lite"

    def features(self, params: Mapping[str, Tensor], images: np.ndarray) -> Tensor:
        x = Tensor(images[:, None, :, :])
        x = relu(self._conv(params, "stem", x))
        x = relu(self._conv(params, "down", x))
        for b in range(1, RESIDUAL_BLOCKS + 1):
            block = f"block{b}"
            inner = relu(self._conv(params, f"{block}.conv_a", x))
            x = relu(add(self._conv(params, f"{block}.conv_b", inner), x))
        pooled = global_avg_pool(x)
        return self._linear(params, "head", transpose(pooled))


ENCODERS: dict[str, type[Encoder]] = {
    cls.name: cls for cls in (MlpEncoder, ConvResLiteEncoder)
}


def build_encoder(manifest: ArchitectureManifest) -> Encoder:
    return ENCODERS[manifest.arch](manifest)


def check_params(manifest: ArchitectureManifest, params: ParamSource) -> None:
    """Raise MirrorViolationError unless params match the manifest exactly."""
    expected = dict(manifest.params)
    for name in sorted(set(expected) ^ set(params)):
        detail = "missing" if name in expected else "not in the manifest"
        raise MirrorViolationError(name, detail)
    for name, shape in expected.items():
        got = tuple(params[name].shape)
        if got != shape:
            raise MirrorViolationError(name, f"shape {got} vs manifest {shape}")


def forward(
    manifest: ArchitectureManifest,
    params: ParamSource,
    images: np.ndarray,
    tape: Tape | None = None,
) -> Tensor:
    """Encode an (n, 28, 28) image batch into unit-norm d x n features.

    Operations are recorded on ``tape`` (or on whichever tape is already
    active) when parameters require gradients.
    """
    check_params(manifest, params)
    images = np.asarray(images, dtype=np.float64)
    if images.ndim != 3 or images.shape[1:] != (IMAGE_SIDE, IMAGE_SIDE):
        raise DimensionError("forward", images.shape, (images.shape[0], IMAGE_SIDE, IMAGE_SIDE))
    tensors = {
        name: value if isinstance(value, Tensor) else Tensor(value)
        for name, value in params.items()
    }
    with tape if tape is not None else nullcontext():
        return build_encoder(manifest).forward(tensors, images)
