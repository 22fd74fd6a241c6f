"""Architecture manifests: the ordered parameter list of each encoder."""

from __future__ import annotations

from dataclasses import dataclass
from math import prod
from typing import Any

from ..config import ARCHITECTURES
from ..errors import ConfigError

IMAGE_SIDE = 28
MLP_HIDDEN = 1024
CONV_STEM = 16
CONV_WIDTH = 32
RESIDUAL_BLOCKS = 2


@dataclass(frozen=True)
class LayerSpec:
    """One weight-carrying layer. No normalization layers exist."""

    name: str
    kind: str  # "linear" or "conv"
    in_features: int
    out_features: int
    kernel: int = 1
    stride: int = 1

    @property
    def weight_shape(self) -> tuple[int, ...]:
        if self.kind == "conv":
            return (self.out_features, self.in_features, self.kernel, self.kernel)
        return (self.out_features, self.in_features)

    @property
    def param_shapes(self) -> list[tuple[str, tuple[int, ...]]]:
        return [
            (f"{self.name}.weight", self.weight_shape),
            (f"{self.name}.bias", (self.out_features,)),
        ]


@dataclass(frozen=True)
class ArchitectureManifest:
    arch: str
    feature_dim: int
    layers: tuple[LayerSpec, ...]

    @property
    def params(self) -> list[tuple[str, tuple[int, ...]]]:
        return [entry for layer in self.layers for entry in layer.param_shapes]

    @property
    def num_parameters(self) -> int:
        return sum(prod(shape) for _, shape in self.params)

    def layer(self, name: str) -> LayerSpec:
        for layer in self.layers:
            if layer.name == name:
                return layer
        raise KeyError(name)

    def to_header(self) -> dict[str, Any]:
        return {"arch": self.arch, "feature_dim": self.feature_dim}


def build_manifest(arch: str, d: int) -> ArchitectureManifest:
    """Parameter layout for ``arch`` with ``d``-dimensional features.

    "mlp": 784 -> 1024 -> d with relu.
    "conv-res-lite": conv3x3(16) -> stride-2 conv3x3(32) -> two residual
    blocks of two conv3x3(32) -> global average pool -> linear to d.
    """
    if d < 2:
        raise ConfigError(f"feature_dim must be >= 2, got {d}")
    if arch == "mlp":
        layers = (
            LayerSpec("fc1", "linear", IMAGE_SIDE * IMAGE_SIDE, MLP_HIDDEN),
            LayerSpec("fc2", "linear", MLP_HIDDEN, d),
        )
    elif arch == "conv-res-lite":
        blocks = tuple(
            LayerSpec(f"block{b}.{part}", "conv", CONV_WIDTH, CONV_WIDTH, kernel=3)
            for b in range(1, RESIDUAL_BLOCKS + 1)
            for part in ("conv_a", "conv_b")
        )
        layers = (
            LayerSpec("stem", "conv", 1, CONV_STEM, kernel=3),
            LayerSpec("down", "conv", CONV_STEM, CONV_WIDTH, kernel=3, stride=2),
            *blocks,
            LayerSpec("head", "linear", CONV_WIDTH, d),
        )
    else:
        raise ConfigError(f"unknown arch {arch!r}; expected one of {ARCHITECTURES}")
    return ArchitectureManifest(arch=arch, feature_dim=d, layers=layers)
