"""Coding rates of feature sets and the min-max objective built from them.

For a d x n feature matrix Z the coding rate is

    R(Z) = 1/2 logdet(I + d / (n eps^2) Z Z^T)

and the class-conditional rate weights the per-class rates by n_j / n.
The logdet is taken on whichever of Z Z^T (d x d) or Z^T Z (n x n) is
smaller; both share their nonzero eigenvalues.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np

from ..autodiff import (
    Tensor,
    add,
    concat_cols,
    logdet_pd,
    matmul,
    scale,
    sub,
    take_cols,
    transpose,
)
from ..config import DEFAULT_EPS_SQ, DEFAULT_FEATURE_DIM
from ..errors import ConfigError, DimensionError, EmptyClassError, EmptySetError

PAIRWISE_SCOPES = ("per_class", "whole_batch")

GramSide = Literal["auto", "features", "samples"]


@dataclass(frozen=True)
class RateConfig:
    """Rate-distortion settings shared by every rate term."""

    eps_sq: float = DEFAULT_EPS_SQ
    feature_dim: int = DEFAULT_FEATURE_DIM
    pairwise_scope: str = "per_class"

    def __post_init__(self) -> None:
        if not self.eps_sq > 0:
            raise ConfigError(f"eps_sq must be positive, got {self.eps_sq}")
        if self.feature_dim < 2:
            raise ConfigError(f"feature_dim must be >= 2, got {self.feature_dim}")
        if self.pairwise_scope not in PAIRWISE_SCOPES:
            raise ConfigError(
                f"pairwise_scope must be one of {PAIRWISE_SCOPES}, got {self.pairwise_scope!r}"
            )


@dataclass(frozen=True)
class ClassPartition:
    """Assignment of batch columns to classes 0..k-1."""

    num_classes: int
    indices: tuple[np.ndarray, ...]

    @classmethod
    def from_labels(cls, labels: np.ndarray, num_classes: int | None = None) -> "ClassPartition":
        labels = np.asarray(labels, dtype=np.int64)
        k = int(labels.max()) + 1 if num_classes is None else num_classes
        if labels.size and (labels.min() < 0 or labels.max() >= k):
            raise ValueError(f"labels must lie in [0, {k}), got range [{labels.min()}, {labels.max()}]")
        return cls(
            num_classes=k,
            indices=tuple(np.flatnonzero(labels == j) for j in range(k)),
        )

    @property
    def num_samples(self) -> int:
        return sum(len(ix) for ix in self.indices)

    def sizes(self) -> list[int]:
        return [len(ix) for ix in self.indices]


@dataclass
class ObjectiveBreakdown:
    """tau and its three components; ``loss`` carries the tape for backward."""

    loss: Tensor
    pairwise_loss: Tensor
    tau: float
    dr_z: float
    dr_zhat: float
    pairwise_terms: tuple[float, ...]
    pairwise_sum: float


def coding_logdet(z: Tensor, alpha: float, side: GramSide = "auto") -> Tensor:
    """logdet(I + alpha * Gram(z)) on the chosen side of the Gram matrix."""
    d, n = z.shape
    if side == "auto":
        side = "samples" if n < d else "features"
    if side == "samples":
        gram = matmul(transpose(z), z)
        size = n
    else:
        gram = matmul(z, transpose(z))
        size = d
    return logdet_pd(add(scale(gram, alpha), np.eye(size)))


def _check_features(z: Tensor, cfg: RateConfig) -> tuple[int, int]:
    if z.data.ndim != 2:
        raise DimensionError("rate", z.shape)
    d, n = z.shape
    if d != cfg.feature_dim:
        raise DimensionError("rate", z.shape, (cfg.feature_dim, n))
    if n == 0:
        raise EmptySetError("coding rate of an empty feature set")
    return d, n


def rate(z: Tensor, cfg: RateConfig, side: GramSide = "auto") -> Tensor:
    d, n = _check_features(z, cfg)
    return scale(coding_logdet(z, d / (n * cfg.eps_sq), side), 0.5)


def rate_per_class(z: Tensor, part: ClassPartition, cfg: RateConfig) -> Tensor:
    d, n = _check_features(z, cfg)
    if part.num_samples != n:
        raise DimensionError("rate_per_class", z.shape, (part.num_samples,))
    total: Tensor | None = None
    for label, index in enumerate(part.indices):
        n_j = len(index)
        if n_j == 0:
            raise EmptyClassError(label)
        z_j = take_cols(z, index)
        term = scale(coding_logdet(z_j, d / (n_j * cfg.eps_sq)), n_j / (2.0 * n))
        total = term if total is None else add(total, term)
    return total


def delta_r(z: Tensor, part: ClassPartition, cfg: RateConfig) -> Tensor:
    """Rate reduction: total rate minus class-conditional rate."""
    return sub(rate(z, cfg), rate_per_class(z, part, cfg))


def _canonical_pair(a: Tensor, b: Tensor) -> tuple[Tensor, Tensor]:
    # Fixed operand order makes the result bitwise symmetric.
    key_a = (a.shape, a.data.tobytes())
    key_b = (b.shape, b.data.tobytes())
    return (a, b) if key_a <= key_b else (b, a)


def pairwise_delta_r(z_j: Tensor, zhat_j: Tensor, cfg: RateConfig) -> Tensor:
    """R(Z u Zhat) - R(Z)/2 - R(Zhat)/2, the union being column concatenation."""
    for t in (z_j, zhat_j):
        if t.data.ndim != 2 or t.shape[1] == 0:
            raise EmptySetError(f"pairwise rate needs two non-empty sets, got {t.shape}")
    if z_j.shape[0] != zhat_j.shape[0]:
        raise DimensionError("pairwise_delta_r", z_j.shape, zhat_j.shape)
    first, second = _canonical_pair(z_j, zhat_j)
    union = rate(concat_cols(first, second), cfg)
    halves = add(scale(rate(first, cfg), 0.5), scale(rate(second, cfg), 0.5))
    return sub(union, halves)


def objective_tau(
    z: Tensor, zhat: Tensor, part: ClassPartition, cfg: RateConfig
) -> ObjectiveBreakdown:
    """tau = dR(Z) + dR(Zhat) + sum_j dR(Z_j, Zhat_j), summed in ascending class order."""
    if z.shape != zhat.shape:
        raise DimensionError("objective_tau", z.shape, zhat.shape)
    dr_z = delta_r(z, part, cfg)
    dr_zhat = delta_r(zhat, part, cfg)

    if cfg.pairwise_scope == "per_class":
        terms = [
            pairwise_delta_r(take_cols(z, index), take_cols(zhat, index), cfg)
            for index in part.indices
        ]
        pairwise = terms[0]
        for term in terms[1:]:
            pairwise = add(pairwise, term)
        term_values = tuple(t.item() for t in terms)
    else:
        whole = pairwise_delta_r(z, zhat, cfg)
        pairwise = scale(whole, float(part.num_classes))
        term_values = (whole.item(),) * part.num_classes

    tau = add(add(dr_z, dr_zhat), pairwise)
    return ObjectiveBreakdown(
        loss=tau,
        pairwise_loss=pairwise,
        tau=tau.item(),
        dr_z=dr_z.item(),
        dr_zhat=dr_zhat.item(),
        pairwise_terms=term_values,
        pairwise_sum=pairwise.item(),
    )
