"""Variance parameters and the sampling rule NetG = NetD + sample(0, NetV).

Each weight of the sampled network is ``mu + softplus(v) * eps`` with
``eps ~ N(0, 1)`` drawn fresh for every draw. Writing the sample this way
keeps it differentiable in both ``mu`` and ``v``.
"""

from __future__ import annotations

import math
import zlib
from dataclasses import dataclass
from typing import TYPE_CHECKING, Mapping

import numpy as np

from ..autodiff import Tensor, add, mul, softplus
from ..errors import ConfigError
from .params import MeanParams, ParamSet, VarianceParams

if TYPE_CHECKING:
    from ..encoders.manifest import ArchitectureManifest

SIGMA_FLOOR = 1e-8


def softplus_inverse(sigma: float) -> float:
    """v with softplus(v) == sigma, i.e. log(exp(sigma) - 1)."""
    if sigma <= 0:
        raise ValueError(f"softplus_inverse needs sigma > 0, got {sigma}")
    return math.log(math.expm1(sigma))


V_FLOOR = softplus_inverse(SIGMA_FLOOR)


class NoiseSource:
    """Keyed standard-normal noise.

    The noise for parameter ``name`` in draw ``draw_id`` depends only on
    ``(seed, draw_id, name)``, so any draw can be regenerated and arrays can
    be sampled in any order.
    """

    def __init__(self, seed: int, zero_noise: bool = False, first_draw: int = 0):
        self.seed = seed
        self.zero_noise = zero_noise  # test-only: every eps is exactly 0
        self._next_draw = first_draw

    def next_draw(self) -> int:
        draw_id = self._next_draw
        self._next_draw += 1
        return draw_id

    def epsilon(self, draw_id: int, name: str, shape: tuple[int, ...]) -> np.ndarray:
        if self.zero_noise:
            return np.zeros(shape)
        key = np.random.SeedSequence([self.seed, draw_id, zlib.crc32(name.encode("utf-8"))])
        return np.random.default_rng(key).standard_normal(shape)

    def epsilon_set(self, draw_id: int, like: Mapping[str, np.ndarray]) -> ParamSet:
        return ParamSet(
            {name: self.epsilon(draw_id, name, np.shape(a)) for name, a in like.items()}
        )


@dataclass
class SampledParams:
    """One draw of NetG and the coordinates that reproduce it."""

    params: ParamSet
    seed: int
    draw_id: int


def init_params(
    manifest: "ArchitectureManifest",
    init_std: float,
    sigma_init: float,
    rng: np.random.Generator,
) -> tuple[MeanParams, VarianceParams]:
    """Draw mu ~ N(0, init_std^2); set every v to softplus^-1(sigma_init).

    sigma_init == 0 maps to V_FLOOR.
    """
    if not init_std > 0:
        raise ConfigError(f"init_std must be positive, got {init_std}")
    if sigma_init < 0:
        raise ConfigError(f"sigma_init must be >= 0, got {sigma_init}")
    v0 = V_FLOOR if sigma_init <= SIGMA_FLOOR else softplus_inverse(sigma_init)
    mu = ParamSet({name: rng.normal(0.0, init_std, shape) for name, shape in manifest.params})
    var = ParamSet({name: np.full(shape, v0) for name, shape in manifest.params})
    return mu, var


def sigma_of(var: VarianceParams, zero_sigma: bool = False) -> ParamSet:
    """Per-element standard deviation softplus(v)."""
    if zero_sigma:
        return var.map(np.zeros_like)
    return var.map(lambda v: softplus(Tensor(v)).data)


def clamp_variance(var: VarianceParams) -> None:
    """Keep every v at or above V_FLOOR, in place."""
    for name in var:
        np.maximum(var[name], V_FLOOR, out=var[name])


def reparameterize(
    mu: Mapping[str, Tensor],
    v: Mapping[str, Tensor],
    eps: Mapping[str, np.ndarray],
    zero_sigma: bool = False,
) -> dict[str, Tensor]:
    """theta = mu + softplus(v) * eps, recorded on the active tape.

    d theta / d mu = 1 and d theta / d v = eps * logistic(v). With
    ``zero_sigma`` the sample is mu itself.
    """
    if zero_sigma:
        return dict(mu)
    return {name: add(mu[name], mul(softplus(v[name]), eps[name])) for name in mu}


def sample_net(
    mu: MeanParams,
    var: VarianceParams,
    noise: NoiseSource,
    zero_sigma: bool = False,
) -> SampledParams:
    """Draw a fresh NetG outside of any training step."""
    mu.check_mirror(var)
    draw_id = noise.next_draw()
    eps = noise.epsilon_set(draw_id, mu)
    theta = reparameterize(mu.as_tensors(), var.as_tensors(), eps, zero_sigma)
    return SampledParams(
        params=ParamSet({name: np.array(t.data) for name, t in theta.items()}),
        seed=noise.seed,
        draw_id=draw_id,
    )
