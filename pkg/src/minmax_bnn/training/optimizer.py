"""Bias-corrected Adam over a ParamSet, ascending or descending."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from ..errors import MirrorViolationError
from ..stochastic.params import ParamSet

Direction = Literal["ascend", "descend"]


@dataclass
class OptimizerState:
    """First/second moment accumulators mirroring one ParamSet."""

    m: dict[str, np.ndarray] = field(default_factory=dict)
    v: dict[str, np.ndarray] = field(default_factory=dict)
    t: int = 0

    @classmethod
    def for_params(cls, params: ParamSet) -> "OptimizerState":
        return cls(
            m={name: np.zeros_like(a) for name, a in params.items()},
            v={name: np.zeros_like(a) for name, a in params.items()},
        )


def adam_update(
    params: ParamSet,
    grads: ParamSet,
    state: OptimizerState,
    lr: float,
    beta1: float,
    beta2: float,
    eps: float,
    direction: Direction,
) -> ParamSet:
    """One Adam step applied in place; returns ``params``.

    ``ascend`` adds the step (the max player), ``descend`` subtracts it.
    """
    params.check_mirror(grads)
    params.check_mirror(state.m)
    if direction not in ("ascend", "descend"):
        raise ValueError(f"direction must be 'ascend' or 'descend', got {direction!r}")
    sign = 1.0 if direction == "ascend" else -1.0

    state.t += 1
    bc1 = 1.0 - beta1**state.t
    bc2 = 1.0 - beta2**state.t
    step_size = lr / bc1

    for name in params:
        g = grads[name]
        m = state.m[name]
        v = state.v[name]
        if m.shape != g.shape:
            raise MirrorViolationError(name, f"optimizer state {m.shape} vs gradient {g.shape}")
        m *= beta1
        m += (1.0 - beta1) * g
        v *= beta2
        v += (1.0 - beta2) * (g * g)
        denom = np.sqrt(v / bc2) + eps
        params[name][...] += sign * step_size * m / denom
    return params
