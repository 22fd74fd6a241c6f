"""Central finite-difference oracle for tape gradients."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .tensor import Tape, Tensor

DEFAULT_STEP = 1e-5
GRAD_FLOOR = 1e-8


@dataclass
class GradCheckResult:
    analytic: list[np.ndarray]
    numeric: list[np.ndarray]

    @property
    def max_rel_error(self) -> float:
        """Largest relative error over elements whose gradient exceeds GRAD_FLOOR."""
        worst = 0.0
        for a, n in zip(self.analytic, self.numeric):
            mask = np.maximum(np.abs(a), np.abs(n)) > GRAD_FLOOR
            if not mask.any():
                continue
            rel = np.abs(a[mask] - n[mask]) / np.maximum(np.abs(a[mask]), np.abs(n[mask]))
            worst = max(worst, float(rel.max()))
        return worst


def analytic_gradients(
    fn: Callable[..., Tensor], inputs: Sequence[np.ndarray]
) -> list[np.ndarray]:
    leaves = [Tensor(np.array(x, dtype=np.float64), requires_grad=True) for x in inputs]
    with Tape() as tape:
        loss = fn(*leaves)
    tape.backward(loss)
    return [leaf.grad for leaf in leaves]


def numeric_gradients(
    fn: Callable[..., Tensor], inputs: Sequence[np.ndarray], step: float = DEFAULT_STEP
) -> list[np.ndarray]:
    base = [np.array(x, dtype=np.float64) for x in inputs]
    grads = []
    for k, x in enumerate(base):
        g = np.zeros_like(x)
        flat = x.reshape(-1)
        for i in range(flat.size):
            saved = flat[i]
            flat[i] = saved + step
            plus = fn(*(Tensor(b) for b in base)).item()
            flat[i] = saved - step
            minus = fn(*(Tensor(b) for b in base)).item()
            flat[i] = saved
            g.reshape(-1)[i] = (plus - minus) / (2.0 * step)
        grads.append(g)
    return grads


def check_gradients(
    fn: Callable[..., Tensor], inputs: Sequence[np.ndarray], step: float = DEFAULT_STEP
) -> GradCheckResult:
    """Compare tape gradients of a scalar ``fn`` with central differences.

    ``fn`` receives one Tensor per input array and must return a scalar Tensor.
    """
    return GradCheckResult(
        analytic=analytic_gradients(fn, inputs),
        numeric=numeric_gradients(fn, inputs, step),
    )
