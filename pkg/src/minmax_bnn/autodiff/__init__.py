"""Dense fp64 tensors with reverse-mode differentiation."""

from .ops import (
    add,
    concat_cols,
    conv2d,
    global_avg_pool,
    l2_normalize_cols,
    logdet_pd,
    logistic,
    matmul,
    mean,
    mul,
    relu,
    reshape,
    scale,
    softplus,
    sub,
    sum_all,
    take_cols,
    transpose,
)
from .tensor import Tape, Tensor, active_tape, backward

__all__ = [
    "Tape",
    "Tensor",
    "active_tape",
    "add",
    "backward",
    "concat_cols",
    "conv2d",
    "global_avg_pool",
    "l2_normalize_cols",
    "logdet_pd",
    "logistic",
    "matmul",
    "mean",
    "mul",
    "relu",
    "reshape",
    "scale",
    "softplus",
    "sub",
    "sum_all",
    "take_cols",
    "transpose",
]
