"""Differentiable operations on :class:`Tensor`.

Every operation computes its value eagerly with numpy and, when a tape is
active and some input requires a gradient, records the adjoint rule.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy.linalg import cho_solve, lapack
from scipy.special import expit

from ..errors import (
    AsymmetricInputError,
    DegenerateFeatureError,
    DimensionError,
    NonFiniteError,
    NotPositiveDefiniteError,
)
from .tensor import Adjoint, Tensor, active_tape, as_tensor

SYMMETRY_TOL = 1e-9
MIN_COLUMN_NORM = 1e-12


def _emit(op: str, data: np.ndarray, inputs: Sequence[Tensor], adjoint: Adjoint) -> Tensor:
    if not np.all(np.isfinite(data)):
        raise NonFiniteError(op)
    out = Tensor(data)
    if any(t.requires_grad for t in inputs):
        tape = active_tape()
        if tape is not None:
            out.requires_grad = True
            tape.record(out, inputs, adjoint)
    return out


def _unbroadcast(g: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    while g.ndim > len(shape):
        g = g.sum(axis=0)
    for axis, extent in enumerate(shape):
        if extent == 1 and g.shape[axis] != 1:
            g = g.sum(axis=axis, keepdims=True)
    return g


def _broadcast_shape(op: str, a: Tensor, b: Tensor) -> tuple[int, ...]:
    try:
        return np.broadcast_shapes(a.shape, b.shape)
    except ValueError:
        raise DimensionError(op, a.shape, b.shape) from None


# --- linear algebra ---


def matmul(a: Tensor, b: Tensor) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    if a.data.ndim != 2 or b.data.ndim != 2 or a.shape[1] != b.shape[0]:
        raise DimensionError("matmul", a.shape, b.shape)
    A, B = a.data, b.data

    def adjoint(g):
        return g @ B.T, A.T @ g

    return _emit("matmul", A @ B, (a, b), adjoint)


def transpose(a: Tensor) -> Tensor:
    a = as_tensor(a)
    if a.data.ndim != 2:
        raise DimensionError("transpose", a.shape)
    return _emit("transpose", np.ascontiguousarray(a.data.T), (a,), lambda g: (g.T,))


def logdet_pd(a: Tensor) -> Tensor:
    """log det(a) for symmetric positive definite ``a`` via Cholesky."""
    a = as_tensor(a)
    A = a.data
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise DimensionError("logdet_pd", a.shape)
    scale_ = np.linalg.norm(A)
    asym = np.linalg.norm(A - A.T)
    if asym > SYMMETRY_TOL * scale_:
        raise AsymmetricInputError(
            f"logdet_pd: asymmetry {asym:.3e} exceeds {SYMMETRY_TOL:g} * {scale_:.3e}"
        )
    factor, info = lapack.dpotrf(A, lower=1, clean=1)
    if info > 0:
        raise NotPositiveDefiniteError(info - 1)
    if info < 0:
        raise ValueError(f"dpotrf: illegal argument {-info}")
    value = 2.0 * np.sum(np.log(np.diag(factor)))

    def adjoint(g):
        inv = cho_solve((factor, True), np.eye(A.shape[0]))
        return (g * 0.5 * (inv + inv.T),)

    return _emit("logdet_pd", np.asarray(value), (a,), adjoint)


# --- elementwise ---


def add(a: Tensor, b: Tensor | np.ndarray | float) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    _broadcast_shape("add", a, b)
    sa, sb = a.shape, b.shape
    return _emit(
        "add",
        a.data + b.data,
        (a, b),
        lambda g: (_unbroadcast(g, sa), _unbroadcast(g, sb)),
    )


def sub(a: Tensor, b: Tensor | np.ndarray | float) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    _broadcast_shape("sub", a, b)
    sa, sb = a.shape, b.shape
    return _emit(
        "sub",
        a.data - b.data,
        (a, b),
        lambda g: (_unbroadcast(g, sa), -_unbroadcast(g, sb)),
    )


def mul(a: Tensor, b: Tensor | np.ndarray) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    _broadcast_shape("mul", a, b)
    A, B = a.data, b.data
    return _emit(
        "mul",
        A * B,
        (a, b),
        lambda g: (_unbroadcast(g * B, A.shape), _unbroadcast(g * A, B.shape)),
    )


def scale(a: Tensor, c: float) -> Tensor:
    a = as_tensor(a)
    return _emit("scale", a.data * c, (a,), lambda g: (g * c,))


def relu(a: Tensor) -> Tensor:
    a = as_tensor(a)
    mask = a.data > 0
    return _emit("relu", np.where(mask, a.data, 0.0), (a,), lambda g: (g * mask,))


def softplus(a: Tensor) -> Tensor:
    """log(1 + exp(x)) in the overflow-safe form max(x, 0) + log1p(exp(-|x|))."""
    a = as_tensor(a)
    x = a.data
    value = np.maximum(x, 0.0) + np.log1p(np.exp(-np.abs(x)))
    return _emit("softplus", value, (a,), lambda g: (g * expit(x),))


def logistic(x: np.ndarray) -> np.ndarray:
    return expit(x)


# --- shape ---


def reshape(a: Tensor, shape: tuple[int, ...]) -> Tensor:
    a = as_tensor(a)
    original = a.shape
    try:
        value = a.data.reshape(shape)
    except ValueError:
        raise DimensionError("reshape", original, tuple(shape)) from None
    return _emit("reshape", value, (a,), lambda g: (g.reshape(original),))


def concat_cols(*parts: Tensor) -> Tensor:
    parts = tuple(as_tensor(p) for p in parts)
    rows = {p.shape[0] for p in parts if p.data.ndim == 2}
    if len(rows) != 1 or any(p.data.ndim != 2 for p in parts):
        raise DimensionError("concat_cols", *(p.shape for p in parts))
    bounds = np.cumsum([p.shape[1] for p in parts])[:-1]

    def adjoint(g):
        return tuple(np.split(g, bounds, axis=1))

    return _emit("concat_cols", np.concatenate([p.data for p in parts], axis=1), parts, adjoint)


def take_cols(a: Tensor, index: np.ndarray) -> Tensor:
    a = as_tensor(a)
    index = np.asarray(index, dtype=np.intp)
    shape = a.shape

    def adjoint(g):
        out = np.zeros(shape)
        np.add.at(out, (slice(None), index), g)
        return (out,)

    return _emit("take_cols", a.data[:, index], (a,), adjoint)


# --- reductions ---


def sum_all(a: Tensor) -> Tensor:
    a = as_tensor(a)
    shape = a.shape
    return _emit("sum", np.asarray(a.data.sum()), (a,), lambda g: (np.full(shape, float(g)),))


def mean(a: Tensor) -> Tensor:
    a = as_tensor(a)
    shape, n = a.shape, a.size
    return _emit(
        "mean", np.asarray(a.data.mean()), (a,), lambda g: (np.full(shape, float(g) / n),)
    )


def l2_normalize_cols(a: Tensor) -> Tensor:
    """Scale every column to unit Euclidean norm."""
    a = as_tensor(a)
    if a.data.ndim != 2:
        raise DimensionError("l2_normalize_cols", a.shape)
    norms = np.linalg.norm(a.data, axis=0)
    bad = np.flatnonzero(norms <= MIN_COLUMN_NORM)
    if bad.size:
        raise DegenerateFeatureError(int(bad[0]), float(norms[bad[0]]))
    y = a.data / norms

    def adjoint(g):
        return ((g - y * np.sum(y * g, axis=0)) / norms,)

    return _emit("l2_normalize_cols", y, (a,), adjoint)


# --- convolutional ---


def _im2col(xp: np.ndarray, kh: int, kw: int, stride: int) -> tuple[np.ndarray, int, int]:
    """Contiguous (N*oh*ow) x (C*kh*kw) patch matrix of a padded NCHW batch."""
    windows = sliding_window_view(xp, (kh, kw), axis=(2, 3))[:, :, ::stride, ::stride]
    n, c, out_h, out_w = windows.shape[:4]
    cols = np.ascontiguousarray(windows.transpose(0, 2, 3, 1, 4, 5))
    return cols.reshape(n * out_h * out_w, c * kh * kw), out_h, out_w


def conv2d(x: Tensor, w: Tensor, stride: int = 1, padding: int = 1) -> Tensor:
    """Cross-correlation of an NCHW batch with OIkk filters (no bias).

    Patches are unrolled into one matrix so each direction is a single
    matmul; the patch matrix is rebuilt in the adjoint instead of kept.
    """
    x, w = as_tensor(x), as_tensor(w)
    if x.data.ndim != 4 or w.data.ndim != 4 or x.shape[1] != w.shape[1]:
        raise DimensionError("conv2d", x.shape, w.shape)
    n, _, height, width = x.shape
    out_c, in_c, kh, kw = w.shape
    pad = ((0, 0), (0, 0), (padding, padding), (padding, padding))
    xp = np.pad(x.data, pad)
    W = w.data.reshape(out_c, in_c * kh * kw)
    cols, out_h, out_w = _im2col(xp, kh, kw, stride)
    out = np.ascontiguousarray((cols @ W.T).reshape(n, out_h, out_w, out_c).transpose(0, 3, 1, 2))
    del cols

    def adjoint(g):
        g_rows = np.ascontiguousarray(g.transpose(0, 2, 3, 1)).reshape(-1, out_c)
        patches, _, _ = _im2col(xp, kh, kw, stride)
        gw = (g_rows.T @ patches).reshape(w.shape)
        del patches
        gcols = (g_rows @ W).reshape(n, out_h, out_w, in_c, kh, kw)
        gxp = np.zeros_like(xp)
        for i in range(kh):
            for j in range(kw):
                gxp[:, :, i : i + stride * out_h : stride, j : j + stride * out_w : stride] += (
                    gcols[:, :, :, :, i, j].transpose(0, 3, 1, 2)
                )
        gx = gxp[:, :, padding : padding + height, padding : padding + width]
        return np.ascontiguousarray(gx), gw

    return _emit("conv2d", out, (x, w), adjoint)


def global_avg_pool(x: Tensor) -> Tensor:
    """NCHW -> NC, averaging over the spatial extents."""
    x = as_tensor(x)
    if x.data.ndim != 4:
        raise DimensionError("global_avg_pool", x.shape)
    shape = x.shape
    area = shape[2] * shape[3]

    def adjoint(g):
        return (np.broadcast_to(g[:, :, None, None] / area, shape).copy(),)

    return _emit("global_avg_pool", x.data.mean(axis=(2, 3)), (x,), adjoint)
