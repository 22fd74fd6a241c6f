"""Dense fp64 tensors and the tape that records their adjoint rules."""

from __future__ import annotations

from contextvars import ContextVar
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from ..errors import TapeError

# Adjoint rule: output gradient -> one gradient (or None) per input.
Adjoint = Callable[[np.ndarray], Sequence["np.ndarray | None"]]

_ACTIVE_TAPE: ContextVar["Tape | None"] = ContextVar("minmax_bnn_active_tape", default=None)


class Tensor:
    """A dense real array with an optional gradient slot."""

    __slots__ = ("data", "requires_grad", "grad", "name")

    def __init__(
        self,
        data: np.ndarray | float | Sequence,
        requires_grad: bool = False,
        name: str | None = None,
    ):
        self.data = np.asarray(data, dtype=np.float64)
        self.requires_grad = requires_grad
        self.grad = np.zeros_like(self.data) if requires_grad else None
        self.name = name

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    @property
    def size(self) -> int:
        return self.data.size

    def item(self) -> float:
        if self.data.size != 1:
            raise ValueError(f"item() needs a single element, got shape {self.shape}")
        return float(self.data.reshape(()))

    def numpy(self) -> np.ndarray:
        return self.data

    def zero_grad(self) -> None:
        if self.requires_grad:
            self.grad = np.zeros_like(self.data)

    def detach(self) -> "Tensor":
        return Tensor(self.data)

    # Operator sugar; the rules live in ops.
    def __add__(self, other):
        from .ops import add

        return add(self, other)

    __radd__ = __add__

    def __sub__(self, other):
        from .ops import sub

        return sub(self, other)

    def __mul__(self, other):
        from .ops import mul, scale

        if isinstance(other, (int, float)):
            return scale(self, float(other))
        return mul(self, other)

    __rmul__ = __mul__

    def __neg__(self):
        from .ops import scale

        return scale(self, -1.0)

    def __matmul__(self, other):
        from .ops import matmul

        return matmul(self, other)

    @property
    def T(self) -> "Tensor":
        from .ops import transpose

        return transpose(self)

    def __repr__(self) -> str:
        label = f" name={self.name!r}" if self.name else ""
        return f"Tensor(shape={self.shape}, requires_grad={self.requires_grad}{label})"


def as_tensor(value: "Tensor | np.ndarray | float") -> Tensor:
    return value if isinstance(value, Tensor) else Tensor(value)


@dataclass
class _Record:
    out: Tensor
    inputs: tuple[Tensor, ...]
    adjoint: Adjoint


class Tape:
    """Ordered record of differentiable operations.

    Operations record themselves on the tape that is active (``with tape:``)
    when they run. Nothing is recorded when no tape is active or when none
    of an operation's inputs requires a gradient.
    """

    def __init__(self) -> None:
        self._records: list[_Record] = []
        self._consumed = False
        self._tokens: list = []

    def __enter__(self) -> "Tape":
        if self._consumed:
            raise TapeError("tape was already consumed by a backward pass")
        self._tokens.append(_ACTIVE_TAPE.set(self))
        return self

    def __exit__(self, *exc) -> None:
        _ACTIVE_TAPE.reset(self._tokens.pop())

    def __len__(self) -> int:
        return len(self._records)

    @property
    def consumed(self) -> bool:
        return self._consumed

    def record(self, out: Tensor, inputs: Sequence[Tensor], adjoint: Adjoint) -> None:
        if self._consumed:
            raise TapeError("cannot record on a consumed tape")
        self._records.append(_Record(out, tuple(inputs), adjoint))

    def backward(self, loss: Tensor) -> None:
        """Accumulate d(loss)/d(leaf) into every requires-gradient leaf."""
        if self._consumed:
            raise TapeError("tape was already consumed by a backward pass")
        if loss.size != 1:
            raise TapeError(f"backward needs a scalar loss, got shape {loss.shape}")
        produced = {id(rec.out) for rec in self._records}
        if id(loss) not in produced:
            raise TapeError("loss was not produced on this tape")

        adjoints: dict[int, np.ndarray] = {id(loss): np.ones_like(loss.data)}
        leaves: dict[int, Tensor] = {}
        for rec in reversed(self._records):
            g = adjoints.pop(id(rec.out), None)
            if g is None:
                continue
            for inp, gi in zip(rec.inputs, rec.adjoint(g)):
                if gi is None or not inp.requires_grad:
                    continue
                key = id(inp)
                adjoints[key] = adjoints[key] + gi if key in adjoints else gi
                if key not in produced:
                    leaves[key] = inp

        for key, leaf in leaves.items():
            leaf.grad = leaf.grad + adjoints[key]

        self._records.clear()
        self._consumed = True


def active_tape() -> Tape | None:
    return _ACTIVE_TAPE.get()


def backward(loss: Tensor, tape: Tape) -> None:
    tape.backward(loss)
