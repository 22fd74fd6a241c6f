"""Named parameter arrays shared by the mean, variance and sampled networks."""

from __future__ import annotations

import hashlib
from typing import Callable, Iterator, Mapping

import numpy as np

from ..autodiff import Tensor
from ..errors import MirrorViolationError


class ParamSet(Mapping[str, np.ndarray]):
    """Ordered mapping of parameter name to fp64 array.

    Order follows the architecture manifest. Arrays are owned by the set and
    may be updated in place by the optimizer.
    """

    def __init__(self, arrays: Mapping[str, np.ndarray]):
        self._arrays: dict[str, np.ndarray] = {
            name: np.asarray(value, dtype=np.float64) for name, value in arrays.items()
        }

    def __getitem__(self, name: str) -> np.ndarray:
        return self._arrays[name]

    def __iter__(self) -> Iterator[str]:
        return iter(self._arrays)

    def __len__(self) -> int:
        return len(self._arrays)

    def __repr__(self) -> str:
        return f"ParamSet({len(self)} arrays, {self.num_elements} elements)"

    @property
    def num_elements(self) -> int:
        return sum(a.size for a in self._arrays.values())

    def shapes(self) -> dict[str, tuple[int, ...]]:
        return {name: a.shape for name, a in self._arrays.items()}

    def check_mirror(self, other: Mapping[str, np.ndarray]) -> None:
        """Raise MirrorViolationError unless ``other`` has the same names and shapes."""
        mine, theirs = set(self._arrays), set(other)
        for name in sorted(mine ^ theirs):
            side = "missing from the other set" if name in mine else "unexpected"
            raise MirrorViolationError(name, side)
        for name, array in self._arrays.items():
            other_shape = np.shape(other[name])
            if array.shape != tuple(other_shape):
                raise MirrorViolationError(name, f"shape {array.shape} vs {tuple(other_shape)}")

    def map(self, fn: Callable[[np.ndarray], np.ndarray]) -> "ParamSet":
        return ParamSet({name: fn(a) for name, a in self._arrays.items()})

    def copy(self) -> "ParamSet":
        return self.map(np.copy)

    def mean(self) -> float:
        """Mean over every element of every array."""
        total = sum(float(a.sum()) for a in self._arrays.values())
        return total / self.num_elements

    def checksum(self) -> str:
        digest = hashlib.sha256()
        for name, array in self._arrays.items():
            digest.update(name.encode("utf-8"))
            digest.update(np.ascontiguousarray(array).tobytes())
        return digest.hexdigest()

    def as_tensors(self, requires_grad: bool = False) -> dict[str, Tensor]:
        """Wrap every array (without copying) as a tape leaf."""
        return {
            name: Tensor(a, requires_grad=requires_grad, name=name)
            for name, a in self._arrays.items()
        }

    @classmethod
    def from_tensor_grads(cls, tensors: Mapping[str, Tensor]) -> "ParamSet":
        return cls({name: t.grad for name, t in tensors.items()})

    @classmethod
    def zeros_like(cls, other: Mapping[str, np.ndarray]) -> "ParamSet":
        return cls({name: np.zeros(np.shape(a)) for name, a in other.items()})


# Readability aliases for the three roles a ParamSet plays.
MeanParams = ParamSet
VarianceParams = ParamSet
