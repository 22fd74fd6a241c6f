"""Exception types raised across the package.

Each error subclasses the closest builtin so callers that only know about
``ValueError`` / ``RuntimeError`` still catch them.
"""

from __future__ import annotations


class MinMaxBNNError(Exception):
    """Root of every error raised by minmax_bnn."""


# --- autodiff ---


class DimensionError(MinMaxBNNError, ValueError):
    """Operand shapes are incompatible."""

    def __init__(self, op: str, *shapes: tuple[int, ...]):
        self.op = op
        self.shapes = shapes
        joined = " and ".join(str(tuple(s)) for s in shapes)
        super().__init__(f"{op}: incompatible shapes {joined}")


class NotPositiveDefiniteError(MinMaxBNNError, ArithmeticError):
    """Cholesky factorization met a non-positive pivot."""

    def __init__(self, pivot: int):
        self.pivot = pivot
        super().__init__(f"matrix is not positive definite (pivot {pivot})")


class AsymmetricInputError(MinMaxBNNError, ValueError):
    """A matrix expected to be symmetric is not, within tolerance."""


class DegenerateFeatureError(MinMaxBNNError, ArithmeticError):
    """A feature column has (near) zero norm and cannot be normalized."""

    def __init__(self, column: int, norm: float):
        self.column = column
        self.norm = norm
        super().__init__(f"feature column {column} has norm {norm:.3e}")


class NonFiniteError(MinMaxBNNError, ArithmeticError):
    """An operation produced NaN or Inf."""

    def __init__(self, op: str):
        self.op = op
        super().__init__(f"{op} produced a non-finite value")


class TapeError(MinMaxBNNError, RuntimeError):
    """Misuse of a tape: non-scalar loss or a second backward pass."""


# --- coding rate / parameters ---


class EmptySetError(MinMaxBNNError, ValueError):
    """A feature set with no columns was passed to a rate."""


class EmptyClassError(EmptySetError):
    """A class of the partition holds no samples."""

    def __init__(self, label: int):
        self.label = label
        super().__init__(f"class {label} is empty")


class MirrorViolationError(MinMaxBNNError, ValueError):
    """Two parameter sets do not share names and shapes."""

    def __init__(self, name: str, detail: str):
        self.name = name
        super().__init__(f"parameter {name!r}: {detail}")


# --- data ---


class IdxParseError(MinMaxBNNError, ValueError):
    """An IDX file could not be parsed."""

    def __init__(self, message: str, offset: int):
        self.offset = offset
        super().__init__(f"{message} (byte offset {offset})")


class WrongMagicError(IdxParseError):
    pass


class TruncatedPayloadError(IdxParseError):
    pass


class ExtentOverflowError(IdxParseError):
    pass


class DataError(MinMaxBNNError, RuntimeError):
    """Input data is missing or unusable for the requested run."""


# --- run surface ---


class ConfigError(MinMaxBNNError, ValueError):
    """A run configuration is invalid."""


class CheckpointError(MinMaxBNNError, ValueError):
    """A checkpoint container is unreadable or inconsistent."""


class MetricsFormatError(MinMaxBNNError, ValueError):
    """A metrics CSV file is malformed."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        where = f"line {line}: " if line is not None else ""
        super().__init__(f"{where}{message}")


class NumericAbort(MinMaxBNNError, RuntimeError):
    """A numeric failure during training, tagged with where it happened."""

    def __init__(self, step: int, inner: int, phase: str, cause: Exception):
        self.step = step
        self.inner = inner
        self.phase = phase
        super().__init__(f"step {step} inner {inner} phase {phase}: {cause}")
