"""Defaults, paths, and run configuration loading."""

from __future__ import annotations

import json
import os
import types
import typing
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any

import yaml
from dotenv import load_dotenv

from .errors import ConfigError, DataError

load_dotenv()

# --- Paths ---
# Optional: directory holding the four canonical MNIST IDX files.
DATA_DIR = Path(os.getenv("MINMAX_BNN_DATA_DIR", Path.home() / "data" / "mnist"))
RUNS_DIR = Path(os.getenv("MINMAX_BNN_RUNS_DIR", Path.cwd() / "runs"))
PRESETS_DIR = Path(__file__).parent.parent.parent / "configs"

MNIST_FILES = {
    "train_images": "train-images-idx3-ubyte",
    "train_labels": "train-labels-idx1-ubyte",
    "test_images": "t10k-images-idx3-ubyte",
    "test_labels": "t10k-labels-idx1-ubyte",
}

# --- Rate settings ---
DEFAULT_EPS_SQ = 0.5
DEFAULT_FEATURE_DIM = 128

# --- Optimizer settings (Adam(0.5, 0.999), lr 1e-3) ---
DEFAULT_LR = 1e-3
DEFAULT_BETA1 = 0.5
DEFAULT_BETA2 = 0.999
DEFAULT_ADAM_EPSILON = 1e-8

# --- Initialization: mu ~ N(0, 0.02^2), sigma starts at 0.02 ---
DEFAULT_INIT_STD = 0.02
DEFAULT_SIGMA_INIT = 0.02

# --- Schedule ---
DEFAULT_NUMSTEPS = 10
DEFAULT_NS = 5
DEFAULT_BATCH_PER_CLASS = 128

# --- Evaluation ---
DEFAULT_K_NN = 5
EVAL_CHUNK = 256

ARCHITECTURES = ("mlp", "conv-res-lite")
DATA_PATH_KEYS = ("train_images", "train_labels", "test_images", "test_labels")


@dataclass
class RunConfig:
    """Every effective setting of a training run.

    Data paths have no default; every other field does.
    """

    train_images: Path | None = None
    train_labels: Path | None = None
    test_images: Path | None = None
    test_labels: Path | None = None
    classes: list[int] = field(default_factory=lambda: list(range(10)))
    train_per_class: int | None = None
    test_per_class: int | None = None

    arch: str = "conv-res-lite"
    feature_dim: int = DEFAULT_FEATURE_DIM
    eps_sq: float = DEFAULT_EPS_SQ
    pairwise_scope: str = "per_class"

    numsteps: int = DEFAULT_NUMSTEPS
    ns: int = DEFAULT_NS
    lr: float = DEFAULT_LR
    beta1: float = DEFAULT_BETA1
    beta2: float = DEFAULT_BETA2
    adam_epsilon: float = DEFAULT_ADAM_EPSILON
    batch_per_class: int = DEFAULT_BATCH_PER_CLASS
    seed: int = 0
    sigma_init: float = DEFAULT_SIGMA_INIT
    init_std: float = DEFAULT_INIT_STD
    netv_direction: str = "min"
    detach_generator_for_d: bool = False
    zero_sigma: bool = False

    k_nn: int = DEFAULT_K_NN
    eval_every: int = 1
    checkpoint_every: int = 0
    record_wall_clock: bool = False
    output_dir: Path = field(default_factory=lambda: RUNS_DIR / "latest")

    def __post_init__(self) -> None:
        for key in (*DATA_PATH_KEYS, "output_dir"):
            value = getattr(self, key)
            if value is not None:
                setattr(self, key, Path(value))
        if self.arch not in ARCHITECTURES:
            raise ConfigError(f"unknown arch {self.arch!r}; expected one of {ARCHITECTURES}")
        if not self.classes:
            raise ConfigError("classes must name at least one class")
        if len(set(self.classes)) != len(self.classes):
            raise ConfigError(f"classes contains duplicates: {self.classes}")
        for key in ("k_nn", "eval_every", "numsteps", "ns", "batch_per_class"):
            if getattr(self, key) < 1:
                raise ConfigError(f"{key} must be >= 1, got {getattr(self, key)}")
        if self.checkpoint_every < 0:
            raise ConfigError(f"checkpoint_every must be >= 0, got {self.checkpoint_every}")
        # Constructing the split configs validates their own invariants.
        self.train_config()
        self.rate_config()

    def train_config(self):
        from .training.runner import TrainConfig

        return TrainConfig(
            numsteps=self.numsteps,
            ns=self.ns,
            lr=self.lr,
            beta1=self.beta1,
            beta2=self.beta2,
            adam_epsilon=self.adam_epsilon,
            batch_per_class=self.batch_per_class,
            seed=self.seed,
            sigma_init=self.sigma_init,
            init_std=self.init_std,
            netv_direction=self.netv_direction,
            pairwise_scope=self.pairwise_scope,
            detach_generator_for_d=self.detach_generator_for_d,
            zero_sigma=self.zero_sigma,
        )

    def rate_config(self):
        from .coding_rate.rates import RateConfig

        return RateConfig(
            eps_sq=self.eps_sq,
            feature_dim=self.feature_dim,
            pairwise_scope=self.pairwise_scope,
        )

    def check_data_paths(self) -> None:
        """Raise DataError unless every data path is set and exists."""
        for key in DATA_PATH_KEYS:
            path = getattr(self, key)
            if path is None:
                raise DataError(f"{key} is not set")
            if not path.exists():
                raise DataError(f"{key} not found: {path}")

    def resolved(self) -> dict[str, Any]:
        """JSON-ready dict of every effective setting, defaults included."""
        data = asdict(self)
        for key, value in data.items():
            if isinstance(value, Path):
                data[key] = str(value)
        return data


def _field_types() -> dict[str, Any]:
    return typing.get_type_hints(RunConfig)


def _coerce(key: str, raw: Any, annotation: Any) -> Any:
    """Coerce a config value (file or command line) to the field's type."""
    origin = typing.get_origin(annotation)
    args = typing.get_args(annotation)
    if origin in (typing.Union, types.UnionType):
        if raw is None or (isinstance(raw, str) and raw.lower() in ("none", "null")):
            return None
        inner = next(a for a in args if a is not type(None))
        return _coerce(key, raw, inner)
    try:
        if annotation is bool:
            if isinstance(raw, bool):
                return raw
            text = str(raw).strip().lower()
            if text in ("1", "true", "yes", "on"):
                return True
            if text in ("0", "false", "no", "off"):
                return False
            raise ValueError(raw)
        if annotation is int:
            if isinstance(raw, float) and not raw.is_integer():
                raise ValueError(raw)
            return int(raw)
        if annotation is float:
            return float(raw)
        if annotation is Path:
            return Path(raw)
        if origin is list:
            items = raw
            if isinstance(raw, str):
                items = [part for part in raw.replace(" ", "").split(",") if part]
            return [_coerce(key, item, args[0]) for item in items]
        return str(raw)
    except (TypeError, ValueError):
        raise ConfigError(f"{key}: cannot interpret {raw!r} as {annotation}") from None


def read_config_file(path: Path) -> dict[str, Any]:
    """Read a JSON or YAML config file into a plain dict."""
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    text = path.read_text(encoding="utf-8")
    try:
        if path.suffix.lower() in (".yaml", ".yml"):
            data = yaml.safe_load(text) or {}
        else:
            data = json.loads(text)
    except (json.JSONDecodeError, yaml.YAMLError) as e:
        raise ConfigError(f"{path}: {e}") from None
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be a mapping")
    return data


def parse_overrides(args: list[str]) -> dict[str, str]:
    """Turn ``--key value`` pairs (or ``--key=value``) into a dict."""
    overrides: dict[str, str] = {}
    i = 0
    while i < len(args):
        token = args[i]
        if not token.startswith("--"):
            raise ConfigError(f"unexpected argument {token!r}; overrides are --key value")
        key = token[2:]
        if "=" in key:
            key, value = key.split("=", 1)
            i += 1
        else:
            if i + 1 >= len(args):
                raise ConfigError(f"override --{key} needs a value")
            value = args[i + 1]
            i += 2
        overrides[key.replace("-", "_")] = value
    return overrides


def build_run_config(
    values: dict[str, Any], overrides: dict[str, Any] | None = None
) -> RunConfig:
    """Merge file values and overrides (overrides win) into a RunConfig."""
    hints = _field_types()
    merged = {**values, **(overrides or {})}
    unknown = sorted(set(merged) - set(hints))
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
    kwargs = {key: _coerce(key, value, hints[key]) for key, value in merged.items()}
    return RunConfig(**kwargs)


def load_run_config(
    path: Path | None, overrides: dict[str, Any] | None = None
) -> RunConfig:
    """Load a run config file, apply overrides, fill unset data paths from DATA_DIR."""
    values = read_config_file(path) if path is not None else {}
    config = build_run_config(values, overrides)
    for key in DATA_PATH_KEYS:
        if getattr(config, key) is None and (DATA_DIR / MNIST_FILES[key]).exists():
            setattr(config, key, DATA_DIR / MNIST_FILES[key])
    return config


def config_keys() -> list[str]:
    return [f.name for f in fields(RunConfig)]
