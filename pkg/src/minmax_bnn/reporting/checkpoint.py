"""Checkpoint container: a JSON manifest next to a little-endian fp32 blob.

The manifest lists every array as {name, shape, dtype, byte_offset}; mean
parameters are stored under "netd/" and variance parameters under "netv/".
Arrays tile the blob in manifest order with no gaps.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from math import prod
from pathlib import Path

import numpy as np

from ..encoders.manifest import ArchitectureManifest, build_manifest
from ..encoders.networks import check_params
from ..errors import CheckpointError, ConfigError, MirrorViolationError
from ..stochastic.params import MeanParams, ParamSet, VarianceParams

FORMAT = "minmax-bnn-checkpoint"
VERSION = 1
BLOB_DTYPE = np.dtype("<f4")
PREFIXES = {"netd/": "mu", "netv/": "var"}


@dataclass
class CheckpointHeader:
    arch: str
    feature_dim: int
    classes: list[int] = field(default_factory=list)
    step: int = 0
    seed: int = 0
    zero_sigma: bool = False


@dataclass
class Checkpoint:
    header: CheckpointHeader
    manifest: ArchitectureManifest
    mu: MeanParams
    var: VarianceParams


def blob_path_for(manifest_path: Path) -> Path:
    return manifest_path.with_suffix(".bin")


def save_checkpoint(
    path: Path,
    header: CheckpointHeader,
    mu: MeanParams,
    var: VarianceParams,
) -> Path:
    """Write ``path`` (JSON manifest) and its ``.bin`` blob; returns the manifest path."""
    mu.check_mirror(var)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    blob_path = blob_path_for(path)

    entries = []
    offset = 0
    with open(blob_path, "wb") as blob:
        for prefix, params in (("netd/", mu), ("netv/", var)):
            for name, array in params.items():
                raw = np.ascontiguousarray(array, dtype=BLOB_DTYPE).tobytes()
                entries.append(
                    {
                        "name": prefix + name,
                        "shape": list(array.shape),
                        "dtype": "f32",
                        "byte_offset": offset,
                    }
                )
                blob.write(raw)
                offset += len(raw)

    document = {
        "format": FORMAT,
        "version": VERSION,
        "header": asdict(header),
        "blob": blob_path.name,
        "arrays": entries,
    }
    path.write_text(json.dumps(document, indent=2), encoding="utf-8")
    return path


def _read_document(path: Path) -> dict:
    if not path.exists():
        raise CheckpointError(f"checkpoint not found: {path}")
    try:
        document = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise CheckpointError(f"{path}: invalid JSON ({e})") from None
    if not isinstance(document, dict) or document.get("format") != FORMAT:
        raise CheckpointError(f"{path}: not a {FORMAT} manifest")
    if document.get("version") != VERSION:
        raise CheckpointError(f"{path}: unsupported version {document.get('version')!r}")
    for key in ("header", "blob", "arrays"):
        if key not in document:
            raise CheckpointError(f"{path}: manifest has no {key!r}")
    return document


def _read_header(raw: dict) -> CheckpointHeader:
    try:
        return CheckpointHeader(
            arch=str(raw["arch"]),
            feature_dim=int(raw["feature_dim"]),
            classes=[int(c) for c in raw.get("classes", [])],
            step=int(raw.get("step", 0)),
            seed=int(raw.get("seed", 0)),
            zero_sigma=bool(raw.get("zero_sigma", False)),
        )
    except (KeyError, TypeError, ValueError) as e:
        raise CheckpointError(f"malformed checkpoint header: {e}") from None


def load_checkpoint(path: Path) -> Checkpoint:
    """Read a checkpoint and check it against its architecture manifest."""
    path = Path(path)
    document = _read_document(path)
    header = _read_header(document["header"])
    blob_path = path.parent / document["blob"]
    if not blob_path.exists():
        raise CheckpointError(f"checkpoint blob not found: {blob_path}")
    blob = blob_path.read_bytes()

    arrays: dict[str, dict[str, np.ndarray]] = {"mu": {}, "var": {}}
    expected_offset = 0
    for entry in document["arrays"]:
        try:
            name = entry["name"]
            shape = tuple(int(s) for s in entry["shape"])
            offset = entry["byte_offset"]
            dtype = entry["dtype"]
        except (KeyError, TypeError, ValueError) as e:
            raise CheckpointError(f"malformed array entry {entry!r}: {e}") from None
        if dtype != "f32":
            raise CheckpointError(f"{name}: unsupported dtype {dtype!r}")
        if not isinstance(offset, int) or offset != expected_offset:
            raise CheckpointError(f"{name}: byte_offset {offset!r}, expected {expected_offset}")
        count = prod(shape)
        end = offset + count * BLOB_DTYPE.itemsize
        if end > len(blob):
            raise CheckpointError(f"{name}: extends to byte {end}, blob has {len(blob)}")
        prefix = next((p for p in PREFIXES if name.startswith(p)), None)
        if prefix is None:
            raise CheckpointError(f"{name}: expected a 'netd/' or 'netv/' prefix")
        values = np.frombuffer(blob, dtype=BLOB_DTYPE, count=count, offset=offset)
        arrays[PREFIXES[prefix]][name[len(prefix) :]] = values.reshape(shape).astype(np.float64)
        expected_offset = end
    if expected_offset != len(blob):
        raise CheckpointError(f"blob has {len(blob) - expected_offset} trailing bytes")

    try:
        manifest = build_manifest(header.arch, header.feature_dim)
    except ConfigError as e:
        raise CheckpointError(f"checkpoint header: {e}") from None
    mu, var = ParamSet(arrays["mu"]), ParamSet(arrays["var"])
    try:
        check_params(manifest, mu)
        check_params(manifest, var)
        mu.check_mirror(var)
    except MirrorViolationError as e:
        raise CheckpointError(f"mirror violation: {e}") from e
    return Checkpoint(header=header, manifest=manifest, mu=mu, var=var)
