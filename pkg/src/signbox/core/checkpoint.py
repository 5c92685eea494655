"""Checkpoint files for trained models.

Layout::

    SIGNBOX-CHECKPOINT
    {"config": ..., "manifest": [...], "provenance": ..., "version": 1, ...}
    <raw little-endian float32 arrays in manifest order>

The header is a single line of JSON with sorted keys, so saving a loaded
checkpoint reproduces the file byte for byte.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np
from pydantic import TypeAdapter, ValidationError

from signbox.core.dataset import VOCAB, LabelVocab
from signbox.core.errors import CheckpointError
from signbox.core.models import ModelParams, params_from_arrays
from signbox.core.types import ModelConfig, model_name_for
from signbox.utils.logging import get_logger

logger = get_logger(__name__)

MAGIC = b"SIGNBOX-CHECKPOINT\n"
FORMAT_VERSION = 1
SUPPORTED_VERSIONS = frozenset({FORMAT_VERSION})
_FLOAT = np.dtype("<f4")

_config_adapter: TypeAdapter[Any] = TypeAdapter(ModelConfig)


@dataclass
class Provenance:
    """How the parameters were produced."""

    seed: int
    epochs_run: int
    best_val_loss: float | None
    fold: int | None = None
    run_config: list[str] = field(default_factory=list)

    def to_json(self) -> dict[str, Any]:
        loss = self.best_val_loss
        return {
            "best_val_loss": loss if loss is not None and math.isfinite(loss) else None,
            "epochs_run": self.epochs_run,
            "fold": self.fold,
            "run_config": list(self.run_config),
            "seed": self.seed,
        }


@dataclass
class Checkpoint:
    params: ModelParams
    provenance: Provenance
    vocab: LabelVocab = VOCAB
    version: int = FORMAT_VERSION

    @property
    def model_name(self) -> str:
        return model_name_for(self.params.config).value


def _header(checkpoint: Checkpoint) -> dict[str, Any]:
    manifest = []
    offset = 0
    for name, tensor in checkpoint.params.items():
        count = tensor.size
        manifest.append({"name": name, "offset": offset, "shape": list(tensor.shape)})
        offset += count * _FLOAT.itemsize
    return {
        "config": checkpoint.params.config.model_dump(mode="json"),
        "manifest": manifest,
        "model": checkpoint.model_name,
        "provenance": checkpoint.provenance.to_json(),
        "vocab": list(checkpoint.vocab.names),
        "version": checkpoint.version,
    }


def encode(checkpoint: Checkpoint) -> bytes:
    header = json.dumps(_header(checkpoint), sort_keys=True, separators=(",", ":"))
    body = b"".join(
        np.ascontiguousarray(tensor.data, dtype=_FLOAT).tobytes()
        for _, tensor in checkpoint.params.items()
    )
    return MAGIC + header.encode("utf-8") + b"\n" + body


def decode(raw: bytes, *, source: str = "<bytes>") -> Checkpoint:
    """Parse checkpoint bytes.

    Raises:
        CheckpointError: On a bad magic line, unknown version, malformed
            header, or a manifest that disagrees with the embedded config.
    """
    if not raw.startswith(MAGIC):
        raise CheckpointError(f"{source} is not a signbox checkpoint")
    end = raw.find(b"\n", len(MAGIC))
    if end < 0:
        raise CheckpointError(f"{source}: truncated header")
    try:
        header = json.loads(raw[len(MAGIC) : end].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise CheckpointError(f"{source}: malformed header: {e}") from e

    version = header.get("version")
    if version not in SUPPORTED_VERSIONS:
        raise CheckpointError(
            f"{source}: unsupported checkpoint version {version!r}, "
            f"expected one of {sorted(SUPPORTED_VERSIONS)}"
        )
    try:
        config = _config_adapter.validate_python(header["config"])
        vocab = LabelVocab(tuple(header["vocab"]))
        manifest = header["manifest"]
        prov = header["provenance"]
    except (KeyError, TypeError, ValueError, ValidationError) as e:
        raise CheckpointError(f"{source}: invalid header: {e}") from e
    if len(vocab) != config.num_classes:
        raise CheckpointError(
            f"{source}: vocabulary has {len(vocab)} names, config has "
            f"{config.num_classes} classes"
        )

    body = raw[end + 1 :]
    arrays: dict[str, np.ndarray] = {}
    expected_offset = 0
    for entry in manifest:
        shape = tuple(int(n) for n in entry["shape"])
        count = int(np.prod(shape))
        offset = int(entry["offset"])
        if offset != expected_offset or offset + count * _FLOAT.itemsize > len(body):
            raise CheckpointError(f"{source}: bad offset for '{entry['name']}'")
        values = np.frombuffer(body, dtype=_FLOAT, count=count, offset=offset)
        arrays[entry["name"]] = values.astype(np.float32).reshape(shape)
        expected_offset = offset + count * _FLOAT.itemsize
    if expected_offset != len(body):
        raise CheckpointError(
            f"{source}: {len(body) - expected_offset} trailing bytes after the last array"
        )

    params = params_from_arrays(config, arrays)
    provenance = Provenance(
        seed=int(prov["seed"]),
        epochs_run=int(prov["epochs_run"]),
        best_val_loss=prov.get("best_val_loss"),
        fold=prov.get("fold"),
        run_config=list(prov.get("run_config", [])),
    )
    return Checkpoint(params=params, provenance=provenance, vocab=vocab, version=version)


class CheckpointManager:
    """Saves and loads checkpoints under one output directory."""

    def __init__(self, directory: Path) -> None:
        self.directory = directory
        self._logger = logger

    def path_for(self, model: str, fold: int | None = None) -> Path:
        suffix = f"_fold{fold}" if fold is not None else ""
        return self.directory / f"{model}{suffix}.ckpt"

    def save(self, checkpoint: Checkpoint, path: Path | None = None) -> Path:
        """Write a checkpoint atomically and return its path."""
        target = path or self.path_for(checkpoint.model_name, checkpoint.provenance.fold)
        target.parent.mkdir(parents=True, exist_ok=True)
        temp_path = target.with_suffix(".tmp")
        temp_path.write_bytes(encode(checkpoint))
        temp_path.replace(target)
        self._logger.debug(
            f"Saved checkpoint to {target}",
            model=checkpoint.model_name,
            parameters=checkpoint.params.num_scalars(),
        )
        return target

    def load(self, path: Path) -> Checkpoint:
        """Read and validate a checkpoint.

        Raises:
            CheckpointError: If the file is missing, unreadable or invalid.
        """
        try:
            raw = path.read_bytes()
        except OSError as e:
            raise CheckpointError(f"Cannot read checkpoint {path}: {e}") from e
        checkpoint = decode(raw, source=str(path))
        self._logger.debug(
            f"Loaded checkpoint from {path}",
            model=checkpoint.model_name,
            epochs=checkpoint.provenance.epochs_run,
        )
        return checkpoint
