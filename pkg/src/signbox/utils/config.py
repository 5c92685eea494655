"""Flat dotted-key configuration files.

A config file holds one ``key=value`` pair per line, e.g.::

    # stacked GRU, short run
    seed=7
    model.name=stacked_gru
    train.lr0=0.001
    segmenter.activation_threshold=5000

Blank lines and ``#`` comments are ignored. Values stay strings here; the
pydantic models coerce them.
"""

from __future__ import annotations

from collections.abc import Mapping
from pathlib import Path
from typing import Any

from pydantic import ValidationError

from signbox.core.errors import ConfigurationError
from signbox.core.types import RunConfig
from signbox.utils.logging import get_logger

logger = get_logger(__name__)


def parse_config_text(text: str, *, source: str = "<config>") -> dict[str, str]:
    """Parse ``key=value`` lines into a flat dict.

    Raises:
        ConfigurationError: On a line without '=' or a repeated key.
    """
    values: dict[str, str] = {}
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigurationError(f"{source}:{number}: expected key=value, got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if not key:
            raise ConfigurationError(f"{source}:{number}: empty key")
        if key in values:
            raise ConfigurationError(f"{source}:{number}: duplicate key '{key}'")
        values[key] = value
    return values


def load_config_file(path: Path) -> dict[str, str]:
    """Read a config file from disk."""
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigurationError(f"Cannot read config file {path}: {e}") from e
    return parse_config_text(text, source=str(path))


def nest(flat: Mapping[str, Any]) -> dict[str, Any]:
    """Turn ``{"train.lr0": x}`` into ``{"train": {"lr0": x}}``."""
    nested: dict[str, Any] = {}
    for key, value in flat.items():
        parts = key.split(".")
        node = nested
        for part in parts[:-1]:
            child = node.setdefault(part, {})
            if not isinstance(child, dict):
                raise ConfigurationError(f"Key '{key}' conflicts with scalar '{part}'")
            node = child
        node[parts[-1]] = value
    return nested


def resolve_run_config(
    config_file: Path | None = None,
    overrides: Mapping[str, Any] | None = None,
) -> RunConfig:
    """Merge a config file with command-line overrides (overrides win).

    Args:
        config_file: Optional flat key-value file.
        overrides: Dotted keys from command-line flags; ``None`` values are
            treated as "not given".

    Raises:
        ConfigurationError: For unknown keys or invalid values.
    """
    flat: dict[str, Any] = load_config_file(config_file) if config_file else {}
    for key, value in (overrides or {}).items():
        if value is not None:
            flat[key] = value

    unknown = sorted(key for key in flat if not _is_known_key(key))
    if unknown:
        raise ConfigurationError(f"Unknown config keys: {', '.join(unknown)}")

    try:
        config = RunConfig.model_validate(nest(flat))
    except ValidationError as e:
        raise ConfigurationError(f"Invalid configuration: {e}") from e

    logger.debug("Resolved run config", **config.flat())
    return config


def _is_known_key(key: str) -> bool:
    model: Any = RunConfig
    parts = key.split(".")
    for i, part in enumerate(parts):
        fields = getattr(model, "model_fields", None)
        if fields is None or part not in fields:
            return False
        annotation = fields[part].annotation
        if i < len(parts) - 1:
            if not (isinstance(annotation, type) and hasattr(annotation, "model_fields")):
                return False
            model = annotation
    return True
