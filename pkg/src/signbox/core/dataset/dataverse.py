"""Adapter from the published Dataverse CSV layout to canonical recordings.

The upstream files are wide tables with one row per time step. Column names
vary between releases, so the adapter takes an explicit ``ColumnMapping`` and
falls back to detecting common names.
"""

from __future__ import annotations

import re
from pathlib import Path

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field

from signbox.core.dataset.recordings import GestureRecording
from signbox.core.dataset.vocab import VOCAB, LabelVocab
from signbox.core.errors import DataError, ParseError, RecordingValidationError
from signbox.core.types import NUM_CHANNELS, SENSOR_MAX
from signbox.utils.logging import get_logger

logger = get_logger(__name__)

_RECORDING_NAMES = ("recording_id", "recording", "sample_id", "sample", "id")
_TIME_NAMES = ("t", "time", "timestep", "time_step", "step")
_LABEL_NAMES = ("label", "word", "sign", "class", "letter", "gesture")
_CHANNEL_PATTERN = re.compile(r"^(s|flex|sensor|finger|channel|ch)[ _]?(\d+)$", re.IGNORECASE)


class ColumnMapping(BaseModel):
    """Which upstream columns hold what; ``None`` means detect or derive."""

    recording: str | None = None
    time: str | None = None
    channels: list[str] | None = Field(default=None, min_length=NUM_CHANNELS, max_length=NUM_CHANNELS)
    label: str | None = None

    model_config = ConfigDict(frozen=True)


def _find(columns: list[str], candidates: tuple[str, ...]) -> str | None:
    lowered = {c.strip().lower(): c for c in columns}
    for name in candidates:
        if name in lowered:
            return lowered[name]
    return None


def resolve_mapping(columns: list[str], mapping: ColumnMapping) -> ColumnMapping:
    """Fill unset fields of ``mapping`` from the column names.

    Raises:
        ParseError: If the label or channel columns cannot be found.
    """
    missing = [
        name
        for name in (mapping.recording, mapping.time, mapping.label, *(mapping.channels or []))
        if name is not None and name not in columns
    ]
    if missing:
        raise ParseError(f"columns {missing} not found; available: {columns}")

    channels = mapping.channels
    if channels is None:
        numbered = sorted(
            (int(match.group(2)), column)
            for column in columns
            if (match := _CHANNEL_PATTERN.match(column.strip()))
        )
        if len(numbered) != NUM_CHANNELS:
            raise ParseError(
                f"could not detect {NUM_CHANNELS} sensor columns in {columns}; "
                "pass the channel names explicitly"
            )
        channels = [column for _, column in numbered]

    label = mapping.label or _find(columns, _LABEL_NAMES)
    if label is None:
        raise ParseError(f"could not detect a label column in {columns}")

    return ColumnMapping(
        recording=mapping.recording or _find(columns, _RECORDING_NAMES),
        time=mapping.time or _find(columns, _TIME_NAMES),
        channels=channels,
        label=label,
    )


def normalise_label(raw: object, vocab: LabelVocab = VOCAB) -> str:
    """Map an upstream label ("a", "B", 3, "3.0") onto a vocabulary name."""
    text = str(raw).strip()
    try:
        number = float(text)
    except ValueError:
        name = text.upper()
    else:
        name = str(int(number)) if number.is_integer() else text
    if name not in vocab:
        raise RecordingValidationError(f"Unknown label {raw!r}")
    return name


def _boundaries(frame: pd.DataFrame, mapping: ColumnMapping) -> np.ndarray:
    """Start row of every recording."""
    if mapping.recording is not None:
        ids = frame[mapping.recording].astype(str).to_numpy()
        changed = ids[1:] != ids[:-1]
    else:
        labels = frame[mapping.label].astype(str).to_numpy()
        changed = labels[1:] != labels[:-1]
        if mapping.time is not None:
            times = pd.to_numeric(frame[mapping.time], errors="coerce").to_numpy()
            changed = changed | (times[1:] <= times[:-1])
    return np.concatenate([[0], np.flatnonzero(changed) + 1])


def import_table(
    frame: pd.DataFrame,
    *,
    source: str,
    mapping: ColumnMapping | None = None,
    vocab: LabelVocab = VOCAB,
) -> list[GestureRecording]:
    """Convert one upstream table into recordings.

    Recording ids come from the recording column when present, otherwise
    ``<source>-<n>``. Lengths are not filtered here; the canonical loader
    reports out-of-window recordings.

    Raises:
        ParseError: On missing columns or non-numeric readings.
        RecordingValidationError: On readings outside [0, 1023] or unknown labels.
    """
    resolved = resolve_mapping([str(c) for c in frame.columns], mapping or ColumnMapping())
    assert resolved.channels is not None and resolved.label is not None
    if frame.empty:
        return []

    values = frame[resolved.channels].apply(pd.to_numeric, errors="coerce").to_numpy()
    bad_rows = np.flatnonzero(np.isnan(values).any(axis=1))
    if bad_rows.size:
        # +2: one for the header, one for 1-based numbering
        raise ParseError(
            f"{source}: non-numeric sensor reading", line_number=int(bad_rows[0]) + 2
        )
    out_of_range = np.flatnonzero(((values < 0) | (values > SENSOR_MAX)).any(axis=1))
    if out_of_range.size:
        raise RecordingValidationError(
            f"{source}: sensor value outside [0, {SENSOR_MAX}]",
            line_number=int(out_of_range[0]) + 2,
        )
    readings = np.rint(values).astype(np.int16)

    starts = _boundaries(frame, resolved)
    stops = np.concatenate([starts[1:], [len(frame)]])
    recordings: list[GestureRecording] = []
    for number, (start, stop) in enumerate(zip(starts, stops, strict=True)):
        if resolved.recording is not None:
            recording_id = str(frame[resolved.recording].iloc[start])
        else:
            recording_id = f"{source}-{number:05d}"
        try:
            label = vocab.index(normalise_label(frame[resolved.label].iloc[start], vocab))
        except RecordingValidationError as e:
            raise RecordingValidationError(
                f"{source}: {e}", line_number=int(start) + 2
            ) from None
        chunk = readings[start:stop]
        if resolved.time is not None:
            order = np.argsort(
                pd.to_numeric(frame[resolved.time].iloc[start:stop]).to_numpy(), kind="stable"
            )
            chunk = chunk[order]
        recordings.append(GestureRecording(recording_id, label, chunk))
    return recordings


def import_dataverse(
    source: Path,
    *,
    mapping: ColumnMapping | None = None,
    vocab: LabelVocab = VOCAB,
) -> list[GestureRecording]:
    """Import a downloaded CSV file, or every ``*.csv`` under a directory.

    Raises:
        DataError: If the source does not exist or holds no CSV files.
    """
    if source.is_dir():
        files = sorted(source.rglob("*.csv"))
        if not files:
            raise DataError(f"No CSV files under {source}")
    elif source.is_file():
        files = [source]
    else:
        raise DataError(f"Import source {source} does not exist")

    recordings: list[GestureRecording] = []
    for path in files:
        try:
            frame = pd.read_csv(path)
        except (pd.errors.ParserError, pd.errors.EmptyDataError) as e:
            raise ParseError(f"{path}: {e}") from e
        imported = import_table(frame, source=path.stem, mapping=mapping, vocab=vocab)
        logger.debug("Imported file", path=str(path), recordings=len(imported))
        recordings.extend(imported)

    ids = [r.recording_id for r in recordings]
    if len(set(ids)) != len(ids):
        # Per-file ids can collide across files; qualify them with the file order.
        recordings = [
            GestureRecording(f"{i:05d}-{r.recording_id}", r.label, r.frames)
            for i, r in enumerate(recordings)
        ]
    logger.info("Imported dataset", source=str(source), recordings=len(recordings))
    return recordings
