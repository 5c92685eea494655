"""Wire format of the glove stream: one ``s1,s2,s3,s4,s5`` line per frame."""

from __future__ import annotations

from collections.abc import Iterable, Iterator, Sequence
from pathlib import Path

import numpy as np

from signbox.core.dataset import CSV_COLUMNS, GestureRecording, SensorFrame
from signbox.core.errors import DataError, ParseError
from signbox.core.types import NUM_CHANNELS, SENSOR_MAX


def parse_frame(line: str, *, line_number: int | None = None) -> SensorFrame:
    """Parse one frame line.

    Raises:
        ParseError: On wrong arity, a non-integer token or a value outside
            [0, 1023]; the error carries the offending line.
    """
    text = line.strip()
    tokens = [token.strip() for token in text.split(",")]
    if len(tokens) != NUM_CHANNELS:
        raise ParseError(
            f"expected {NUM_CHANNELS} comma-separated values, got {len(tokens)}",
            line_number=line_number,
            line=text,
        )
    values: list[int] = []
    for token in tokens:
        # ASCII only: str.isdigit also accepts superscripts and other scripts
        if not (token.isascii() and token.isdigit()):
            raise ParseError(
                f"{token!r} is not a non-negative integer",
                line_number=line_number,
                line=text,
            )
        value = int(token)
        if value > SENSOR_MAX:
            raise ParseError(
                f"value {value} outside [0, {SENSOR_MAX}]",
                line_number=line_number,
                line=text,
            )
        values.append(value)
    return SensorFrame(tuple(values))  # type: ignore[arg-type]


def parse_lines(lines: Iterable[str]) -> Iterator[SensorFrame]:
    """Frames of a raw frame stream; blank and ``#`` lines are skipped."""
    for number, line in enumerate(lines, start=1):
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        yield parse_frame(line, line_number=number)


def rest_frame(value: int = SENSOR_MAX) -> SensorFrame:
    return SensorFrame((value,) * NUM_CHANNELS)  # type: ignore[arg-type]


def recording_frames(
    recordings: Sequence[GestureRecording],
    *,
    rest_frames: int = 5,
    rest_value: int = SENSOR_MAX,
) -> Iterator[SensorFrame]:
    """Recordings back to back, each followed by ``rest_frames`` rest frames."""
    rest = rest_frame(rest_value)
    for recording in recordings:
        for row in np.asarray(recording.frames):
            yield SensorFrame(tuple(int(v) for v in row))  # type: ignore[arg-type]
        for _ in range(rest_frames):
            yield rest


def is_dataset_csv(path: Path) -> bool:
    """True when the first non-comment line is the canonical dataset header."""
    try:
        with path.open(encoding="utf-8") as handle:
            for line in handle:
                if line.startswith("#") or not line.strip():
                    continue
                return [c.strip() for c in line.split(",")] == CSV_COLUMNS
    except OSError as e:
        raise DataError(f"Cannot read stream source {path}: {e}") from e
    return False


def read_frame_file(path: Path) -> list[SensorFrame]:
    try:
        with path.open(encoding="utf-8") as handle:
            return list(parse_lines(handle))
    except OSError as e:
        raise DataError(f"Cannot read frame file {path}: {e}") from e
