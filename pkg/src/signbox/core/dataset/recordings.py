"""Gesture recordings and the canonical long-format CSV.

One row per time step::

    recording_id,t,s1,s2,s3,s4,s5,label
    rec-0001,0,512,498,700,650,1003,A

``t`` is 0-based and contiguous per recording, rows of one recording are
consecutive, and leading ``#`` lines carry provenance.
"""

from __future__ import annotations

from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import pandas as pd

from signbox.core.dataset.vocab import VOCAB, LabelVocab
from signbox.core.errors import DataError, ParseError, RecordingValidationError
from signbox.core.types import NUM_CHANNELS, SENSOR_MAX
from signbox.utils.logging import get_logger

logger = get_logger(__name__)

CHANNEL_COLUMNS = [f"s{i}" for i in range(1, NUM_CHANNELS + 1)]
CSV_COLUMNS = ["recording_id", "t", *CHANNEL_COLUMNS, "label"]

MIN_FRAMES = 50
MAX_FRAMES = 80


@dataclass(frozen=True)
class SensorFrame:
    """Five raw channel readings in [0, 1023]."""

    values: tuple[int, int, int, int, int]

    def __post_init__(self) -> None:
        if len(self.values) != NUM_CHANNELS:
            raise RecordingValidationError(
                f"A frame has {NUM_CHANNELS} channels, got {len(self.values)}"
            )
        for value in self.values:
            if not 0 <= value <= SENSOR_MAX:
                raise RecordingValidationError(
                    f"Sensor value {value} outside [0, {SENSOR_MAX}]"
                )

    @property
    def total(self) -> int:
        return sum(self.values)


@dataclass(frozen=True, eq=False)
class GestureRecording:
    """One gesture: a T×5 integer array plus its class index."""

    recording_id: str
    label: int
    frames: np.ndarray

    def __post_init__(self) -> None:
        frames = np.asarray(self.frames, dtype=np.int16)
        if frames.ndim != 2 or frames.shape[1] != NUM_CHANNELS:
            raise RecordingValidationError(
                f"Recording {self.recording_id} frames must be T×{NUM_CHANNELS}, "
                f"got {frames.shape}"
            )
        frames.setflags(write=False)
        object.__setattr__(self, "frames", frames)

    @property
    def length(self) -> int:
        return self.frames.shape[0]

    def frame(self, index: int) -> SensorFrame:
        return SensorFrame(tuple(int(v) for v in self.frames[index]))  # type: ignore[arg-type]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, GestureRecording):
            return NotImplemented
        return (
            self.recording_id == other.recording_id
            and self.label == other.label
            and np.array_equal(self.frames, other.frames)
        )

    def __hash__(self) -> int:
        return hash((self.recording_id, self.label, self.length))


@dataclass(frozen=True)
class Rejection:
    """A recording skipped because its length is outside the window."""

    recording_id: str
    length: int

    def line(self) -> str:
        return f"rejected {self.recording_id} length={self.length}"


@dataclass
class LoadResult:
    """Accepted recordings plus the rejection summary."""

    recordings: list[GestureRecording] = field(default_factory=list)
    rejections: list[Rejection] = field(default_factory=list)
    provenance: list[str] = field(default_factory=list)

    def rejection_lines(self) -> list[str]:
        return [rejection.line() for rejection in self.rejections]


def labels_of(recordings: Sequence[GestureRecording]) -> np.ndarray:
    return np.fromiter((r.label for r in recordings), dtype=np.int64, count=len(recordings))


def _leading_comments(path: Path) -> list[str]:
    comments: list[str] = []
    with path.open(encoding="utf-8") as handle:
        for line in handle:
            if not line.startswith("#"):
                break
            comments.append(line[1:].strip())
    return comments


def _integer_column(frame: pd.DataFrame, column: str, first_line: int) -> np.ndarray:
    raw = frame[column]
    numeric = pd.to_numeric(raw, errors="coerce")
    bad = numeric.isna() | (numeric != numeric.round())
    if bad.any():
        row = int(np.flatnonzero(bad.to_numpy())[0])
        raise ParseError(
            f"column '{column}' expects an integer",
            line_number=first_line + row,
            line=",".join(str(v) for v in frame.iloc[row].tolist()),
        )
    return numeric.to_numpy(dtype=np.int64)


def load_csv(
    path: Path,
    *,
    vocab: LabelVocab = VOCAB,
    min_frames: int = MIN_FRAMES,
    max_frames: int = MAX_FRAMES,
) -> LoadResult:
    """Load a canonical dataset CSV.

    Recordings outside ``[min_frames, max_frames]`` are skipped and reported
    in ``LoadResult.rejections`` rather than failing the load.

    Raises:
        DataError: If the file cannot be read or is empty.
        ParseError: On a malformed row; the message carries the line number.
        RecordingValidationError: On an out-of-range value or unknown label.
    """
    try:
        provenance = _leading_comments(path)
    except OSError as e:
        raise DataError(f"Cannot read dataset {path}: {e}") from e

    header_line = len(provenance) + 1
    try:
        frame = pd.read_csv(
            path,
            skiprows=len(provenance),
            dtype=str,
            keep_default_na=False,
            skip_blank_lines=False,
        )
    except pd.errors.EmptyDataError as e:
        raise DataError(f"Dataset {path} is empty") from e
    except pd.errors.ParserError as e:
        raise ParseError(f"{path}: {e}") from e

    if list(frame.columns) != CSV_COLUMNS:
        raise ParseError(
            f"expected header {','.join(CSV_COLUMNS)}",
            line_number=header_line,
            line=",".join(map(str, frame.columns)),
        )
    if frame.empty:
        raise DataError(f"Dataset {path} has a header but no rows")

    first_line = header_line + 1
    missing = (frame == "").any(axis=1).to_numpy() | frame.isna().any(axis=1).to_numpy()
    if missing.any():
        row = int(np.flatnonzero(missing)[0])
        raise ParseError(
            "row has missing fields",
            line_number=first_line + row,
            line=",".join(str(v) for v in frame.iloc[row].tolist()),
        )

    times = _integer_column(frame, "t", first_line)
    channels = np.stack(
        [_integer_column(frame, column, first_line) for column in CHANNEL_COLUMNS], axis=1
    )
    out_of_range = ((channels < 0) | (channels > SENSOR_MAX)).any(axis=1)
    if out_of_range.any():
        row = int(np.flatnonzero(out_of_range)[0])
        raise RecordingValidationError(
            f"sensor value outside [0, {SENSOR_MAX}]: {channels[row].tolist()}",
            line_number=first_line + row,
        )

    labels = frame["label"].to_numpy()
    ids = frame["recording_id"].to_numpy()
    starts = np.concatenate([[0], np.flatnonzero(ids[1:] != ids[:-1]) + 1])
    stops = np.concatenate([starts[1:], [len(ids)]])

    result = LoadResult(provenance=provenance)
    seen: set[str] = set()
    for start, stop in zip(starts, stops, strict=True):
        recording_id = str(ids[start])
        if recording_id in seen:
            raise ParseError(
                f"rows of recording {recording_id!r} are not consecutive",
                line_number=first_line + int(start),
            )
        seen.add(recording_id)

        names = set(labels[start:stop])
        if len(names) != 1:
            raise RecordingValidationError(
                f"recording {recording_id!r} mixes labels {sorted(names)}",
                line_number=first_line + int(start),
            )
        try:
            label = vocab.index(str(labels[start]))
        except RecordingValidationError as e:
            raise RecordingValidationError(
                str(e), line_number=first_line + int(start)
            ) from None

        order = np.argsort(times[start:stop], kind="stable")
        if not np.array_equal(times[start:stop][order], np.arange(stop - start)):
            raise RecordingValidationError(
                f"recording {recording_id!r} time index is not 0-based and contiguous",
                line_number=first_line + int(start),
            )

        length = int(stop - start)
        if not min_frames <= length <= max_frames:
            result.rejections.append(Rejection(recording_id, length))
            logger.debug("Rejected recording", recording_id=recording_id, length=length)
            continue
        result.recordings.append(
            GestureRecording(recording_id, label, channels[start:stop][order])
        )

    logger.info(
        "Loaded dataset",
        path=str(path),
        recordings=len(result.recordings),
        rejected=len(result.rejections),
    )
    return result


def to_frame(recordings: Iterable[GestureRecording], vocab: LabelVocab = VOCAB) -> pd.DataFrame:
    """Long-format DataFrame with the canonical columns."""
    parts = []
    for recording in recordings:
        part = pd.DataFrame(recording.frames.astype(np.int64), columns=CHANNEL_COLUMNS)
        part.insert(0, "t", np.arange(recording.length))
        part.insert(0, "recording_id", recording.recording_id)
        part["label"] = vocab.name(recording.label)
        parts.append(part)
    if not parts:
        return pd.DataFrame(columns=CSV_COLUMNS)
    return pd.concat(parts, ignore_index=True)


def write_csv(
    recordings: Iterable[GestureRecording],
    path: Path,
    *,
    provenance: Sequence[str] = (),
    vocab: LabelVocab = VOCAB,
) -> None:
    """Write recordings in the canonical format, provenance lines first."""
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="") as handle:
        for line in provenance:
            handle.write(f"# {line}\n")
        to_frame(recordings, vocab).to_csv(handle, index=False, lineterminator="\n")
