"""Scaling and zero-padding recordings into model batches."""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

from signbox.core.dataset.recordings import GestureRecording
from signbox.core.errors import InputError
from signbox.core.types import (
    MAX_TIME_STEPS,
    NUM_CHANNELS,
    SENSOR_MAX,
    DenseRnnConfig,
    EncoderConfig,
    StackedRnnConfig,
)

ModelConfigLike = StackedRnnConfig | DenseRnnConfig | EncoderConfig


@dataclass(frozen=True)
class PaddedBatch:
    """B×T×5 scaled data, B×T mask (1 valid, 0 pad), labels and raw lengths."""

    data: np.ndarray
    mask: np.ndarray
    labels: np.ndarray
    lengths: np.ndarray

    def __len__(self) -> int:
        return self.data.shape[0]

    def take(self, indices: np.ndarray) -> PaddedBatch:
        """Sub-batch of the given rows, in the given order."""
        return PaddedBatch(
            data=self.data[indices],
            mask=self.mask[indices],
            labels=self.labels[indices],
            lengths=self.lengths[indices],
        )


def scale(frames: np.ndarray, dtype: type[np.floating] = np.float32) -> np.ndarray:
    """Map raw readings in [0, 1023] onto [0, 1]."""
    return (np.asarray(frames, dtype=np.float64) / SENSOR_MAX).astype(dtype)


def pad_batch(
    recordings: Sequence[GestureRecording],
    t_max: int = MAX_TIME_STEPS,
    *,
    trim: bool = False,
    dtype: type[np.floating] = np.float32,
) -> PaddedBatch:
    """Scale and zero-pad recordings to a fixed time extent.

    Args:
        recordings: Recordings to batch, in order.
        t_max: Padded time extent.
        trim: Keep the first ``t_max`` frames of longer recordings instead
            of failing.
        dtype: Float type of ``data`` and ``mask``.

    Raises:
        InputError: If ``recordings`` is empty, or a recording is longer
            than ``t_max`` and ``trim`` is off.
    """
    if not recordings:
        raise InputError("Cannot pad an empty batch")
    data = np.zeros((len(recordings), t_max, NUM_CHANNELS), dtype=dtype)
    mask = np.zeros((len(recordings), t_max), dtype=dtype)
    lengths = np.empty(len(recordings), dtype=np.int64)
    for row, recording in enumerate(recordings):
        length = recording.length
        if length > t_max:
            if not trim:
                raise InputError(
                    f"Recording {recording.recording_id} has {length} frames, "
                    f"more than t_max={t_max}"
                )
            length = t_max
        data[row, :length] = scale(recording.frames[:length], dtype)
        mask[row, :length] = 1.0
        lengths[row] = length
    labels = np.fromiter((r.label for r in recordings), dtype=np.int64, count=len(recordings))
    return PaddedBatch(data=data, mask=mask, labels=labels, lengths=lengths)


def model_input(
    recordings: Sequence[GestureRecording], model: ModelConfigLike
) -> PaddedBatch:
    """Batch recordings for a model: pad to its time extent, trimming longer ones.

    Training, evaluation and stream classification all go through here so
    that a recording is preprocessed identically on every path.
    """
    t_max = model.max_len if isinstance(model, EncoderConfig) else MAX_TIME_STEPS
    return pad_batch(recordings, t_max, trim=True)
