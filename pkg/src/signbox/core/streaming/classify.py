"""Classification of emitted segments with a frozen model."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from signbox.core.dataset import VOCAB, GestureRecording, LabelVocab, model_input
from signbox.core.errors import InputError
from signbox.core.models import ModelParams, predict_proba
from signbox.core.streaming.segmenter import Disposition, SegmentEvent


@dataclass(frozen=True, eq=False)
class Classification:
    label: str
    index: int
    probabilities: np.ndarray

    @property
    def p_max(self) -> float:
        return float(self.probabilities[self.index])


def classify_frames(
    frames: np.ndarray, params: ModelParams, vocab: LabelVocab = VOCAB
) -> Classification:
    """Classify raw T×5 frames through the same batching path as training."""
    batch = model_input([GestureRecording("segment", 0, frames)], params.config)
    probabilities = predict_proba(params, batch.data, batch.mask)[0]
    index = int(np.argmax(probabilities))
    return Classification(label=vocab.name(index), index=index, probabilities=probabilities)


def classify_segment(
    segment: SegmentEvent, params: ModelParams, vocab: LabelVocab = VOCAB
) -> Classification:
    """Label and class distribution of an emitted segment; ties go to the lowest index.

    Raises:
        InputError: If the segment was discarded rather than emitted.
    """
    if segment.disposition is not Disposition.EMITTED:
        raise InputError(
            f"Only emitted segments are classified, got {segment.disposition.value}"
        )
    return classify_frames(segment.frames, params, vocab)
