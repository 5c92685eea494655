"""Categorical cross-entropy on logits."""

from __future__ import annotations

import numpy as np

from signbox.core.errors import InputError
from signbox.core.tensor import Tensor, log_softmax


def cross_entropy_loss(logits: Tensor, labels: np.ndarray) -> Tensor:
    """Mean of ``-log softmax(logits)[label]`` over the batch.

    Raises:
        InputError: If shapes disagree or a label is outside ``[0, classes)``.
    """
    labels = np.asarray(labels, dtype=np.int64)
    if logits.ndim != 2 or labels.shape != (logits.shape[0],):
        raise InputError(
            f"logits {logits.shape} and labels {labels.shape} do not form a batch"
        )
    classes = logits.shape[1]
    bad = (labels < 0) | (labels >= classes)
    if bad.any():
        raise InputError(f"labels {labels[bad].tolist()} outside [0, {classes})")
    picked = log_softmax(logits, axis=-1)[np.arange(labels.shape[0]), labels]
    return -picked.mean()
