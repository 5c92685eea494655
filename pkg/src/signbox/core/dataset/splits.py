"""Stratified k-fold partitioning."""

from __future__ import annotations

from collections.abc import Iterator, Sequence
from dataclasses import dataclass

import numpy as np
from sklearn.model_selection import StratifiedKFold

from signbox.core.dataset.recordings import GestureRecording, labels_of
from signbox.core.errors import ConfigurationError
from signbox.utils.rng import RngStreams


@dataclass(frozen=True)
class FoldSplit:
    """Held-out index lists, one per fold, partitioning the dataset."""

    folds: tuple[np.ndarray, ...]

    @property
    def k(self) -> int:
        return len(self.folds)

    @property
    def size(self) -> int:
        return sum(len(fold) for fold in self.folds)

    def validation_indices(self, fold: int) -> np.ndarray:
        return self.folds[fold]

    def train_indices(self, fold: int) -> np.ndarray:
        """Indices of every other fold, sorted."""
        others = [f for i, f in enumerate(self.folds) if i != fold]
        return np.sort(np.concatenate(others))

    def __iter__(self) -> Iterator[tuple[np.ndarray, np.ndarray]]:
        for fold in range(self.k):
            yield self.train_indices(fold), self.validation_indices(fold)


def stratified_k_fold(
    dataset: Sequence[GestureRecording] | np.ndarray,
    k: int = 5,
    seed: int = 0,
) -> FoldSplit:
    """Split so that every class is spread over the folds as evenly as possible.

    Per class, fold counts differ by at most one. The assignment depends only
    on the labels and ``seed``.

    Args:
        dataset: Recordings, or their label array.
        k: Number of folds.
        seed: Run seed; the shuffle draws from its ``folds`` stream.

    Raises:
        ConfigurationError: If ``k < 2`` or some class has fewer than ``k`` samples.
    """
    labels = (
        np.asarray(dataset, dtype=np.int64)
        if isinstance(dataset, np.ndarray)
        else labels_of(dataset)
    )
    if k < 2:
        raise ConfigurationError(f"k-fold needs k >= 2, got {k}")
    classes, counts = np.unique(labels, return_counts=True)
    small = [int(c) for c, n in zip(classes, counts, strict=True) if n < k]
    if small:
        raise ConfigurationError(
            f"Classes {small} have fewer than k={k} samples; cannot stratify"
        )

    splitter = StratifiedKFold(
        n_splits=k,
        shuffle=True,
        random_state=RngStreams(seed).integer_seed("folds"),
    )
    placeholder = np.zeros((len(labels), 1))
    folds = tuple(
        np.sort(held_out) for _, held_out in splitter.split(placeholder, labels)
    )
    return FoldSplit(folds=folds)
