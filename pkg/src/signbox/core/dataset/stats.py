"""Dataset summary: class counts, length histogram, rejections."""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass, field

import numpy as np

from signbox.core.dataset.recordings import (
    MAX_FRAMES,
    MIN_FRAMES,
    GestureRecording,
    LoadResult,
)
from signbox.core.dataset.vocab import VOCAB, LabelVocab

BUCKET_WIDTH = 5


@dataclass
class DatasetStats:
    total: int
    class_counts: dict[str, int]
    length_histogram: dict[str, int]
    rejections: list[str] = field(default_factory=list)

    @property
    def num_classes(self) -> int:
        return sum(1 for count in self.class_counts.values() if count > 0)

    def lines(self) -> list[str]:
        """Key-value report lines."""
        out = [
            f"recordings={self.total}",
            f"classes={self.num_classes}",
            f"rejected={len(self.rejections)}",
        ]
        out += [f"class.{name}={count}" for name, count in self.class_counts.items()]
        out += [f"length.{bucket}={count}" for bucket, count in self.length_histogram.items()]
        return out + self.rejections


def length_histogram(
    lengths: Sequence[int] | np.ndarray,
    *,
    low: int = MIN_FRAMES,
    high: int = MAX_FRAMES,
    width: int = BUCKET_WIDTH,
) -> dict[str, int]:
    """Counts per ``width``-frame bucket, labelled ``"50-54"`` and so on."""
    edges = np.arange(low, high + width, width)
    counts, _ = np.histogram(np.asarray(lengths), bins=np.append(edges[:-1], high + 1))
    starts = edges[:-1]
    # the last bucket also holds the upper bound
    labels = [
        f"{start}-{high if i == len(starts) - 1 else start + width - 1}"
        for i, start in enumerate(starts)
    ]
    return dict(zip(labels, (int(c) for c in counts), strict=True))


def dataset_stats(
    source: LoadResult | Sequence[GestureRecording],
    vocab: LabelVocab = VOCAB,
) -> DatasetStats:
    recordings = source.recordings if isinstance(source, LoadResult) else list(source)
    rejections = source.rejection_lines() if isinstance(source, LoadResult) else []
    labels = np.asarray([r.label for r in recordings], dtype=np.int64)
    counts = np.bincount(labels, minlength=len(vocab))
    return DatasetStats(
        total=len(recordings),
        class_counts={name: int(counts[i]) for i, name in enumerate(vocab)},
        length_histogram=length_histogram([r.length for r in recordings]),
        rejections=rejections,
    )
