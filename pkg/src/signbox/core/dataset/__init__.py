"""Gesture recordings: loading, batching, splitting and synthesis."""

from signbox.core.dataset.batching import PaddedBatch, model_input, pad_batch, scale
from signbox.core.dataset.dataverse import ColumnMapping, import_dataverse, import_table
from signbox.core.dataset.recordings import (
    CSV_COLUMNS,
    MAX_FRAMES,
    MIN_FRAMES,
    GestureRecording,
    LoadResult,
    Rejection,
    SensorFrame,
    labels_of,
    load_csv,
    write_csv,
)
from signbox.core.dataset.splits import FoldSplit, stratified_k_fold
from signbox.core.dataset.stats import DatasetStats, dataset_stats, length_histogram
from signbox.core.dataset.synth import class_template, synth_generate
from signbox.core.dataset.vocab import VOCAB, LabelVocab

__all__ = [
    "CSV_COLUMNS",
    "MAX_FRAMES",
    "MIN_FRAMES",
    "VOCAB",
    "ColumnMapping",
    "DatasetStats",
    "FoldSplit",
    "GestureRecording",
    "LabelVocab",
    "LoadResult",
    "PaddedBatch",
    "Rejection",
    "SensorFrame",
    "class_template",
    "dataset_stats",
    "import_dataverse",
    "import_table",
    "labels_of",
    "length_histogram",
    "load_csv",
    "model_input",
    "pad_batch",
    "scale",
    "stratified_k_fold",
    "synth_generate",
    "write_csv",
]
