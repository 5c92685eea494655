"""Report writers for metrics, epoch logs, confusion matrices and stream runs."""

from __future__ import annotations

import json
from collections.abc import Sequence
from enum import Enum
from pathlib import Path
from typing import Protocol

import numpy as np
import pandas as pd

from signbox.core.dataset import VOCAB, LabelVocab
from signbox.core.streaming import StreamStats
from signbox.core.training import EPOCH_LOG_COLUMNS, EpochRecord, MetricsReport
from signbox.utils.logging import get_logger

logger = get_logger(__name__)


class OutputFormat(str, Enum):
    """Supported metrics report formats."""

    TEXT = "text"
    JSON = "json"


def _emit(content: str, file: Path | None) -> None:
    if file:
        file.parent.mkdir(parents=True, exist_ok=True)
        file.write_text(content, encoding="utf-8")
        logger.debug(f"Wrote {file}")
    else:
        print(content, end="")


def metrics_lines(report: MetricsReport) -> list[str]:
    """Key-value lines for a metrics report."""
    lines = [
        f"model={report.model}",
        f"seed={report.seed}",
        f"folds={len(report.folds)}",
        f"mean_accuracy={report.mean_accuracy:.6f}",
        f"std_accuracy={report.std_accuracy:.6f}",
        f"mean_macro_f1={report.mean_macro_f1:.6f}",
        f"std_macro_f1={report.std_macro_f1:.6f}",
    ]
    for fold in report.folds:
        prefix = f"fold.{fold.fold}"
        lines += [
            f"{prefix}.accuracy={fold.accuracy:.6f}",
            f"{prefix}.macro_f1={fold.macro_f1:.6f}",
            f"{prefix}.best_epoch={fold.best_epoch}",
            f"{prefix}.best_val_loss={fold.best_val_loss:.6f}",
            f"{prefix}.epochs_run={fold.epochs_run}",
        ]
    for score in report.per_class:
        prefix = f"class.{score.name}"
        lines += [
            f"{prefix}.precision={score.precision:.6f}",
            f"{prefix}.recall={score.recall:.6f}",
            f"{prefix}.f1={score.f1:.6f}",
            f"{prefix}.support={score.support}",
        ]
    return lines


class ReportHandler(Protocol):
    """Protocol for metrics report handlers."""

    def write(
        self,
        report: MetricsReport,
        provenance: Sequence[str],
        file: Path | None = None,
    ) -> None:
        """Write the report; to stdout when ``file`` is None."""
        ...


class TextReportHandler:
    """``key=value`` lines, provenance first as ``#`` comments."""

    def write(
        self,
        report: MetricsReport,
        provenance: Sequence[str],
        file: Path | None = None,
    ) -> None:
        lines = [f"# {line}" for line in provenance] + metrics_lines(report)
        _emit("\n".join(lines) + "\n", file)


class JSONReportHandler:
    """The full report model, with provenance as a key-value object."""

    def write(
        self,
        report: MetricsReport,
        provenance: Sequence[str],
        file: Path | None = None,
    ) -> None:
        data = {
            "provenance": dict(line.split("=", 1) for line in provenance),
            "report": report.model_dump(mode="json"),
        }
        _emit(json.dumps(data, indent=2, sort_keys=True) + "\n", file)


def create_handler(format: OutputFormat) -> ReportHandler:
    """Create a report handler for the given format.

    Raises:
        ValueError: If the format is not supported
    """
    handlers: dict[OutputFormat, ReportHandler] = {
        OutputFormat.TEXT: TextReportHandler(),
        OutputFormat.JSON: JSONReportHandler(),
    }
    handler = handlers.get(format)
    if not handler:
        raise ValueError(f"Unsupported output format: {format}")
    return handler


def _write_frame(frame: pd.DataFrame, path: Path, provenance: Sequence[str], **kwargs: object) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="") as handle:
        for line in provenance:
            handle.write(f"# {line}\n")
        frame.to_csv(handle, lineterminator="\n", **kwargs)  # type: ignore[arg-type]
    logger.debug(f"Wrote {path}", rows=len(frame))


def write_epoch_log(
    records: Sequence[EpochRecord],
    path: Path,
    *,
    provenance: Sequence[str] = (),
) -> None:
    """One row per epoch: epoch, train_loss, val_loss, val_acc, lr."""
    frame = pd.DataFrame([r.row() for r in records], columns=list(EPOCH_LOG_COLUMNS))
    _write_frame(frame, path, provenance, index=False, float_format="%.6f")


def write_confusion_csv(
    confusion: Sequence[Sequence[int]] | np.ndarray,
    path: Path,
    *,
    provenance: Sequence[str] = (),
    vocab: LabelVocab = VOCAB,
) -> None:
    """Square matrix, rows = true class, columns = predicted class."""
    names = list(vocab.names)
    frame = pd.DataFrame(np.asarray(confusion, dtype=np.int64), index=names, columns=names)
    frame.index.name = "true"
    _write_frame(frame, path, provenance, index=True)


def stream_report_lines(stats: StreamStats, provenance: Sequence[str] = ()) -> list[str]:
    return [f"# {line}" for line in provenance] + stats.lines()


def write_stream_report(
    stats: StreamStats,
    path: Path | None,
    *,
    provenance: Sequence[str] = (),
) -> None:
    _emit("\n".join(stream_report_lines(stats, provenance)) + "\n", path)
