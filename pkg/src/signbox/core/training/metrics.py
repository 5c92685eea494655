"""Confusion-matrix metrics and the cross-validation report."""

from __future__ import annotations

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from signbox.core.errors import InputError


def confusion_matrix(
    truth: np.ndarray, predicted: np.ndarray, num_classes: int
) -> np.ndarray:
    """Counts with rows = true class and columns = predicted class."""
    truth = np.asarray(truth, dtype=np.int64)
    predicted = np.asarray(predicted, dtype=np.int64)
    if truth.shape != predicted.shape:
        raise InputError(f"truth {truth.shape} and predictions {predicted.shape} differ")
    flat = truth * num_classes + predicted
    return np.bincount(flat, minlength=num_classes * num_classes).reshape(
        num_classes, num_classes
    )


def _checked(confusion: np.ndarray) -> np.ndarray:
    matrix = np.asarray(confusion)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise InputError(f"confusion matrix must be square, got {matrix.shape}")
    if (matrix < 0).any():
        raise InputError("confusion matrix has negative counts")
    if matrix.sum() == 0:
        raise InputError("confusion matrix is all zeros")
    return matrix


def categorical_accuracy(confusion: np.ndarray) -> float:
    """Trace over total."""
    matrix = _checked(confusion)
    return float(np.trace(matrix)) / float(matrix.sum())


def per_class_scores(
    confusion: np.ndarray,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Precision, recall and F1 per class; 0 wherever a denominator is 0."""
    matrix = _checked(confusion).astype(np.float64)
    hits = np.diag(matrix)
    predicted = matrix.sum(axis=0)
    actual = matrix.sum(axis=1)
    precision = np.divide(hits, predicted, out=np.zeros_like(hits), where=predicted > 0)
    recall = np.divide(hits, actual, out=np.zeros_like(hits), where=actual > 0)
    denom = precision + recall
    f1 = np.divide(
        2.0 * precision * recall, denom, out=np.zeros_like(hits), where=denom > 0
    )
    return precision, recall, f1


def macro_f1(confusion: np.ndarray) -> float:
    """Unweighted mean of per-class F1 over every class in the matrix."""
    _, _, f1 = per_class_scores(confusion)
    return float(f1.mean())


def sample_std(values: list[float]) -> float:
    """Standard deviation with the n-1 denominator; 0.0 for a single value."""
    if len(values) < 2 or len(set(values)) == 1:
        return 0.0
    return float(np.std(values, ddof=1))


class FoldMetrics(BaseModel):
    """Held-out results of one fold."""

    fold: int
    accuracy: float
    macro_f1: float
    confusion: list[list[int]]
    best_epoch: int
    best_val_loss: float
    epochs_run: int

    model_config = ConfigDict(frozen=True)

    @classmethod
    def from_confusion(
        cls,
        fold: int,
        confusion: np.ndarray,
        *,
        best_epoch: int,
        best_val_loss: float,
        epochs_run: int,
    ) -> FoldMetrics:
        return cls(
            fold=fold,
            accuracy=categorical_accuracy(confusion),
            macro_f1=macro_f1(confusion),
            confusion=np.asarray(confusion, dtype=np.int64).tolist(),
            best_epoch=best_epoch,
            best_val_loss=best_val_loss,
            epochs_run=epochs_run,
        )


class ClassScore(BaseModel):
    name: str
    precision: float
    recall: float
    f1: float
    support: int

    model_config = ConfigDict(frozen=True)


class MetricsReport(BaseModel):
    """Per-fold metrics, their mean and sample std, and the summed confusion."""

    model: str
    seed: int
    folds: list[FoldMetrics]
    mean_accuracy: float
    std_accuracy: float
    mean_macro_f1: float
    std_macro_f1: float
    total_confusion: list[list[int]]
    per_class: list[ClassScore] = Field(default_factory=list)

    model_config = ConfigDict(frozen=True, protected_namespaces=())

    @classmethod
    def aggregate(
        cls,
        folds: list[FoldMetrics],
        *,
        model: str,
        seed: int,
        class_names: list[str],
    ) -> MetricsReport:
        if not folds:
            raise InputError("Cannot aggregate zero folds")
        accuracies = [f.accuracy for f in folds]
        f1s = [f.macro_f1 for f in folds]
        total = np.sum([np.asarray(f.confusion) for f in folds], axis=0)
        if len(class_names) != total.shape[0]:
            raise InputError(
                f"{len(class_names)} class names for a {total.shape[0]}-class confusion matrix"
            )
        precision, recall, f1 = per_class_scores(total)
        support = total.sum(axis=1)
        return cls(
            model=model,
            seed=seed,
            folds=sorted(folds, key=lambda f: f.fold),
            mean_accuracy=float(np.mean(accuracies)),
            std_accuracy=sample_std(accuracies),
            mean_macro_f1=float(np.mean(f1s)),
            std_macro_f1=sample_std(f1s),
            total_confusion=total.astype(np.int64).tolist(),
            per_class=[
                ClassScore(
                    name=name,
                    precision=float(precision[i]),
                    recall=float(recall[i]),
                    f1=float(f1[i]),
                    support=int(support[i]),
                )
                for i, name in enumerate(class_names)
            ],
        )
