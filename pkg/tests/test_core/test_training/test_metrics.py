"""Tests for confusion-matrix metrics and report aggregation."""

import numpy as np
import pytest
from sklearn.metrics import accuracy_score, f1_score

from signbox.core.errors import InputError
from signbox.core.training import (
    FoldMetrics,
    MetricsReport,
    categorical_accuracy,
    confusion_matrix,
    macro_f1,
    per_class_scores,
    sample_std,
)


def pairs_from_confusion(confusion: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    n = confusion.shape[0]
    truth = np.repeat(np.repeat(np.arange(n), n), confusion.ravel())
    predicted = np.repeat(np.tile(np.arange(n), n), confusion.ravel())
    return truth, predicted


def brute_force_f1(truth: np.ndarray, predicted: np.ndarray, n: int) -> list[float]:
    scores = []
    for c in range(n):
        tp = int(np.sum((truth == c) & (predicted == c)))
        fp = int(np.sum((truth != c) & (predicted == c)))
        fn = int(np.sum((truth == c) & (predicted != c)))
        scores.append(0.0 if tp == 0 else 2 * tp / (2 * tp + fp + fn))
    return scores


@pytest.mark.parametrize("trial", range(100))
def test_metrics_match_brute_force_and_sklearn(trial):
    """Random matrices, including empty rows and columns."""
    rng = np.random.default_rng(trial)
    n = int(rng.integers(2, 9))
    confusion = rng.integers(0, 6, size=(n, n))
    confusion[rng.random((n, n)) < 0.3] = 0
    confusion[0, 0] += 1
    truth, predicted = pairs_from_confusion(confusion)

    np.testing.assert_array_equal(confusion_matrix(truth, predicted, n), confusion)
    assert categorical_accuracy(confusion) == pytest.approx(accuracy_score(truth, predicted))

    _, _, f1 = per_class_scores(confusion)
    np.testing.assert_allclose(f1, brute_force_f1(truth, predicted, n), atol=1e-12)
    expected = f1_score(truth, predicted, labels=list(range(n)), average="macro", zero_division=0)
    assert macro_f1(confusion) == pytest.approx(expected, abs=1e-12)


def test_absent_class_scores_zero():
    confusion = np.array([[3, 0, 0], [1, 2, 0], [0, 0, 0]])
    precision, recall, f1 = per_class_scores(confusion)
    assert precision[2] == recall[2] == f1[2] == 0.0
    assert macro_f1(confusion) == pytest.approx((f1[0] + f1[1]) / 3)


def test_perfect_predictions():
    confusion = np.diag([4, 5, 6])
    assert categorical_accuracy(confusion) == 1.0
    assert macro_f1(confusion) == 1.0


@pytest.mark.parametrize(
    "matrix",
    [np.zeros((3, 3), dtype=int), np.ones((2, 3), dtype=int), np.array([[1, -1], [0, 1]])],
)
def test_invalid_confusion(matrix):
    with pytest.raises(InputError):
        categorical_accuracy(matrix)


def test_confusion_shape_mismatch():
    with pytest.raises(InputError):
        confusion_matrix(np.array([0, 1]), np.array([0]), 2)


def test_sample_std():
    assert sample_std([0.5]) == 0.0
    assert sample_std([0.7, 0.7, 0.7]) == 0.0
    assert sample_std([1.0, 2.0, 3.0, 4.0]) == pytest.approx(np.std([1, 2, 3, 4], ddof=1))


def fold(index: int, confusion: list[list[int]]) -> FoldMetrics:
    return FoldMetrics.from_confusion(
        index, np.array(confusion), best_epoch=3, best_val_loss=0.5, epochs_run=10
    )


def test_report_aggregates_folds():
    folds = [fold(1, [[2, 0], [1, 1]]), fold(0, [[1, 1], [0, 2]])]
    report = MetricsReport.aggregate(folds, model="stacked_gru", seed=4, class_names=["A", "B"])

    assert [f.fold for f in report.folds] == [0, 1]
    assert report.total_confusion == [[3, 1], [1, 3]]
    assert report.mean_accuracy == pytest.approx(0.75)
    assert report.std_accuracy == 0.0
    assert [c.support for c in report.per_class] == [4, 4]
    assert report.per_class[0].precision == pytest.approx(0.75)


def test_report_checks_class_names():
    with pytest.raises(InputError, match="3 class names"):
        MetricsReport.aggregate(
            [fold(0, [[1, 0], [0, 1]])], model="m", seed=0, class_names=["A", "B", "C"]
        )


def test_report_needs_folds():
    with pytest.raises(InputError):
        MetricsReport.aggregate([], model="m", seed=0, class_names=[])
