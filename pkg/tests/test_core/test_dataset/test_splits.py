"""Tests for stratified k-fold splitting."""

import numpy as np
import pytest

from signbox.core.dataset import stratified_k_fold
from signbox.core.errors import ConfigurationError


@pytest.fixture
def labels():
    # uneven class sizes: 7, 12 and 23 samples
    return np.repeat([0, 1, 2], [7, 12, 23])


def test_folds_partition_the_dataset(labels):
    split = stratified_k_fold(labels, k=5, seed=0)
    combined = np.sort(np.concatenate(split.folds))
    np.testing.assert_array_equal(combined, np.arange(len(labels)))
    assert split.k == 5
    assert split.size == len(labels)


def test_per_class_counts_differ_by_at_most_one(labels):
    split = stratified_k_fold(labels, k=5, seed=3)
    for label in np.unique(labels):
        counts = [int((labels[fold] == label).sum()) for fold in split.folds]
        assert max(counts) - min(counts) <= 1
        assert sum(counts) == int((labels == label).sum())


def test_train_and_validation_are_disjoint(labels):
    split = stratified_k_fold(labels, k=4, seed=1)
    for fold, (train, validation) in enumerate(split):
        assert not np.intersect1d(train, validation).size
        assert len(train) + len(validation) == len(labels)
        np.testing.assert_array_equal(validation, split.validation_indices(fold))
        assert (np.diff(train) > 0).all()


def test_same_seed_same_split(labels):
    first = stratified_k_fold(labels, k=5, seed=7)
    second = stratified_k_fold(labels, k=5, seed=7)
    other = stratified_k_fold(labels, k=5, seed=8)
    for a, b in zip(first.folds, second.folds, strict=True):
        np.testing.assert_array_equal(a, b)
    assert any(
        not np.array_equal(a, b) for a, b in zip(first.folds, other.folds, strict=True)
    )


def test_accepts_recordings(small_dataset):
    split = stratified_k_fold(small_dataset, k=5, seed=0)
    assert split.size == len(small_dataset)


def test_too_few_samples_per_class():
    with pytest.raises(ConfigurationError, match=r"\[1\]"):
        stratified_k_fold(np.array([0] * 5 + [1] * 4), k=5)


def test_k_below_two():
    with pytest.raises(ConfigurationError):
        stratified_k_fold(np.zeros(10, dtype=np.int64), k=1)
