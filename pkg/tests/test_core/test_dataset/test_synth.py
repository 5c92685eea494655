"""Tests for the synthetic dataset generator."""

import numpy as np
import pytest

from signbox.core.dataset import class_template, synth_generate
from signbox.core.dataset.recordings import GestureRecording
from signbox.core.errors import ConfigurationError


def nearest_template(recording: GestureRecording) -> int:
    """Class whose template at the recording's length is closest in L2."""
    frames = recording.frames.astype(np.float64)
    distances = [
        np.sum((frames - class_template(label, recording.length)) ** 2) for label in range(36)
    ]
    return int(np.argmin(distances))


def test_counts_lengths_and_ranges():
    recordings = synth_generate(3, 20.0, seed=0)
    assert len(recordings) == 36 * 3
    assert {r.label for r in recordings} == set(range(36))
    assert all(50 <= r.length <= 80 for r in recordings)
    assert all(r.frames.min() >= 0 and r.frames.max() <= 1023 for r in recordings)
    assert len({r.recording_id for r in recordings}) == len(recordings)


def test_same_seed_same_dataset():
    assert synth_generate(2, 10.0, seed=4) == synth_generate(2, 10.0, seed=4)
    assert synth_generate(2, 10.0, seed=4) != synth_generate(2, 10.0, seed=5)


def test_noise_free_recordings_match_their_template():
    for recording in synth_generate(1, 0.0, seed=2):
        expected = np.clip(np.rint(class_template(recording.label, recording.length)), 0, 1023)
        np.testing.assert_array_equal(recording.frames, expected)


def test_moderate_noise_is_separable():
    recordings = synth_generate(2, 20.0, seed=9)
    correct = sum(nearest_template(r) == r.label for r in recordings)
    assert correct / len(recordings) > 0.95


def test_class_templates_are_distinct():
    levels = {tuple(np.round(class_template(label, 50).mean(axis=0), -1)) for label in range(36)}
    assert len(levels) == 36


@pytest.mark.parametrize("n_per_class,noise_std", [(0, 1.0), (5, -1.0)])
def test_invalid_arguments(n_per_class, noise_std):
    with pytest.raises(ConfigurationError):
        synth_generate(n_per_class, noise_std, seed=0)
