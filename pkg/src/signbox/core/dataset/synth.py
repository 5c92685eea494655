"""Synthetic gesture recordings for runs without the public dataset."""

from __future__ import annotations

import numpy as np

from signbox.core.dataset.recordings import MAX_FRAMES, MIN_FRAMES, GestureRecording
from signbox.core.errors import ConfigurationError
from signbox.core.types import NUM_CHANNELS, NUM_CLASSES, SENSOR_MAX
from signbox.utils.logging import get_logger
from signbox.utils.rng import RngStreams

logger = get_logger(__name__)


def _levels(label: int) -> np.ndarray:
    # Base-3 digits of the class index pick the resting level of channels 0-3,
    # so no two classes share a level vector.
    levels = [250.0 + 250.0 * ((label // 3**j) % 3) for j in range(NUM_CHANNELS - 1)]
    return np.array([*levels, 500.0])


def class_template(label: int, length: int) -> np.ndarray:
    """Noise-free length×5 template of a class (float, before quantisation)."""
    u = np.linspace(0.0, 1.0, length)[:, None]
    channel = np.arange(NUM_CHANNELS)[None, :]
    amplitude = 60.0 + 10.0 * (label % 4)
    frequency = 1.0 + 0.5 * (label % 3) + 0.25 * channel
    phase = 2.0 * np.pi * (label * NUM_CHANNELS + channel) / NUM_CLASSES
    return _levels(label)[None, :] + amplitude * np.sin(2.0 * np.pi * frequency * u + phase)


def synth_generate(
    n_per_class: int,
    noise_std: float,
    seed: int,
    *,
    num_classes: int = NUM_CLASSES,
) -> list[GestureRecording]:
    """Generate ``n_per_class`` noisy template recordings per class.

    Lengths are drawn uniformly from [50, 80]; values are rounded and
    clipped to [0, 1023].

    Raises:
        ConfigurationError: If ``n_per_class < 1`` or ``noise_std < 0``.
    """
    if n_per_class < 1:
        raise ConfigurationError(f"n_per_class must be >= 1, got {n_per_class}")
    if noise_std < 0:
        raise ConfigurationError(f"noise_std must be >= 0, got {noise_std}")

    rng = RngStreams(seed).generator("synth")
    recordings: list[GestureRecording] = []
    for label in range(num_classes):
        lengths = rng.integers(MIN_FRAMES, MAX_FRAMES + 1, size=n_per_class)
        for i, length in enumerate(lengths):
            values = class_template(label, int(length))
            if noise_std > 0:
                values = values + rng.normal(0.0, noise_std, size=values.shape)
            frames = np.clip(np.rint(values), 0, SENSOR_MAX).astype(np.int16)
            recordings.append(GestureRecording(f"synth-{label:02d}-{i:04d}", label, frames))

    logger.info(
        "Generated synthetic dataset",
        recordings=len(recordings),
        n_per_class=n_per_class,
        noise_std=noise_std,
        seed=seed,
    )
    return recordings

