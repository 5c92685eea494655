"""Tests for the replay harness and segment classification."""

import time

import numpy as np
import pytest

from signbox.core.dataset import VOCAB, model_input
from signbox.core.errors import ConfigurationError, InputError, ParseError
from signbox.core.models import build, predict_proba
from signbox.core.streaming import (
    Disposition,
    SegmentEvent,
    StreamStats,
    classify_frames,
    classify_segment,
    parse_lines,
    recording_frames,
    replay,
    rest_frame,
    run_replay,
)
from signbox.core.types import ModelName, SegmenterConfig, StreamSettings, model_config_for

UNTHROTTLED = StreamSettings(rate_hz=0)


@pytest.fixture
def params(tiny_stacked_gru):
    return build(tiny_stacked_gru, seed=8)


@pytest.fixture
def recordings(small_dataset):
    return small_dataset[::5]


async def test_replay_matches_batch_prediction(params, recordings):
    """Replayed recordings get the same distribution as a direct batch pass."""
    predictions, stats = await replay(recording_frames(recordings), params, settings=UNTHROTTLED)

    batch = model_input(recordings, params.config)
    expected = predict_proba(params, batch.data, batch.mask)
    assert len(predictions) == len(recordings)
    for prediction, row in zip(predictions, expected, strict=True):
        np.testing.assert_allclose(prediction.probabilities, row, atol=1e-6)
        assert prediction.label == VOCAB.name(int(np.argmax(row)))
        assert prediction.p_max == pytest.approx(float(row.max()))
    assert stats.segments_emitted == len(recordings)
    assert stats.frames_sent == stats.frames_received
    assert len(stats.latencies_ms) == len(recordings)


async def test_prediction_timing_fields(params, recordings):
    first = recordings[0]
    predictions, _ = await replay(
        recording_frames(recordings[:1], rest_frames=2), params, settings=UNTHROTTLED
    )
    prediction = predictions[0]
    assert prediction.start_index == 0
    assert prediction.end_index == first.length - 1
    assert prediction.t_start == 0.0
    assert prediction.line() == f"0.000 {prediction.label} {prediction.p_max:.4f}"


async def test_sink_sees_every_prediction(params, recordings):
    seen = []
    predictions, _ = await replay(
        recording_frames(recordings), params, settings=UNTHROTTLED, sink=seen.append
    )
    assert seen == predictions


async def test_inactive_stream_produces_nothing(params):
    frames = [rest_frame()] * 40
    predictions, stats = await replay(frames, params, settings=UNTHROTTLED)
    assert predictions == []
    assert stats.frames_sent == stats.frames_received == 40
    assert stats.segments_emitted == 0
    assert stats.lines()[5] == "latency_p50_ms=0.000"


async def test_queue_size_does_not_change_results(params, recordings):
    small, _ = await replay(
        recording_frames(recordings), params, settings=StreamSettings(rate_hz=0, queue_size=1)
    )
    large, _ = await replay(
        recording_frames(recordings), params, settings=StreamSettings(rate_hz=0, queue_size=500)
    )
    assert [p.start_index for p in small] == [p.start_index for p in large]
    assert [p.label for p in small] == [p.label for p in large]


async def test_paced_replay_finishes(params, recordings):
    frames = list(recording_frames(recordings[:1]))
    predictions, stats = await replay(frames, params, settings=StreamSettings(rate_hz=5000))
    assert len(predictions) == 1
    assert stats.frames_sent == len(frames)


async def test_rest_value_must_be_inactive(params):
    with pytest.raises(ConfigurationError, match="activation threshold"):
        await replay([], params, settings=StreamSettings(rate_hz=0, rest_value=900))


async def test_source_errors_propagate(params):
    lines = ["500,500,500,500,500"] * 10 + ["500,500,oops,500,500"]
    with pytest.raises(ParseError, match="line 11"):
        await replay(parse_lines(lines), params, settings=UNTHROTTLED)


def test_run_replay_blocking_wrapper(params, recordings):
    predictions, stats = run_replay(recording_frames(recordings[:2]), params, settings=UNTHROTTLED)
    assert len(predictions) == 2
    assert isinstance(stats, StreamStats)


def test_classify_segment_requires_emitted(params):
    event = SegmentEvent(
        frames=np.full((10, 5), 500, dtype=np.int16),
        start_index=0,
        end_index=9,
        disposition=Disposition.TOO_SHORT,
    )
    with pytest.raises(InputError, match="too_short"):
        classify_segment(event, params)


def test_classify_frames_trims_long_segments(params, make_recording):
    recording = make_recording(0, 80, seed=3)
    full = classify_frames(recording.frames, params)
    trimmed = classify_frames(recording.frames[:79], params)
    np.testing.assert_array_equal(full.probabilities, trimmed.probabilities)
    assert full.p_max == pytest.approx(full.probabilities.max())


def test_stream_stats_percentiles():
    stats = StreamStats(latencies_ms=[1.0, 2.0, 3.0, 4.0])
    assert stats.latency_percentiles()["p50"] == pytest.approx(2.5)
    assert stats.lines()[0] == "frames_sent=0"


def random_session(make_recording, rng: np.random.Generator, recordings: int) -> list:
    lengths = rng.integers(20, 120, size=recordings)
    session = [
        make_recording(int(rng.integers(0, 4)), int(length), seed=int(rng.integers(1 << 30)))
        for length in lengths
    ]
    return list(recording_frames(session, rest_frames=int(rng.integers(1, 6))))


async def assert_rate_invariant(frames, params, rate_hz: float) -> None:
    fast, fast_stats = await replay(frames, params, settings=UNTHROTTLED)
    paced, paced_stats = await replay(frames, params, settings=StreamSettings(rate_hz=rate_hz))

    assert [(p.start_index, p.end_index, p.label) for p in paced] == [
        (p.start_index, p.end_index, p.label) for p in fast
    ]
    for a, b in zip(paced, fast, strict=True):
        np.testing.assert_array_equal(a.probabilities, b.probabilities)
    assert paced_stats.lines()[:5] == fast_stats.lines()[:5]


async def test_random_sessions_do_not_depend_on_rate(params, make_recording):
    rng = np.random.default_rng(19)
    for _ in range(10):
        await assert_rate_invariant(random_session(make_recording, rng, 4), params, 3000.0)


@pytest.mark.slow
async def test_real_time_rate_matches_unthrottled(params, make_recording):
    frames = random_session(make_recording, np.random.default_rng(3), 3)
    await assert_rate_invariant(frames, params, 36.0)


@pytest.mark.slow
@pytest.mark.parametrize("name", list(ModelName), ids=lambda name: name.value)
def test_classification_fits_in_one_frame_period(name, make_recording):
    """p99 per-segment latency stays below the time between two frames."""
    budget_ms = 1000.0 / SegmenterConfig().sample_rate_hz
    params = build(model_config_for(name), seed=0)
    rng = np.random.default_rng(11)
    segments = [
        make_recording(0, int(rng.integers(50, 81)), seed=seed).frames for seed in range(40)
    ]
    classify_frames(segments[0], params)

    latencies_ms = []
    for frames in segments:
        started = time.perf_counter()
        classify_frames(frames, params)
        latencies_ms.append((time.perf_counter() - started) * 1000.0)

    p99 = float(np.percentile(latencies_ms, 99))
    assert p99 < budget_ms, f"{name.value}: p99 {p99:.2f} ms over {budget_ms:.2f} ms"
