"""Replay harness: producer -> bounded queue -> segmenter -> classifier.

One producer pushes frames in order at the configured rate; one consumer
owns the segmenter and the frozen model. The queue is bounded, so a slow
consumer blocks the producer instead of frames being dropped.
"""

from __future__ import annotations

import asyncio
import time
from collections.abc import Callable, Iterable
from dataclasses import dataclass, field

import numpy as np

from signbox.core.dataset import VOCAB, LabelVocab, SensorFrame
from signbox.core.errors import ConfigurationError
from signbox.core.models import ModelParams
from signbox.core.streaming.classify import classify_segment
from signbox.core.streaming.frames import rest_frame
from signbox.core.streaming.segmenter import Disposition, Segmenter
from signbox.core.types import NUM_CHANNELS, SegmenterConfig, StreamSettings
from signbox.utils.logging import get_logger

logger = get_logger(__name__)


@dataclass(frozen=True, eq=False)
class Prediction:
    """One classified segment."""

    start_index: int
    end_index: int
    t_start: float
    label: str
    p_max: float
    probabilities: np.ndarray
    latency_ms: float

    def line(self) -> str:
        return f"{self.t_start:.3f} {self.label} {self.p_max:.4f}"


PredictionSink = Callable[[Prediction], None]


@dataclass
class StreamStats:
    frames_sent: int = 0
    frames_received: int = 0
    segments_emitted: int = 0
    discarded_short: int = 0
    discarded_long: int = 0
    latencies_ms: list[float] = field(default_factory=list)

    def latency_percentiles(self) -> dict[str, float]:
        if not self.latencies_ms:
            return {"p50": 0.0, "p95": 0.0, "p99": 0.0}
        p50, p95, p99 = np.percentile(self.latencies_ms, [50, 95, 99])
        return {"p50": float(p50), "p95": float(p95), "p99": float(p99)}

    def lines(self) -> list[str]:
        """Key-value report lines; latencies in milliseconds."""
        percentiles = self.latency_percentiles()
        return [
            f"frames_sent={self.frames_sent}",
            f"frames_received={self.frames_received}",
            f"segments_emitted={self.segments_emitted}",
            f"segments_discarded_short={self.discarded_short}",
            f"segments_discarded_long={self.discarded_long}",
            f"latency_p50_ms={percentiles['p50']:.3f}",
            f"latency_p95_ms={percentiles['p95']:.3f}",
            f"latency_p99_ms={percentiles['p99']:.3f}",
        ]


async def produce(
    frames: Iterable[SensorFrame],
    queue: asyncio.Queue[SensorFrame | None],
    stats: StreamStats,
    rate_hz: float,
) -> None:
    """Put frames on the queue, paced at ``rate_hz`` (0 = as fast as possible)."""
    loop = asyncio.get_running_loop()
    period = 1.0 / rate_hz if rate_hz > 0 else 0.0
    started = loop.time()
    try:
        for frame in frames:
            await queue.put(frame)
            stats.frames_sent += 1
            if period:
                delay = started + stats.frames_sent * period - loop.time()
                await asyncio.sleep(max(delay, 0.0))
    except Exception:
        # the consumer still needs its end marker
        await queue.put(None)
        raise
    await queue.put(None)


async def consume(
    queue: asyncio.Queue[SensorFrame | None],
    segmenter: Segmenter,
    params: ModelParams,
    stats: StreamStats,
    sink: PredictionSink | None,
    vocab: LabelVocab,
) -> list[Prediction]:
    predictions: list[Prediction] = []
    rate = segmenter.config.sample_rate_hz
    while True:
        frame = await queue.get()
        if frame is None:
            event = segmenter.finish()
        else:
            stats.frames_received += 1
            event = segmenter.push(frame)
        if event is not None and event.disposition is Disposition.EMITTED:
            started = time.perf_counter()
            result = classify_segment(event, params, vocab)
            latency_ms = (time.perf_counter() - started) * 1000.0
            stats.latencies_ms.append(latency_ms)
            prediction = Prediction(
                start_index=event.start_index,
                end_index=event.end_index,
                t_start=event.start_index / rate,
                label=result.label,
                p_max=result.p_max,
                probabilities=result.probabilities,
                latency_ms=latency_ms,
            )
            predictions.append(prediction)
            if sink is not None:
                sink(prediction)
        if frame is None:
            break

    counters = segmenter.counters
    stats.segments_emitted = counters.emitted
    stats.discarded_short = counters.discarded_short
    stats.discarded_long = counters.discarded_long
    return predictions


async def replay(
    frames: Iterable[SensorFrame],
    params: ModelParams,
    *,
    segmenter_config: SegmenterConfig | None = None,
    settings: StreamSettings | None = None,
    sink: PredictionSink | None = None,
    vocab: LabelVocab = VOCAB,
) -> tuple[list[Prediction], StreamStats]:
    """Stream frames through segmentation and classification.

    A segment still open when the source ends is closed as if a rest frame
    followed.

    Raises:
        ConfigurationError: If rest frames would count as active.
    """
    segmenter_config = segmenter_config or SegmenterConfig()
    settings = settings or StreamSettings()
    if rest_frame(settings.rest_value).total < segmenter_config.activation_threshold:
        raise ConfigurationError(
            f"rest value {settings.rest_value} sums to "
            f"{settings.rest_value * NUM_CHANNELS}, below the activation threshold "
            f"{segmenter_config.activation_threshold}"
        )

    stats = StreamStats()
    queue: asyncio.Queue[SensorFrame | None] = asyncio.Queue(maxsize=settings.queue_size)
    segmenter = Segmenter(segmenter_config)
    producer = asyncio.create_task(produce(frames, queue, stats, settings.rate_hz))
    try:
        predictions = await consume(queue, segmenter, params, stats, sink, vocab)
    except BaseException:
        producer.cancel()
        await asyncio.gather(producer, return_exceptions=True)
        raise
    await producer

    logger.info(
        "Replay complete",
        frames=stats.frames_received,
        emitted=stats.segments_emitted,
        discarded_short=stats.discarded_short,
        discarded_long=stats.discarded_long,
    )
    return predictions, stats


def run_replay(
    frames: Iterable[SensorFrame],
    params: ModelParams,
    **kwargs: object,
) -> tuple[list[Prediction], StreamStats]:
    """Blocking wrapper around ``replay``."""
    return asyncio.run(replay(frames, params, **kwargs))  # type: ignore[arg-type]
