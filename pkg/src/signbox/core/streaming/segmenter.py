"""Activation-threshold segmentation of an unbounded frame stream.

A frame is active when its channel sum is strictly below the threshold. A
run of active frames closed by an inactive frame becomes one segment, kept
when its length lies in ``[min_len, max_len]``.
"""

from __future__ import annotations

from collections.abc import Iterable
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from signbox.core.dataset import SensorFrame
from signbox.core.types import NUM_CHANNELS, SegmenterConfig
from signbox.utils.logging import get_logger

logger = get_logger(__name__)


class Phase(str, Enum):
    IDLE = "idle"
    ACTIVE = "active"


class Disposition(str, Enum):
    EMITTED = "emitted"
    TOO_SHORT = "too_short"
    TOO_LONG = "too_long"


@dataclass(frozen=True, eq=False)
class SegmentEvent:
    """A closed segment.

    ``frames`` holds at most ``max_len + 1`` rows; ``length`` is the true
    number of active frames. Indices are 0-based stream positions, both
    inclusive.
    """

    frames: np.ndarray
    start_index: int
    end_index: int
    disposition: Disposition

    @property
    def length(self) -> int:
        return self.end_index - self.start_index + 1


@dataclass
class SegmentCounters:
    emitted: int = 0
    discarded_short: int = 0
    discarded_long: int = 0

    @property
    def closed(self) -> int:
        return self.emitted + self.discarded_short + self.discarded_long


@dataclass
class SegmenterState:
    phase: Phase = Phase.IDLE
    buffer: list[tuple[int, ...]] = field(default_factory=list)
    start_index: int = 0
    frames_seen: int = 0
    counters: SegmentCounters = field(default_factory=SegmentCounters)


class Segmenter:
    """Idle/Active state machine over frames."""

    def __init__(self, config: SegmenterConfig | None = None) -> None:
        self.config = config or SegmenterConfig()
        self.state = SegmenterState()

    @property
    def counters(self) -> SegmentCounters:
        return self.state.counters

    def is_active(self, frame: SensorFrame) -> bool:
        return frame.total < self.config.activation_threshold

    def push(self, frame: SensorFrame) -> SegmentEvent | None:
        """Consume one frame; return an event when it closes a segment."""
        state = self.state
        index = state.frames_seen
        state.frames_seen += 1

        if self.is_active(frame):
            if state.phase is Phase.IDLE:
                state.phase = Phase.ACTIVE
                state.start_index = index
            if len(state.buffer) <= self.config.max_len:
                state.buffer.append(frame.values)
            return None

        if state.phase is Phase.ACTIVE:
            return self._close(end_index=index - 1)
        return None

    def finish(self) -> SegmentEvent | None:
        """Close a segment left open at end of stream."""
        if self.state.phase is Phase.ACTIVE:
            return self._close(end_index=self.state.frames_seen - 1)
        return None

    def _close(self, end_index: int) -> SegmentEvent:
        state = self.state
        length = end_index - state.start_index + 1
        if length < self.config.min_len:
            disposition = Disposition.TOO_SHORT
            state.counters.discarded_short += 1
        elif length > self.config.max_len:
            disposition = Disposition.TOO_LONG
            state.counters.discarded_long += 1
        else:
            disposition = Disposition.EMITTED
            state.counters.emitted += 1

        event = SegmentEvent(
            frames=np.array(state.buffer, dtype=np.int16).reshape(-1, NUM_CHANNELS),
            start_index=state.start_index,
            end_index=end_index,
            disposition=disposition,
        )
        logger.debug(
            "Segment closed",
            disposition=disposition.value,
            start=event.start_index,
            length=length,
        )
        state.phase = Phase.IDLE
        state.buffer = []
        return event


def segment_stream(
    frames: Iterable[SensorFrame],
    config: SegmenterConfig | None = None,
    *,
    finish: bool = True,
) -> tuple[list[SegmentEvent], SegmentCounters]:
    """Run a fresh segmenter over a whole frame sequence."""
    segmenter = Segmenter(config)
    events = [event for frame in frames if (event := segmenter.push(frame)) is not None]
    if finish and (last := segmenter.finish()) is not None:
        events.append(last)
    return events, segmenter.counters
