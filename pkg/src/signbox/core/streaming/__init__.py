"""Live-stream simulation: frame parsing, segmentation, classification, replay."""

from signbox.core.streaming.classify import (
    Classification,
    classify_frames,
    classify_segment,
)
from signbox.core.streaming.frames import (
    is_dataset_csv,
    parse_frame,
    parse_lines,
    read_frame_file,
    recording_frames,
    rest_frame,
)
from signbox.core.streaming.replay import (
    Prediction,
    StreamStats,
    replay,
    run_replay,
)
from signbox.core.streaming.segmenter import (
    Disposition,
    Phase,
    SegmentCounters,
    SegmentEvent,
    Segmenter,
    SegmenterState,
    segment_stream,
)

__all__ = [
    "Classification",
    "Disposition",
    "Phase",
    "Prediction",
    "SegmentCounters",
    "SegmentEvent",
    "Segmenter",
    "SegmenterState",
    "StreamStats",
    "classify_frames",
    "classify_segment",
    "is_dataset_csv",
    "parse_frame",
    "parse_lines",
    "read_frame_file",
    "recording_frames",
    "replay",
    "rest_frame",
    "run_replay",
    "segment_stream",
]
