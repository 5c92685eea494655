"""Tests for the canonical recording CSV and label vocabulary."""

from pathlib import Path

import numpy as np
import pytest

from signbox.core.dataset import (
    CSV_COLUMNS,
    VOCAB,
    GestureRecording,
    LabelVocab,
    SensorFrame,
    labels_of,
    load_csv,
    synth_generate,
    write_csv,
)
from signbox.core.errors import DataError, ParseError, RecordingValidationError

HEADER = ",".join(CSV_COLUMNS)


def rows(recording_id: str, length: int, label: str = "A", value: int = 500) -> list[str]:
    return [f"{recording_id},{t},{value},{value},{value},{value},{value},{label}" for t in range(length)]


def write_lines(path: Path, lines: list[str]) -> Path:
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def test_round_trip_preserves_recordings(tmp_path):
    recordings = synth_generate(2, 15.0, seed=1, num_classes=5)
    path = tmp_path / "data" / "synth.csv"
    write_csv(recordings, path, provenance=["source=synth", "seed=1"])

    loaded = load_csv(path)
    assert loaded.recordings == recordings
    assert loaded.provenance == ["source=synth", "seed=1"]
    assert loaded.rejections == []


def test_written_file_layout(tmp_path, make_recording):
    path = tmp_path / "one.csv"
    write_csv([make_recording(35, 50, recording_id="r-1")], path, provenance=["seed=0"])
    lines = path.read_text().splitlines()

    assert lines[0] == "# seed=0"
    assert lines[1] == HEADER
    assert lines[2].startswith("r-1,0,")
    assert lines[2].endswith(",10")
    assert len(lines) == 52


def test_time_index_is_sorted_on_load(tmp_path):
    lines = rows("r1", 50)
    shuffled = [lines[1], lines[0], *lines[2:]]
    shuffled[0] = shuffled[0].replace(",500,500,500,500,500,", ",1,2,3,4,5,")
    loaded = load_csv(write_lines(tmp_path / "d.csv", [HEADER, *shuffled]))
    np.testing.assert_array_equal(loaded.recordings[0].frames[1], [1, 2, 3, 4, 5])


def test_out_of_window_recordings_are_reported(tmp_path):
    lines = [HEADER, *rows("short", 49), *rows("ok", 50, "B"), *rows("long", 81, "C")]
    loaded = load_csv(write_lines(tmp_path / "d.csv", lines))

    assert [r.recording_id for r in loaded.recordings] == ["ok"]
    assert loaded.recordings[0].label == 1
    assert loaded.rejection_lines() == ["rejected short length=49", "rejected long length=81"]


def test_window_bounds_are_inclusive(tmp_path):
    lines = [HEADER, *rows("lo", 50), *rows("hi", 80)]
    loaded = load_csv(write_lines(tmp_path / "d.csv", lines))
    assert [r.length for r in loaded.recordings] == [50, 80]


class TestLoadErrors:
    """Malformed files name the offending line."""

    def test_empty_file(self, tmp_path):
        path = tmp_path / "empty.csv"
        path.write_text("")
        with pytest.raises(DataError, match="empty"):
            load_csv(path)

    def test_header_only(self, tmp_path):
        with pytest.raises(DataError, match="no rows"):
            load_csv(write_lines(tmp_path / "d.csv", [HEADER]))

    def test_missing_file(self, tmp_path):
        with pytest.raises(DataError):
            load_csv(tmp_path / "absent.csv")

    def test_wrong_header_after_provenance(self, tmp_path):
        path = write_lines(tmp_path / "d.csv", ["# seed=0", "id,t,a,b,c,d,e,label", *rows("r", 50)])
        with pytest.raises(ParseError) as excinfo:
            load_csv(path)
        assert excinfo.value.line_number == 2

    def test_non_integer_reading(self, tmp_path):
        lines = rows("r", 50)
        lines[1] = "r,1,500,abc,500,500,500,A"
        with pytest.raises(ParseError, match="line 3") as excinfo:
            load_csv(write_lines(tmp_path / "d.csv", [HEADER, *lines]))
        assert "abc" in str(excinfo.value)

    def test_fractional_reading(self, tmp_path):
        lines = rows("r", 50)
        lines[4] = "r,4,500,500.5,500,500,500,A"
        with pytest.raises(ParseError, match="line 6"):
            load_csv(write_lines(tmp_path / "d.csv", [HEADER, *lines]))

    def test_missing_field(self, tmp_path):
        lines = rows("r", 50)
        lines[0] = "r,0,500,500,500,500,,A"
        with pytest.raises(ParseError, match="missing"):
            load_csv(write_lines(tmp_path / "d.csv", [HEADER, *lines]))

    def test_out_of_range_reading(self, tmp_path):
        lines = rows("r", 50)
        lines[2] = "r,2,500,500,1024,500,500,A"
        with pytest.raises(RecordingValidationError) as excinfo:
            load_csv(write_lines(tmp_path / "d.csv", [HEADER, *lines]))
        assert excinfo.value.line_number == 4

    def test_unknown_label(self, tmp_path):
        with pytest.raises(RecordingValidationError, match="'Z9'"):
            load_csv(write_lines(tmp_path / "d.csv", [HEADER, *rows("r", 50, "Z9")]))

    def test_mixed_labels(self, tmp_path):
        lines = rows("r", 50)
        lines[10] = lines[10].replace(",A", ",B")
        with pytest.raises(RecordingValidationError, match="mixes labels"):
            load_csv(write_lines(tmp_path / "d.csv", [HEADER, *lines]))

    def test_split_recording(self, tmp_path):
        lines = [HEADER, *rows("a", 25), *rows("b", 50), *rows("a", 25)]
        with pytest.raises(ParseError, match="not consecutive"):
            load_csv(write_lines(tmp_path / "d.csv", lines))

    def test_gap_in_time_index(self, tmp_path):
        lines = rows("r", 50)
        lines[7] = lines[7].replace("r,7,", "r,70,")
        with pytest.raises(RecordingValidationError, match="contiguous"):
            load_csv(write_lines(tmp_path / "d.csv", [HEADER, *lines]))

    def test_parse_errors_exit_as_data_errors(self):
        assert ParseError("x").exit_code == 2
        assert RecordingValidationError("x").exit_code == 2


class TestRecordingTypes:
    def test_recording_frames_are_read_only(self, make_recording):
        recording = make_recording(0, 50)
        with pytest.raises(ValueError):
            recording.frames[0, 0] = 1

    def test_recording_shape_is_checked(self):
        with pytest.raises(RecordingValidationError):
            GestureRecording("bad", 0, np.zeros((10, 4), dtype=np.int16))

    def test_frame_view(self, make_recording):
        recording = make_recording(0, 50, seed=2)
        frame = recording.frame(3)
        assert frame.values == tuple(int(v) for v in recording.frames[3])
        assert frame.total == int(recording.frames[3].sum())

    @pytest.mark.parametrize("values", [(0, 0, 0, 0, 1024), (-1, 0, 0, 0, 0), (1, 2, 3, 4)])
    def test_sensor_frame_validation(self, values):
        with pytest.raises(RecordingValidationError):
            SensorFrame(values)

    def test_labels_of(self, make_recording):
        recordings = [make_recording(3, 50), make_recording(1, 50)]
        np.testing.assert_array_equal(labels_of(recordings), [3, 1])


class TestVocab:
    def test_default_order(self):
        assert len(VOCAB) == 36
        assert VOCAB.index("A") == 0
        assert VOCAB.index("Z") == 25
        assert VOCAB.index("1") == 26
        assert VOCAB.index("10") == 35
        assert VOCAB.name(35) == "10"

    def test_unknown_names_and_indices(self):
        with pytest.raises(RecordingValidationError):
            VOCAB.index("a")
        with pytest.raises(RecordingValidationError):
            VOCAB.name(36)

    def test_duplicates_rejected(self):
        with pytest.raises(ValueError):
            LabelVocab(("A", "A"))
