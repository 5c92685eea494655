"""Tests for dataset summaries."""

from signbox.core.dataset import LoadResult, Rejection, dataset_stats, length_histogram


def test_length_histogram_buckets():
    histogram = length_histogram([50, 54, 55, 79, 80, 80])
    assert list(histogram) == ["50-54", "55-59", "60-64", "65-69", "70-74", "75-80"]
    assert histogram["50-54"] == 2
    assert histogram["55-59"] == 1
    assert histogram["75-80"] == 3
    assert sum(histogram.values()) == 6


def test_stats_lines(make_recording):
    result = LoadResult(
        recordings=[make_recording(0, 50), make_recording(0, 62), make_recording(35, 80)],
        rejections=[Rejection("r9", 12)],
    )
    stats = dataset_stats(result)
    lines = stats.lines()

    assert lines[:3] == ["recordings=3", "classes=2", "rejected=1"]
    assert "class.A=2" in lines
    assert "class.B=0" in lines
    assert "class.10=1" in lines
    assert "length.60-64=1" in lines
    assert lines[-1] == "rejected r9 length=12"


def test_stats_from_plain_recordings(small_dataset):
    stats = dataset_stats(small_dataset)
    assert stats.total == 40
    assert stats.num_classes == 4
    assert stats.rejections == []
    assert sum(stats.length_histogram.values()) == 40
