import pytest

from evcluster.bench import (
    QUIET_US,
    REGION,
    SEGMENT,
    BenchRow,
    make_bench_stream,
    place,
    sweep,
    time_run,
)
from evcluster.eventio import validate_monotonic
from evcluster.model import Event, SensorGeometry


def test_stream_is_sorted_and_inside_region():
    events = make_bench_stream(5000)
    assert len(events) == 5000
    assert validate_monotonic(events) is None
    assert all(0 <= e.x < REGION and 0 <= e.y < REGION for e in events)


def test_longer_stream_extends_shorter():
    assert make_bench_stream(10_000)[:3000] == make_bench_stream(3000)


def test_segments_are_separated_by_silence():
    events = make_bench_stream(3 * SEGMENT)
    for k in (SEGMENT, 2 * SEGMENT):
        assert events[k].t - events[k - 1].t >= QUIET_US


def test_place_centers_stream():
    geom = SensorGeometry(200, 130)
    (e,) = place([Event(0, 0, 0, 1)], geom)
    assert (e.x, e.y) == ((200 - REGION) // 2, (130 - REGION) // 2)
    with pytest.raises(ValueError):
        place([], SensorGeometry(REGION - 1, 500))


def test_sweep_rows_follow_case_order():
    geoms = [SensorGeometry(128, 128), SensorGeometry(160, 120)]
    rows = sweep([500, 1500], geoms, repeat=1)
    assert [(r.geometry, r.events) for r in rows] == [(g, n) for n in (500, 1500) for g in geoms]
    assert all(r.ns_per_event > 0 and r.alloc_us > 0 for r in rows)


def test_time_run_and_csv():
    row = time_run(place(make_bench_stream(300), SensorGeometry(128, 128)), SensorGeometry(128, 128), repeat=2)
    assert row.events == 300
    assert row.csv().startswith("128x128,300,")
    assert len(row.csv().split(",")) == len(BenchRow.HEADER.split(","))
