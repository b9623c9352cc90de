import hashlib
import io
import math

import pytest

from evcluster.eventio import validate_monotonic, write_events_binary
from evcluster.model import Event, SensorGeometry
from evcluster.oracle import build_polyforest, component_summaries
from evcluster.synth import (
    LampConfig,
    NoiseConfig,
    SplitMix64,
    gen_background,
    gen_hot_pixel,
    gen_lamp,
    gen_noise,
    gen_separated_clusters,
    merge_streams,
)


def test_splitmix_reference_vectors():
    rng = SplitMix64(1234567)
    assert [rng.next_u64() for _ in range(5)] == [
        6457827717110365317,
        3203168211198807973,
        9817491932198370423,
        4593380528125082431,
        16408922859458223821,
    ]


def test_splitmix_derived_draws():
    rng = SplitMix64(0)
    draws = [rng.below(10) for _ in range(1000)]
    assert min(draws) == 0 and max(draws) == 9
    u = SplitMix64(0).uniform()
    assert 0 <= u < 1


def test_lamp_defaults():
    events = gen_lamp(LampConfig())
    assert len(events) == 800
    pos = [e for e in events if e.p == 1]
    starts = sorted({e.t for e in pos if e.t % 10000 == 0})
    assert starts == [10000 * k for k in range(10)]
    assert validate_monotonic(events) is None


def test_lamp_zero_periods():
    assert gen_lamp(LampConfig(periods=0)) == []


def test_lamp_deterministic():
    a = io.BytesIO()
    b = io.BytesIO()
    write_events_binary(gen_lamp(LampConfig(seed=9)), a)
    write_events_binary(gen_lamp(LampConfig(seed=9)), b)
    assert hashlib.sha256(a.getvalue()).digest() == hashlib.sha256(b.getvalue()).digest()
    assert gen_lamp(LampConfig(seed=9)) != gen_lamp(LampConfig(seed=10))


@pytest.mark.parametrize("epb", [20, 30, 40, 50, 60])
def test_lamp_burst_guarantees(epb):
    cfg = LampConfig(events_per_burst=epb, seed=epb)
    events = gen_lamp(cfg)
    cx, cy = cfg.roi_center
    for k in range(2 * cfg.periods):
        burst = events[k * epb:(k + 1) * epb]
        start = burst[0].t
        assert start == round(k * cfg.period_us / 2)
        assert all(b.t > start for b in burst[1:])
        assert burst[-1].t <= start + cfg.burst_width
        gaps = [b.t - a.t for a, b in zip(burst, burst[1:])]
        assert max(gaps) <= 2 * cfg.burst_width / epb
        for a, b in zip(burst, burst[1:]):
            assert max(abs(a.x - b.x), abs(a.y - b.y)) <= 1
        assert all(abs(e.x - cx) <= cfg.roi_radius and abs(e.y - cy) <= cfg.roi_radius for e in burst)


@pytest.mark.parametrize("epb", [20, 40, 60])
def test_lamp_components_under_reference(epb):
    cfg = LampConfig(events_per_burst=epb, seed=3)
    pos = [e for e in gen_lamp(cfg) if e.p == 1]
    summaries = component_summaries(build_polyforest(pos, 2000, 1))
    assert len(summaries) == cfg.periods
    for k, s in enumerate(summaries):
        first = pos[k * epb]
        assert (s.root_t, s.root_x, s.root_y) == (first.t, first.x, first.y)
        assert s.event_count == epb


def test_lamp_config_invariants():
    with pytest.raises(ValueError):
        LampConfig(burst_width=2500)  # period/4 = 2500
    with pytest.raises(ValueError):
        LampConfig(roi_center=(1, 1), roi_radius=3)
    with pytest.raises(ValueError):
        LampConfig(events_per_burst=0)


def test_hot_pixel():
    events = gen_hot_pixel((4, 9), 10_000, 10_000, seed=5)
    assert 90 <= len(events) <= 110
    assert {(e.x, e.y) for e in events} == {(4, 9)}
    assert validate_monotonic(events) is None
    assert gen_hot_pixel((4, 9), 0, 10_000, seed=5) == []


def test_background_poisson_count():
    geom = SensorGeometry(32, 32)
    rate, duration = 50.0, 200_000
    events = gen_background(geom, rate, duration, seed=11)
    mean = rate * geom.n_pixels * duration * 1e-6
    assert abs(len(events) - mean) <= 3 * math.sqrt(mean)
    assert all(geom.contains(e.x, e.y) and 0 <= e.t < duration for e in events)
    assert validate_monotonic(events) is None
    assert gen_background(geom, 0, duration, seed=11) == []


def test_noise_config():
    with pytest.raises(ValueError):
        NoiseConfig(background_rate=-1)
    events = gen_noise(NoiseConfig(hot_pixels=[((1, 1), 5000)], background_rate=10, duration=20_000))
    assert validate_monotonic(events) is None
    assert sum(1 for e in events if (e.x, e.y) == (1, 1)) >= 90


def test_merge_streams():
    a = [Event(0, 0, 0, 1), Event(5, 0, 0, 1), Event(5, 1, 0, 1)]
    b = [Event(1, 2, 2, 1), Event(5, 3, 3, 1)]
    assert merge_streams([a]) == a
    merged = merge_streams([a, b])
    assert merged == sorted(a + b, key=lambda e: e.t)
    assert merged[2:] == [Event(5, 0, 0, 1), Event(5, 1, 0, 1), Event(5, 3, 3, 1)]


def test_merge_matches_stable_sort_on_random_streams():
    for seed in range(20):
        rng = SplitMix64(seed)
        streams = []
        for s in range(4):
            t = 0
            stream = []
            for _ in range(rng.below(30)):
                t += rng.below(4)
                stream.append(Event(t, s, 0, 1))
            streams.append(stream)
        assert merge_streams(streams) == sorted(sum(streams, []), key=lambda e: e.t)


def test_separated_clusters_are_separated():
    geom = SensorGeometry(64, 64)
    delta, d = 500, 1
    events = gen_separated_clusters(geom, delta, d, 60, seed=4)
    assert 0 < len(events) <= 5000
    assert validate_monotonic(events) is None
    forest = build_polyforest(events, delta, d)
    comp = forest.component_of
    for i, a in enumerate(events):
        for j in range(i + 1, len(events)):
            b = events[j]
            if b.t - a.t > delta:
                break
            if comp[i] != comp[j]:
                assert max(abs(a.x - b.x), abs(a.y - b.y)) > d
