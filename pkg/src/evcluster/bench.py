"""Throughput measurements for the streaming detector."""

from __future__ import annotations

import gc
import statistics
import time
from dataclasses import dataclass
from typing import Iterator, List, Sequence, Tuple

from .clusterer import StreamClusterer
from .model import ClusterParams, Event, SensorGeometry
from .synth import SplitMix64

BENCH_PARAMS = ClusterParams(delta=2000, d=1, n=10, m=5)
REGION = 120  # side of the square the bench stream lives in
MEAN_GAP_US = 10
SEGMENT = 2000
QUIET_US = 5000  # > BENCH_PARAMS.delta


@dataclass(frozen=True)
class BenchRow:
    geometry: SensorGeometry
    events: int
    total_us: float
    ns_per_event: float
    alloc_us: float

    HEADER = "geometry,events,total_us,ns_per_event,alloc_us"

    def csv(self) -> str:
        return f"{self.geometry},{self.events},{self.total_us:.1f},{self.ns_per_event:.1f},{self.alloc_us:.1f}"


def make_bench_stream(n_events: int, seed: int = 7) -> List[Event]:
    """Fixed-density stream inside a REGION x REGION square at the origin.

    The stream is a sequence of segments of SEGMENT events separated by
    QUIET_US of silence, longer than the bench delta, so every cluster of one
    segment is over before the next begins. Within a segment half the events
    continue a random walk from a random start (dense clusters) and half land
    on a uniformly random pixel (background). Every segment has the same
    statistics, so longer streams have the same workload, just more of it.
    """
    rng = SplitMix64(seed)
    out = []
    t = 0
    wx = wy = 0
    for k in range(n_events):
        if k % SEGMENT == 0:
            t += QUIET_US
            wx, wy = rng.below(REGION), rng.below(REGION)
        t += rng.below(2 * MEAN_GAP_US + 1)
        if rng.next_u64() >> 63:
            wx = min(max(wx + rng.between(-1, 1), 0), REGION - 1)
            wy = min(max(wy + rng.between(-1, 1), 0), REGION - 1)
            out.append(Event(t, wx, wy, 1))
        else:
            out.append(Event(t, rng.below(REGION), rng.below(REGION), -1))
    return out


def place(events: Sequence[Event], geom: SensorGeometry) -> List[Event]:
    """Translate a bench stream to the middle of ``geom``."""
    if geom.width < REGION or geom.height < REGION:
        raise ValueError(f"geometry {geom} smaller than the {REGION}x{REGION} bench region")
    ox = (geom.width - REGION) // 2
    oy = (geom.height - REGION) // 2
    return [Event(t, x + ox, y + oy, p) for t, x, y, p in events]


CHUNK = 1000  # events processed by one case before the scheduler moves on


def _timed_runs(
    events: Sequence[Event], geom: SensorGeometry, params: ClusterParams, runs: int, out: List[Tuple[int, int]]
) -> Iterator[None]:
    """Process ``events`` ``runs`` times on fresh state, yielding after every
    chunk. Appends (alloc_ns, busy_ns) per run to ``out``."""
    chunks = [events[s:s + CHUNK] for s in range(0, len(events), CHUNK)]
    clock = time.perf_counter_ns
    for _ in range(runs):
        t0 = clock()
        c = StreamClusterer(geom, params)
        alloc = clock() - t0
        step = c.process_event
        busy = 0
        for chunk in chunks:
            t0 = clock()
            for e in chunk:
                step(e)
            busy += clock() - t0
            yield
        out.append((alloc, busy))
        del c
        yield


def _row(geom: SensorGeometry, n: int, samples: List[Tuple[int, int]]) -> BenchRow:
    tot = statistics.median(s[1] for s in samples)
    alloc = statistics.median(s[0] for s in samples)
    return BenchRow(geom, n, tot / 1e3, tot / n if n else 0.0, alloc / 1e3)


def sweep(
    event_counts: Sequence[int],
    geometries: Sequence[SensorGeometry],
    repeat: int = 3,
    seed: int = 7,
    params: ClusterParams = BENCH_PARAMS,
) -> List[BenchRow]:
    """Time every (event count, geometry) pair.

    For each event count the same base stream is translated into every
    geometry. All cases advance round-robin, one chunk of events at a time,
    so drift in machine speed hits every configuration alike. Shorter
    streams are run more often so that every case processes about the same
    number of events; each row reports the median over its runs.
    """
    repeat = max(1, repeat)
    longest = max(event_counts, default=0)
    cases = []
    for n in event_counts:
        base = make_bench_stream(n, seed)
        runs = repeat * max(1, -(-longest // n) if n else 1)
        cases.extend((n, g, place(base, g), runs) for g in geometries)
    samples: List[List[Tuple[int, int]]] = [[] for _ in cases]
    active = [_timed_runs(ev, g, params, runs, samples[k]) for k, (_n, g, ev, runs) in enumerate(cases)]
    gc.collect()
    gc.disable()
    try:
        while active:
            for it in list(active):
                if next(it, StopIteration) is StopIteration:
                    active.remove(it)
    finally:
        gc.enable()
    return [_row(g, n, s) for (n, g, _e, _r), s in zip(cases, samples)]


def time_run(
    events: Sequence[Event], geom: SensorGeometry, params: ClusterParams = BENCH_PARAMS, repeat: int = 3
) -> BenchRow:
    """Median over ``repeat`` runs of one stream; state allocation is timed separately."""
    samples: List[Tuple[int, int]] = []
    for _ in _timed_runs(events, geom, params, max(1, repeat), samples):
        pass
    return _row(geom, len(events), samples)
