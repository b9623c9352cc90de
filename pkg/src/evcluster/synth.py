"""Deterministic synthetic event streams.

All randomness comes from :class:`SplitMix64`, a fixed, fully specified
64-bit generator, so a given seed produces the same stream on any platform
and in any language that implements the same draws:

* ``next_u64``: SplitMix64 step (golden-gamma increment, two xor-shift-multiply
  rounds).
* ``below(k)``: ``(next_u64() * k) >> 64``.
* ``uniform()``: ``(next_u64() >> 11) * 2**-53``.

Reference outputs for seed ``1234567``: 6457827717110365317,
3203168211198807973, 9817491932198370423, 4593380528125082431,
16408922859458223821.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field
from typing import Iterable, List, Sequence, Tuple

from .model import Event, Pixel, SensorGeometry

_MASK = (1 << 64) - 1


class SplitMix64:
    def __init__(self, seed: int) -> None:
        self.state = seed & _MASK

    def next_u64(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & _MASK
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
        return z ^ (z >> 31)

    def below(self, k: int) -> int:
        """Integer in ``[0, k)``."""
        return (self.next_u64() * k) >> 64

    def between(self, lo: int, hi: int) -> int:
        """Integer in ``[lo, hi]``."""
        return lo + self.below(hi - lo + 1)

    def uniform(self) -> float:
        """Float in ``[0, 1)``."""
        return (self.next_u64() >> 11) * (1.0 / (1 << 53))

    def polarity(self) -> int:
        return 1 if self.next_u64() >> 63 else -1


@dataclass(frozen=True)
class LampConfig:
    frequency: float = 100.0
    periods: int = 10
    events_per_burst: int = 40
    burst_width: int = 1500
    roi_center: Pixel = (32, 32)
    roi_radius: int = 3
    geometry: SensorGeometry = SensorGeometry(64, 64)
    seed: int = 1

    def __post_init__(self) -> None:
        if self.frequency <= 0:
            raise ValueError("frequency must be positive")
        if self.periods < 0:
            raise ValueError("periods must be >= 0")
        if self.events_per_burst < 1:
            raise ValueError("events_per_burst must be >= 1")
        if not 0 < self.burst_width < self.period_us / 4:
            raise ValueError(
                f"burst_width must be in (0, period/4) = (0, {self.period_us / 4:g}) µs"
            )
        cx, cy = self.roi_center
        r = self.roi_radius
        if r < 0 or not (
            self.geometry.contains(cx - r, cy - r) and self.geometry.contains(cx + r, cy + r)
        ):
            raise ValueError("ROI does not fit the sensor geometry")

    @property
    def period_us(self) -> float:
        return 1e6 / self.frequency


@dataclass(frozen=True)
class NoiseConfig:
    hot_pixels: Sequence[Tuple[Pixel, float]] = ()
    background_rate: float = 0.0
    duration: int = 0
    geometry: SensorGeometry = SensorGeometry(64, 64)
    seed: int = 1

    def __post_init__(self) -> None:
        if self.background_rate < 0 or any(rate < 0 for _, rate in self.hot_pixels):
            raise ValueError("rates must be >= 0")
        if self.duration < 0:
            raise ValueError("duration must be >= 0")


def _burst(
    rng: SplitMix64, start: int, count: int, width: int, p: int,
    center: Pixel, radius: int, step: int = 1,
) -> List[Event]:
    # Timestamps: the k-th event falls in [start + k*w, start + (k + 0.5)*w)
    # with w = width / count, so the first is strictly earliest, the last is
    # inside the burst window and every gap is at most 1.5*w.
    # Pixels: a random walk of Chebyshev steps <= ``step``, clipped to the ROI,
    # so every event neighbors the one before it.
    cx, cy = center
    w = width / count
    x = rng.between(cx - radius, cx + radius)
    y = rng.between(cy - radius, cy + radius)
    out = [Event(start, x, y, p)]
    for k in range(1, count):
        t = start + int((k + 0.5 * rng.uniform()) * w)
        x = min(max(x + rng.between(-step, step), cx - radius), cx + radius)
        y = min(max(y + rng.between(-step, step), cy - radius), cy + radius)
        out.append(Event(t, x, y, p))
    return out


def gen_lamp(config: LampConfig) -> List[Event]:
    """Rectified periodic flicker: one positive and one negative burst per period.

    The positive burst of period ``k`` starts at ``k * period`` and the
    negative one half a period later.
    """
    rng = SplitMix64(config.seed)
    events: List[Event] = []
    for k in range(config.periods):
        for p, phase in ((1, 0.0), (-1, 0.5)):
            start = round((k + phase) * config.period_us)
            events.extend(
                _burst(rng, start, config.events_per_burst, config.burst_width, p,
                       config.roi_center, config.roi_radius)
            )
    return events


def gen_hot_pixel(coord: Pixel, rate: float, duration: int, seed: int) -> List[Event]:
    """Jittered near-periodic events on a single pixel over ``[0, duration)`` µs."""
    if rate < 0:
        raise ValueError("rate must be >= 0")
    if rate == 0 or duration <= 0:
        return []
    rng = SplitMix64(seed)
    period = 1e6 / rate
    x, y = coord
    out = []
    k = 0
    while True:
        t = int((k + 0.5 * rng.uniform()) * period)
        if t >= duration:
            break
        out.append(Event(t, x, y, rng.polarity()))
        k += 1
    return out


def gen_background(geometry: SensorGeometry, rate: float, duration: int, seed: int) -> List[Event]:
    """Poisson background noise: ``rate`` events/s per pixel, uniform over the sensor."""
    if rate < 0:
        raise ValueError("rate must be >= 0")
    if rate == 0 or duration <= 0:
        return []
    rng = SplitMix64(seed)
    per_us = rate * geometry.n_pixels * 1e-6
    out = []
    t = 0.0
    while True:
        t += -math.log(1.0 - rng.uniform()) / per_us
        if t >= duration:
            break
        x = rng.below(geometry.width)
        y = rng.below(geometry.height)
        out.append(Event(int(t), x, y, rng.polarity()))
    return out


def gen_noise(config: NoiseConfig) -> List[Event]:
    streams = [
        gen_hot_pixel(coord, rate, config.duration, config.seed + 1 + i)
        for i, (coord, rate) in enumerate(config.hot_pixels)
    ]
    streams.append(gen_background(config.geometry, config.background_rate, config.duration, config.seed))
    return merge_streams(streams)


def merge_streams(streams: Iterable[Sequence[Event]]) -> List[Event]:
    """Stable timestamp merge; ties keep the earlier stream's events first."""
    return list(heapq.merge(*streams, key=lambda e: e.t))


@dataclass
class _Blob:
    x0: int
    y0: int
    x1: int
    y1: int
    t0: int
    t1: int
    events: List[Event] = field(default_factory=list)


def gen_separated_clusters(
    geometry: SensorGeometry,
    delta: int,
    d: int,
    n_clusters: int,
    seed: int,
    max_events: int = 5000,
    max_size: int = 40,
    radius: int = 3,
    mean_spacing: int = 0,
) -> List[Event]:
    """Random clusters that never interact with each other.

    Each cluster is a random walk (Chebyshev step <= ``d``, time gaps <= ``delta``)
    inside a small square. Two clusters whose squares come within ``d`` of each
    other are kept more than ``delta`` apart in time, so no event of one can be
    related to any event of another. Clusters far apart in space overlap freely
    in time.
    """
    if d < 1:
        raise ValueError("d must be >= 1 for random-walk clusters")
    rng = SplitMix64(seed)
    spacing = mean_spacing or max(1, delta // 2)
    radius = min(radius, (min(geometry.width, geometry.height) - 1) // 2)
    blobs: List[_Blob] = []
    total = 0
    t_start = 0
    for _ in range(n_clusters):
        size = rng.between(1, max_size)
        if total + size > max_events:
            break
        t_start += rng.below(2 * spacing + 1)
        for _attempt in range(50):
            cx = rng.between(radius, geometry.width - 1 - radius)
            cy = rng.between(radius, geometry.height - 1 - radius)
            evs = []
            t = t_start
            x, y = rng.between(cx - radius, cx + radius), rng.between(cy - radius, cy + radius)
            for k in range(size):
                if k:
                    t += rng.below(delta + 1)
                    x = min(max(x + rng.between(-d, d), cx - radius), cx + radius)
                    y = min(max(y + rng.between(-d, d), cy - radius), cy + radius)
                evs.append(Event(t, x, y, rng.polarity()))
            xs = [e.x for e in evs]
            ys = [e.y for e in evs]
            blob = _Blob(min(xs), min(ys), max(xs), max(ys), evs[0].t, evs[-1].t, evs)
            if all(_compatible(blob, other, delta, d) for other in blobs):
                blobs.append(blob)
                total += size
                break
    return merge_streams(b.events for b in blobs)


def _compatible(a: _Blob, b: _Blob, delta: int, d: int) -> bool:
    apart_in_space = (
        a.x0 - b.x1 > d or b.x0 - a.x1 > d or a.y0 - b.y1 > d or b.y0 - a.y1 > d
    )
    apart_in_time = a.t0 - b.t1 > delta or b.t0 - a.t1 > delta
    return apart_in_space or apart_in_time
