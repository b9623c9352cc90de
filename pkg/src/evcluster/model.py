"""Shared value types and the pixel-neighborhood helper."""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, NamedTuple, Tuple

Pixel = Tuple[int, int]

#: Largest timestamp representable in the unsigned 64-bit wire formats.
MAX_TIMESTAMP = (1 << 64) - 1


class Event(NamedTuple):
    """One camera report: timestamp (µs), column, row, polarity (+1 / -1)."""

    t: int
    x: int
    y: int
    p: int


class ClusterRecord(NamedTuple):
    """One row of the cluster output list, in its fixed column order."""

    root_t: int
    root_x: int
    root_y: int
    end_t: int
    event_count: int
    pixel_count: int


@dataclass(frozen=True)
class SensorGeometry:
    width: int
    height: int

    def __post_init__(self) -> None:
        if self.width < 1 or self.height < 1:
            raise ValueError(f"sensor geometry must be at least 1x1, got {self.width}x{self.height}")

    @property
    def n_pixels(self) -> int:
        return self.width * self.height

    def contains(self, x: int, y: int) -> bool:
        return 0 <= x < self.width and 0 <= y < self.height

    @classmethod
    def parse(cls, text: str) -> "SensorGeometry":
        """Parse ``"WxH"``, e.g. ``"1280x720"``."""
        w, sep, h = text.lower().partition("x")
        if not sep:
            raise ValueError(f"geometry must look like WxH, got {text!r}")
        return cls(int(w), int(h))

    def __str__(self) -> str:
        return f"{self.width}x{self.height}"


@dataclass(frozen=True)
class ClusterParams:
    """Constant clustering parameters.

    delta: max temporal gap (µs) between an event and the cluster it joins.
    d: max Chebyshev pixel distance to a neighbor.
    n: min events in a reported cluster.
    m: min contributing pixels in a reported cluster.
    """

    delta: int
    d: int
    n: int
    m: int

    def __post_init__(self) -> None:
        if self.delta < 1:
            raise ValueError(f"delta must be >= 1 µs, got {self.delta}")
        if self.d < 0:
            raise ValueError(f"d must be >= 0, got {self.d}")
        if self.n < 3:
            raise ValueError(f"n must be >= 3, got {self.n}")
        if self.m < 1:
            raise ValueError(f"m must be >= 1, got {self.m}")


def validate_event(e: Event, geom: SensorGeometry) -> None:
    """Raise ValueError unless ``e`` is a well-formed event inside ``geom``."""
    if e.p not in (1, -1):
        raise ValueError(f"polarity must be +1 or -1, got {e.p}")
    if not 0 <= e.t <= MAX_TIMESTAMP:
        raise ValueError(f"timestamp out of unsigned 64-bit range: {e.t}")
    if not geom.contains(e.x, e.y):
        raise ValueError(f"pixel ({e.x}, {e.y}) outside {geom}")


def chebyshev_neighbors(center: Pixel, d: int, geom: SensorGeometry) -> List[Pixel]:
    """All in-bounds pixels within Chebyshev distance ``d`` of ``center``.

    The center itself is included. Output is in raster order (row-major:
    ascending y, then ascending x).

    >>> chebyshev_neighbors((0, 0), 1, SensorGeometry(64, 64))
    [(0, 0), (1, 0), (0, 1), (1, 1)]
    """
    x, y = center
    if not geom.contains(x, y):
        raise ValueError(f"center ({x}, {y}) outside {geom}")
    x0, x1 = max(x - d, 0), min(x + d, geom.width - 1)
    y0, y1 = max(y - d, 0), min(y + d, geom.height - 1)
    return [(xx, yy) for yy in range(y0, y1 + 1) for xx in range(x0, x1 + 1)]
