"""Single-pass streaming cluster detector.

Events are consumed one at a time in timestamp order. Every pixel owns one
cell in a set of dense per-pixel arrays; an event only ever reads and writes
the cells of its own (2d+1)x(2d+1) neighborhood plus the cells of one root
pixel, so the cost per event does not depend on the sensor size, the number of
clusters, or how many events came before.

Arrays are flat Python lists indexed by ``y * width + x``. A pixel's root link
is stored as the flat index of the root pixel (``UNLINKED`` when absent), which
carries the same information as a separate x/y pointer pair.
"""

from __future__ import annotations

import enum
from typing import Iterable, Iterator, List, NamedTuple, Optional

from .model import ClusterParams, ClusterRecord, Event, Pixel, SensorGeometry

NEVER = -1  # time surface of a pixel that has not fired yet
UNLINKED = -1
NO_ROW = -1


class OutOfOrderTimestamp(ValueError):
    def __init__(self, t: int, last_t: int, index: Optional[int] = None) -> None:
        where = f" at event {index}" if index is not None else ""
        super().__init__(f"timestamp {t} precedes previous timestamp {last_t}{where}")
        self.t = t
        self.last_t = last_t
        self.index = index


class OutOfBounds(ValueError):
    pass


class Outcome(enum.Enum):
    ISOLATED = "Isolated"
    CLUSTER_FOUNDED = "ClusterFounded"
    CLUSTER_EXTENDED = "ClusterExtended"
    PIXEL_ATTACHED = "PixelAttached"


class Freshness(enum.Enum):
    NEW_ROW = "NewRow"
    UPDATED_ROW = "UpdatedRow"


class DetectionEvent(NamedTuple):
    row_index: int
    freshness: Freshness
    record: ClusterRecord


class StepOutcome(NamedTuple):
    kind: Outcome
    detection: Optional[DetectionEvent] = None


_ISOLATED = StepOutcome(Outcome.ISOLATED)
_FOUNDED = StepOutcome(Outcome.CLUSTER_FOUNDED)
_EXTENDED = StepOutcome(Outcome.CLUSTER_EXTENDED)
_ATTACHED = StepOutcome(Outcome.PIXEL_ATTACHED)


class PixelView(NamedTuple):
    """Read-only snapshot of one pixel's cells, with the link as coordinates."""

    time_surface: int
    root_link: Optional[Pixel]
    grade: int
    pixels: int
    cluster_begin: int
    cluster_end: int
    cluster_id: int
    compatibility: int


class PixelState:
    """The nine dense per-pixel arrays (root link x/y folded into one)."""

    __slots__ = (
        "time_surface",
        "root_link",
        "grade",
        "pixels",
        "cluster_begin",
        "cluster_end",
        "cluster_id",
        "compatibility",
    )

    def __init__(self, n_pixels: int) -> None:
        self.time_surface = [NEVER] * n_pixels
        self.root_link = [UNLINKED] * n_pixels
        self.grade = [0] * n_pixels
        self.pixels = [0] * n_pixels
        self.cluster_begin = [0] * n_pixels
        self.cluster_end = [0] * n_pixels
        self.cluster_id = [NO_ROW] * n_pixels
        self.compatibility = [0] * n_pixels


class StreamClusterer:
    """Streaming detector state for one sensor.

    >>> from evcluster.model import ClusterParams, Event, SensorGeometry
    >>> c = StreamClusterer(SensorGeometry(64, 64), ClusterParams(1000, 1, 3, 2))
    >>> [c.process_event(e).kind.value for e in
    ...  [Event(0, 5, 5, 1), Event(100, 5, 6, 1), Event(200, 6, 5, 1)]]
    ['Isolated', 'ClusterFounded', 'PixelAttached']
    >>> c.results()
    [ClusterRecord(root_t=0, root_x=5, root_y=5, end_t=200, event_count=3, pixel_count=3)]

    A state is strictly sequential; hand it between threads if needed, but
    never feed it from two at once.
    """

    def __init__(self, geom: SensorGeometry, params: ClusterParams) -> None:
        if geom.n_pixels < 1:
            raise ValueError("sensor geometry has zero area")
        self.geom = geom
        self.params = params
        self.state = PixelState(geom.n_pixels)
        self._rows: List[List[int]] = []
        self._last_t: Optional[int] = None
        self.events_processed = 0

    # -- main dispatch -----------------------------------------------------

    def process_event(self, e: Event) -> StepOutcome:
        t, x, y = e[0], e[1], e[2]
        if self._last_t is not None and t < self._last_t:
            raise OutOfOrderTimestamp(t, self._last_t, self.events_processed)
        w = self.geom.width
        if not (0 <= x < w and 0 <= y < self.geom.height):
            raise OutOfBounds(f"pixel ({x}, {y}) outside {self.geom}")
        i = y * w + x

        self._reset_if_stale(i)
        if self._is_member(i, t):
            out = self._extend(i, t)
        else:
            a = self._select_neighbor(x, y, t)
            if a < 0:
                out = _ISOLATED
            elif self._anchor_is_live(a, t):
                out = self._attach(i, a, t)
            else:
                out = self._found(a, i, t)

        # Written last so the neighbor search only ever sees earlier events.
        self.state.time_surface[i] = t
        self._last_t = t
        self.events_processed += 1
        return out

    def process(self, events: Iterable[Event]) -> Iterator[StepOutcome]:
        for e in events:
            yield self.process_event(e)

    def run(self, events: Iterable[Event]) -> List[ClusterRecord]:
        for e in events:
            self.process_event(e)
        return self.results()

    def results(self) -> List[ClusterRecord]:
        """Output rows in creation order."""
        return [ClusterRecord(*row) for row in self._rows]

    @property
    def n_rows(self) -> int:
        return len(self._rows)

    # -- individual decision steps (pixel-coordinate API) ------------------

    def stale_link_check(self, pixel: Pixel) -> bool:
        """True, after unlinking the pixel, if its root has since started a new cluster."""
        return self._reset_if_stale(self._index(pixel))

    def membership_check(self, pixel: Pixel, t: int) -> bool:
        """True if the pixel is linked to a cluster whose last event is within delta of ``t``."""
        return self._is_member(self._index(pixel), t)

    def neighbor_select(self, pixel: Pixel, t: int) -> Optional[Pixel]:
        x, y = pixel
        self._index(pixel)
        a = self._select_neighbor(x, y, t)
        return None if a < 0 else self._coords(a)

    def found_cluster(self, anchor: Pixel, pixel: Pixel, t: int) -> StepOutcome:
        return self._found(self._index(anchor), self._index(pixel), t)

    def extend_cluster(self, pixel: Pixel, t: int) -> StepOutcome:
        return self._extend(self._index(pixel), t)

    def attach_pixel(self, pixel: Pixel, anchor: Pixel, t: int) -> StepOutcome:
        return self._attach(self._index(pixel), self._index(anchor), t)

    def publish_or_update_detection(self, root: Pixel, t: int) -> Optional[DetectionEvent]:
        return self._publish(self._index(root), t)

    def cell(self, pixel: Pixel) -> PixelView:
        i = self._index(pixel)
        s = self.state
        r = s.root_link[i]
        return PixelView(
            s.time_surface[i],
            None if r < 0 else self._coords(r),
            s.grade[i],
            s.pixels[i],
            s.cluster_begin[i],
            s.cluster_end[i],
            s.cluster_id[i],
            s.compatibility[i],
        )

    # -- internals (flat indices) ------------------------------------------

    def _index(self, pixel: Pixel) -> int:
        x, y = pixel
        if not self.geom.contains(x, y):
            raise OutOfBounds(f"pixel ({x}, {y}) outside {self.geom}")
        return y * self.geom.width + x

    def _coords(self, i: int) -> Pixel:
        y, x = divmod(i, self.geom.width)
        return (x, y)

    def _reset_if_stale(self, i: int) -> bool:
        s = self.state
        r = s.root_link[i]
        if r >= 0 and s.compatibility[i] != s.cluster_begin[r]:
            s.root_link[i] = UNLINKED
            s.compatibility[i] = 0
            return True
        return False

    def _is_member(self, i: int, t: int) -> bool:
        r = self.state.root_link[i]
        return r >= 0 and t - self.state.cluster_end[r] <= self.params.delta

    def _select_neighbor(self, x: int, y: int, t: int) -> int:
        # Freshest neighbor within delta; strict '<' keeps the raster-first on ties.
        d = self.params.d
        w = self.geom.width
        ts = self.state.time_surface
        x0 = x - d if x > d else 0
        x1 = x + d if x + d < w else w - 1
        y0 = y - d if y > d else 0
        y1 = y + d if y + d < self.geom.height else self.geom.height - 1
        best = -1
        best_dt = self.params.delta + 1
        for row in range(y0 * w, y1 * w + 1, w):
            for j in range(row + x0, row + x1 + 1):
                s = ts[j]
                if s != NEVER and t - s < best_dt:
                    best_dt = t - s
                    best = j
        return best

    def _anchor_is_live(self, a: int, t: int) -> bool:
        # Linked, not superseded by a newer cluster at its root, and that
        # cluster has not gone quiet for more than delta.
        s = self.state
        r = s.root_link[a]
        return (
            r >= 0
            and s.compatibility[a] == s.cluster_begin[r]
            and t - s.cluster_end[r] <= self.params.delta
        )

    def _found(self, a: int, i: int, t: int) -> StepOutcome:
        s = self.state
        begin = s.time_surface[a]
        s.root_link[a] = s.root_link[i] = a
        s.cluster_begin[a] = begin
        s.compatibility[a] = s.compatibility[i] = begin
        s.cluster_end[a] = t
        s.grade[a] = 2
        s.pixels[a] = 1 if a == i else 2
        return _FOUNDED

    def _extend(self, i: int, t: int) -> StepOutcome:
        s = self.state
        r = s.root_link[i]
        s.cluster_end[r] = t
        s.grade[r] += 1
        det = self._publish(r, t)
        return _EXTENDED if det is None else StepOutcome(Outcome.CLUSTER_EXTENDED, det)

    def _attach(self, i: int, a: int, t: int) -> StepOutcome:
        s = self.state
        r = s.root_link[a]
        s.root_link[i] = r
        s.compatibility[i] = s.compatibility[a]
        s.cluster_end[r] = t
        s.grade[r] += 1
        s.pixels[r] += 1
        det = self._publish(r, t)
        return _ATTACHED if det is None else StepOutcome(Outcome.PIXEL_ATTACHED, det)

    def _publish(self, r: int, t: int) -> Optional[DetectionEvent]:
        s = self.state
        grade = s.grade[r]
        pixels = s.pixels[r]
        if grade < self.params.n or pixels < self.params.m:
            return None
        rows = self._rows
        cid = s.cluster_id[r]
        end = s.cluster_end[r]
        if cid > NO_ROW and t - rows[cid][3] <= self.params.delta:
            row = rows[cid]
            row[3] = end
            row[4] = grade
            row[5] = pixels
            return DetectionEvent(cid, Freshness.UPDATED_ROW, ClusterRecord(*row))
        y, x = divmod(r, self.geom.width)
        row = [s.cluster_begin[r], x, y, end, grade, pixels]
        cid = len(rows)
        rows.append(row)
        s.cluster_id[r] = cid
        return DetectionEvent(cid, Freshness.NEW_ROW, ClusterRecord(*row))


def cluster_events(
    events: Iterable[Event], geom: SensorGeometry, params: ClusterParams
) -> List[ClusterRecord]:
    """Run a fresh detector over ``events`` and return its output rows."""
    return StreamClusterer(geom, params).run(events)
