"""Brute-force reference clustering built straight from the graph definition.

Events are taken in order and each one is attached, as a new vertex, to an
existing connected component or starts its own:

1. same pixel: a component already holds an event at this pixel and its
   latest event is at most ``delta`` older -> edge from that component's root;
2. neighborhood: some earlier event within Chebyshev distance ``d`` is at most
   ``delta`` older -> edge from the root of that event's component (the
   freshest such event wins, then raster order of its pixel);
3. otherwise the event is a new singleton component.

The root of a component is its earliest (minimal-index) event. Nothing here
is tuned for speed; the windowed variant only skips events that are provably
too old to matter and is checked against the full scan in the test suite.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Set, Tuple

from .model import ClusterRecord, Event


class OracleInvariantError(AssertionError):
    pass


@dataclass
class Component:
    root: int
    members: List[int] = field(default_factory=list)
    pixels: Set[Tuple[int, int]] = field(default_factory=set)
    max_t: int = 0


@dataclass
class Polyforest:
    events: List[Event]
    edges: List[Tuple[int, int]]
    component_of: List[int]
    components: List[Component]
    diagnostics: List[str] = field(default_factory=list)

    def root_of(self, v: int) -> int:
        return self.components[self.component_of[v]].root


@dataclass(frozen=True)
class ComponentSummary:
    root_t: int
    root_x: int
    root_y: int
    end_t: int
    event_count: int
    distinct_pixels: int


def _check_sorted(events: Sequence[Event]) -> None:
    for k in range(1, len(events)):
        if events[k].t < events[k - 1].t:
            raise ValueError(f"events not sorted by timestamp at index {k}")


def build_polyforest(
    events: Sequence[Event], delta: int, d: int, windowed: bool = True
) -> Polyforest:
    """Build the cluster forest of ``events``.

    With ``windowed=False`` every component and every earlier vertex is
    scanned for each new event. The windowed scan only visits vertices whose
    timestamp is within ``delta`` of the new event; any component that can
    satisfy rule 1 has its latest vertex in that window, so the two agree.
    """
    events = list(events)
    _check_sorted(events)
    edges: List[Tuple[int, int]] = []
    component_of: List[int] = []
    components: List[Component] = []
    diagnostics: List[str] = []
    lo = 0

    for k, (t, x, y, _p) in enumerate(events):
        if windowed:
            while events[lo].t < t - delta:
                lo += 1
            window = range(lo, k)
        else:
            window = range(0, k)

        # rule 1
        if windowed:
            candidates = sorted({component_of[v] for v in window})
        else:
            candidates = range(len(components))
        same_pixel = [
            c for c in candidates
            if (x, y) in components[c].pixels and t - components[c].max_t <= delta
        ]
        if len(same_pixel) > 1:
            msg = f"event {k}: {len(same_pixel)} components satisfy the same-pixel rule"
            diagnostics.append(msg)
            raise OracleInvariantError(msg)

        target: Optional[int] = same_pixel[0] if same_pixel else None

        # rule 2
        if target is None:
            best_key = None
            for v in window:
                tv, xv, yv, _ = events[v]
                if abs(xv - x) <= d and abs(yv - y) <= d and t - tv <= delta:
                    key = (t - tv, yv, xv, -v)
                    if best_key is None or key < best_key:
                        best_key = key
            if best_key is not None:
                target = component_of[-best_key[3]]

        if target is None:
            comp = Component(root=k)
            components.append(comp)
            target = len(components) - 1
        else:
            comp = components[target]
            edges.append((comp.root, k))
        comp.members.append(k)
        comp.pixels.add((x, y))
        comp.max_t = max(comp.max_t, t)
        component_of.append(target)

    return Polyforest(events, edges, component_of, components, diagnostics)


def component_summaries(forest: Polyforest) -> List[ComponentSummary]:
    """One summary per component, in order of root index."""
    out = []
    for comp in forest.components:
        root = forest.events[comp.root]
        out.append(
            ComponentSummary(
                root.t,
                root.x,
                root.y,
                comp.max_t,
                len(comp.members),
                len(comp.pixels),
            )
        )
    return out


def qualifying_roots(summaries: Sequence[ComponentSummary], n: int, m: int) -> List[ClusterRecord]:
    return [
        ClusterRecord(s.root_t, s.root_x, s.root_y, s.end_t, s.event_count, s.distinct_pixels)
        for s in summaries
        if s.event_count >= n and s.distinct_pixels >= m
    ]


def threshold_indices(forest: Polyforest, n: int, m: int) -> Dict[Tuple[int, int, int], int]:
    """Map root key (t, x, y) -> first event index at which its component
    holds at least ``n`` events over at least ``m`` distinct pixels."""
    out = {}
    for comp in forest.components:
        seen: Set[Tuple[int, int]] = set()
        for count, v in enumerate(comp.members, start=1):
            e = forest.events[v]
            seen.add((e.x, e.y))
            if count >= n and len(seen) >= m:
                root = forest.events[comp.root]
                out[(root.t, root.x, root.y)] = v
                break
    return out


def reference_clusters(events: Sequence[Event], delta: int, d: int, n: int, m: int) -> List[ClusterRecord]:
    return qualifying_roots(component_summaries(build_polyforest(events, delta, d)), n, m)


# -- comparison against the streaming detector --------------------------------

_FIELDS = ("end_t", "event_count", "pixel_count")


@dataclass
class FieldMismatch:
    root: Tuple[int, int, int]
    field: str
    oracle: int
    stream: int


@dataclass
class EquivalenceReport:
    matched: List[Tuple[ClusterRecord, ClusterRecord]]
    oracle_only: List[ClusterRecord]
    stream_only: List[ClusterRecord]
    mismatches: List[FieldMismatch]

    @property
    def is_exact(self) -> bool:
        return not (self.oracle_only or self.stream_only or self.mismatches)

    @property
    def only_pixel_count_differs(self) -> bool:
        return (
            not self.oracle_only
            and not self.stream_only
            and all(mm.field == "pixel_count" for mm in self.mismatches)
        )

    def to_dict(self) -> dict:
        return {
            "exact": self.is_exact,
            "matched": len(self.matched),
            "oracle_only": [r._asdict() for r in self.oracle_only],
            "stream_only": [r._asdict() for r in self.stream_only],
            "mismatches": [
                {"root": list(mm.root), "field": mm.field, "oracle": mm.oracle, "stream": mm.stream}
                for mm in self.mismatches
            ],
        }


def equivalence_report(
    oracle_records: Sequence[ClusterRecord], stream_records: Sequence[ClusterRecord]
) -> EquivalenceReport:
    """Pair records by root (t, x, y) and list every difference.

    The oracle's ``pixel_count`` is its distinct-pixel count; a difference there
    is reported as a field mismatch while the roots still count as matched.
    """
    def key(r: ClusterRecord) -> Tuple[int, int, int]:
        return (r.root_t, r.root_x, r.root_y)

    stream_by_root: Dict[Tuple[int, int, int], ClusterRecord] = {}
    for r in stream_records:
        stream_by_root.setdefault(key(r), r)
    matched = []
    oracle_only = []
    mismatches = []
    used = set()
    for o in oracle_records:
        k = key(o)
        s = stream_by_root.get(k)
        if s is None or k in used:
            oracle_only.append(o)
            continue
        used.add(k)
        matched.append((o, s))
        for name in _FIELDS:
            ov, sv = getattr(o, name), getattr(s, name)
            if ov != sv:
                mismatches.append(FieldMismatch(k, name, ov, sv))
    stream_only = []
    seen = set()
    for s in stream_records:
        k = key(s)
        if k not in used or k in seen:
            stream_only.append(s)
        seen.add(k)
    return EquivalenceReport(matched, oracle_only, stream_only, mismatches)
