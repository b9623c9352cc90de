"""Event stream and cluster output serialization.

Two event formats:

* CSV: UTF-8 lines ``t,x,y,p`` with an optional ``t_us,x,y,p`` header line.
* EVC1: the 4 magic bytes ``EVC1`` followed by 16-byte little-endian records
  (u64 timestamp, u16 x, u16 y, i8 polarity, 3 zero pad bytes).

Readers keep file order exactly; they never sort, dedupe, or drop events.
"""

from __future__ import annotations

import io
import os
import struct
from dataclasses import dataclass
from typing import BinaryIO, Iterable, List, Optional, Sequence, Union

from .model import MAX_TIMESTAMP, ClusterRecord, Event, SensorGeometry

EVENTS_CSV_HEADER = "t_us,x,y,p"
CLUSTERS_CSV_HEADER = "root_t_us,root_x,root_y,end_t_us,event_count,pixel_count"
MAGIC = b"EVC1"
_RECORD = struct.Struct("<QHHb3s")
_PAD = b"\x00\x00\x00"
_U16_MAX = 0xFFFF

PathLike = Union[str, "os.PathLike[str]"]


class EventFormatError(ValueError):
    """Malformed event data; ``line`` (CSV, 1-based) or ``record`` (EVC1, 0-based) locates it."""

    def __init__(self, msg: str, line: Optional[int] = None, record: Optional[int] = None) -> None:
        if line is not None:
            msg = f"line {line}: {msg}"
        elif record is not None:
            msg = f"record {record}: {msg}"
        super().__init__(msg)
        self.line = line
        self.record = record


@dataclass(frozen=True)
class EventFileHeaderInfo:
    format: str
    geometry: Optional[SensorGeometry] = None


def read_events_csv(stream: BinaryIO) -> List[Event]:
    text = stream.read().decode("utf-8")
    events = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line:
            continue
        if lineno == 1 and line.replace(" ", "") == EVENTS_CSV_HEADER:
            continue
        parts = line.split(",")
        if len(parts) != 4:
            raise EventFormatError(f"expected 4 fields t,x,y,p, got {len(parts)}", line=lineno)
        try:
            t, x, y, p = (int(f) for f in parts)
        except ValueError:
            raise EventFormatError(f"non-integer field in {line!r}", line=lineno) from None
        if t < 0 or x < 0 or y < 0:
            raise EventFormatError("negative field", line=lineno)
        if t > MAX_TIMESTAMP:
            raise EventFormatError("timestamp exceeds 64 bits", line=lineno)
        if p not in (1, -1):
            raise EventFormatError(f"polarity must be 1 or -1, got {p}", line=lineno)
        events.append(Event(t, x, y, p))
    return events


def write_events_csv(events: Iterable[Event], stream: BinaryIO) -> None:
    buf = io.StringIO()
    buf.write(EVENTS_CSV_HEADER + "\n")
    for t, x, y, p in events:
        buf.write(f"{t},{x},{y},{p}\n")
    stream.write(buf.getvalue().encode("utf-8"))


def read_events_binary(stream: BinaryIO) -> List[Event]:
    data = stream.read()
    if data[:4] != MAGIC:
        raise EventFormatError(f"bad magic {data[:4]!r}, expected {MAGIC!r}")
    body = memoryview(data)[4:]
    n, rem = divmod(len(body), _RECORD.size)
    if rem:
        raise EventFormatError(f"truncated record ({rem} trailing bytes)", record=n)
    events = []
    for k, (t, x, y, p, pad) in enumerate(_RECORD.iter_unpack(body)):
        if pad != _PAD:
            raise EventFormatError("nonzero pad bytes", record=k)
        if p not in (1, -1):
            raise EventFormatError(f"polarity must be 1 or -1, got {p}", record=k)
        events.append(Event(t, x, y, p))
    return events


def write_events_binary(events: Iterable[Event], stream: BinaryIO) -> None:
    out = bytearray(MAGIC)
    pack = _RECORD.pack
    for k, (t, x, y, p) in enumerate(events):
        if not (0 <= t <= MAX_TIMESTAMP and 0 <= x <= _U16_MAX and 0 <= y <= _U16_MAX):
            raise EventFormatError("field out of range for EVC1", record=k)
        if p not in (1, -1):
            raise EventFormatError(f"polarity must be 1 or -1, got {p}", record=k)
        out += pack(t, x, y, p, _PAD)
    stream.write(bytes(out))


def validate_monotonic(events: Sequence[Event]) -> Optional[int]:
    """Index of the first event older than its predecessor, or None if sorted."""
    for k in range(1, len(events)):
        if events[k].t < events[k - 1].t:
            return k
    return None


def write_clusters_csv(records: Iterable[ClusterRecord], stream: BinaryIO) -> None:
    lines = [CLUSTERS_CSV_HEADER]
    lines.extend(",".join(str(v) for v in r) for r in records)
    stream.write(("\n".join(lines) + "\n").encode("utf-8"))


def read_clusters_csv(stream: BinaryIO) -> List[ClusterRecord]:
    rows = stream.read().decode("utf-8").splitlines()
    if not rows or rows[0].strip() != CLUSTERS_CSV_HEADER:
        raise EventFormatError("missing clusters CSV header", line=1)
    return [ClusterRecord(*(int(v) for v in r.split(","))) for r in rows[1:] if r.strip()]


def detect_format(path: PathLike, explicit: Optional[str] = None) -> str:
    if explicit:
        if explicit not in ("csv", "evc1"):
            raise ValueError(f"unknown event format {explicit!r}")
        return explicit
    ext = os.path.splitext(os.fspath(path))[1].lower()
    if ext in (".evc1", ".evc", ".bin"):
        return "evc1"
    return "csv"


def read_events(path: PathLike, fmt: Optional[str] = None) -> List[Event]:
    fmt = detect_format(path, fmt)
    with open(path, "rb") as f:
        return read_events_binary(f) if fmt == "evc1" else read_events_csv(f)


def write_events(path: PathLike, events: Iterable[Event], fmt: Optional[str] = None) -> None:
    fmt = detect_format(path, fmt)
    with open(path, "wb") as f:
        if fmt == "evc1":
            write_events_binary(events, f)
        else:
            write_events_csv(events, f)
