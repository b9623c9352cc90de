"""Command-line front end.

Exit codes: 0 success, 1 bad or missing flags, 2 unreadable or invalid input,
3 (verify only) the detector and the reference disagree.
"""

from __future__ import annotations

import argparse
import io
import json
import sys
import time
from dataclasses import asdict, dataclass
from typing import List, Optional, Sequence

from . import bench, eventio, oracle
from .clusterer import StreamClusterer
from .model import ClusterParams, ClusterRecord, Event, SensorGeometry
from .synth import LampConfig, NoiseConfig, gen_lamp, gen_noise, merge_streams

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INPUT = 2
EXIT_MISMATCH = 3


class UsageError(Exception):
    pass


class InputError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # argparse would exit 2
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


@dataclass
class RunSummary:
    events_in: int
    events_after_polarity_filter: int
    rows_emitted: int
    wall_time_us: float
    events_per_second: float


# -- shared helpers -----------------------------------------------------------

def _add_input_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--input", required=True, help="event file (.csv or .evc1)")
    p.add_argument("--format", choices=("csv", "evc1"), help="default: by file extension")
    p.add_argument("--width", type=int)
    p.add_argument("--height", type=int)


def _add_cluster_args(p: argparse.ArgumentParser, polarity_default: str = "both") -> None:
    p.add_argument("--delta-us", type=int, default=2000)
    p.add_argument("--radius", type=int, default=1)
    p.add_argument("--min-events", type=int, default=10)
    p.add_argument("--min-pixels", type=int, default=5)
    p.add_argument("--polarity", choices=("pos", "neg", "both"), default=polarity_default)


def _params(args: argparse.Namespace) -> ClusterParams:
    try:
        return ClusterParams(args.delta_us, args.radius, args.min_events, args.min_pixels)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _load(args: argparse.Namespace) -> List[Event]:
    try:
        return eventio.read_events(args.input, args.format)
    except OSError as exc:
        raise InputError(f"cannot read {args.input}: {exc}") from None
    except (ValueError, UnicodeDecodeError) as exc:
        raise InputError(f"{args.input}: {exc}") from None


def _geometry(args: argparse.Namespace, events: Sequence[Event]) -> SensorGeometry:
    if (args.width is None) != (args.height is None):
        raise UsageError("--width and --height must be given together")
    if args.width is not None:
        try:
            geom = SensorGeometry(args.width, args.height)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
    else:
        geom = SensorGeometry(
            max((e.x for e in events), default=0) + 1,
            max((e.y for e in events), default=0) + 1,
        )
    for k, e in enumerate(events):
        if not geom.contains(e.x, e.y):
            raise InputError(f"event {k} at ({e.x}, {e.y}) outside {geom}")
    return geom


def _check_sorted(events: Sequence[Event]) -> None:
    bad = eventio.validate_monotonic(events)
    if bad is not None:
        raise InputError(
            f"timestamps not sorted: event index {bad} (t={events[bad].t}) "
            f"precedes index {bad - 1} (t={events[bad - 1].t})"
        )


def filter_polarity(events: Sequence[Event], which: str) -> List[Event]:
    if which == "pos":
        return [e for e in events if e.p > 0]
    if which == "neg":
        return [e for e in events if e.p < 0]
    return list(events)


def _write_clusters(path: Optional[str], records: Sequence[ClusterRecord]) -> None:
    if path is None or path == "-":
        buf = io.BytesIO()
        eventio.write_clusters_csv(records, buf)
        sys.stdout.write(buf.getvalue().decode("utf-8"))
        return
    with open(path, "wb") as f:
        eventio.write_clusters_csv(records, f)


def detection_json(det) -> str:
    return json.dumps(
        {"kind": det.freshness.value, "row": det.row_index, "record": det.record._asdict()},
        separators=(",", ":"),
    )


# -- subcommands --------------------------------------------------------------

def cmd_cluster(args: argparse.Namespace) -> int:
    params = _params(args)
    raw = _load(args)
    _check_sorted(raw)
    geom = _geometry(args, raw)
    events = filter_polarity(raw, args.polarity)

    clusterer = StreamClusterer(geom, params)
    det_file = open(args.detections, "w", encoding="utf-8") if args.detections else None
    t0 = time.perf_counter_ns()
    try:
        step = clusterer.process_event
        if det_file is None:
            for e in events:
                step(e)
        else:
            for e in events:
                out = step(e)
                if out.detection is not None:
                    det_file.write(detection_json(out.detection) + "\n")
    finally:
        if det_file is not None:
            det_file.close()
    elapsed_us = (time.perf_counter_ns() - t0) / 1e3

    records = clusterer.results()
    _write_clusters(args.output, records)
    if args.summary:
        summary = RunSummary(
            events_in=len(raw),
            events_after_polarity_filter=len(events),
            rows_emitted=len(records),
            wall_time_us=round(elapsed_us, 1),
            events_per_second=round(len(events) / (elapsed_us / 1e6), 1) if elapsed_us > 0 else 0.0,
        )
        stream = sys.stdout if args.output not in (None, "-") else sys.stderr
        print(json.dumps(asdict(summary)), file=stream)
    return EXIT_OK


def _parse_hot_pixel(text: str):
    try:
        x, y, rate = text.split(",")
        return (int(x), int(y)), float(rate)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected X,Y,RATE, got {text!r}") from None


def cmd_synth(args: argparse.Namespace) -> int:
    try:
        geom = SensorGeometry(args.width, args.height)
        streams = []
        lamp_duration = 0
        if args.signal == "lamp":
            cfg = LampConfig(
                frequency=args.freq,
                periods=args.periods,
                events_per_burst=args.events_per_burst,
                burst_width=args.burst_width_us,
                roi_center=(args.roi_x, args.roi_y),
                roi_radius=args.roi_radius,
                geometry=geom,
                seed=args.seed,
            )
            streams.append(gen_lamp(cfg))
            lamp_duration = round(cfg.periods * cfg.period_us)
        for (x, y), _rate in args.hot_pixel:
            if not geom.contains(x, y):
                raise ValueError(f"hot pixel ({x}, {y}) outside {geom}")
        duration = args.duration_us if args.duration_us is not None else lamp_duration
        if args.hot_pixel or args.background_rate > 0:
            streams.append(
                gen_noise(NoiseConfig(tuple(args.hot_pixel), args.background_rate, duration, geom, args.seed))
            )
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    events = merge_streams(streams)
    try:
        eventio.write_events(args.out, events, args.format)
    except OSError as exc:
        raise InputError(f"cannot write {args.out}: {exc}") from None
    return EXIT_OK


def cmd_verify(args: argparse.Namespace) -> int:
    params = _params(args)
    raw = _load(args)
    _check_sorted(raw)
    geom = _geometry(args, raw)
    events = filter_polarity(raw, args.polarity)

    stream_records = StreamClusterer(geom, params).run(events)
    ref = oracle.reference_clusters(events, params.delta, params.d, params.n, params.m)
    report = oracle.equivalence_report(ref, stream_records)
    print(json.dumps(report.to_dict()))
    code = verify_exit_code(report, args.allow_pixel_count_divergence)
    if code == EXIT_OK and not report.is_exact:
        for mm in report.mismatches:
            print(
                f"warning: root {tuple(mm.root)} pixel_count {mm.stream} "
                f"vs {mm.oracle} distinct pixels",
                file=sys.stderr,
            )
    return code


def verify_exit_code(report: oracle.EquivalenceReport, allow_pixel_count_divergence: bool) -> int:
    if report.is_exact:
        return EXIT_OK
    if allow_pixel_count_divergence and report.only_pixel_count_differs:
        return EXIT_OK
    return EXIT_MISMATCH


def _int_list(text: str) -> List[int]:
    try:
        return [int(float(v)) for v in text.split(",") if v]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _geom_list(text: str) -> List[SensorGeometry]:
    try:
        return [SensorGeometry.parse(v) for v in text.split(",") if v]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def cmd_bench(args: argparse.Namespace) -> int:
    counts = [n for group in args.events for n in group] or [100_000]
    geoms = [g for group in args.geometry for g in group] or [SensorGeometry(128, 128)]
    if args.repeat < 1:
        raise UsageError("--repeat must be >= 1")
    try:
        rows = bench.sweep(counts, geoms, repeat=args.repeat, seed=args.seed)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    lines = [bench.BenchRow.HEADER] + [r.csv() for r in rows]
    text = "\n".join(lines) + "\n"
    if args.output:
        with open(args.output, "w", encoding="utf-8") as f:
            f.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _roi(text: str):
    try:
        x0, y0, x1, y1 = (int(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected X0,Y0,X1,Y1, got {text!r}") from None
    return x0, y0, x1, y1


def cmd_plot_data(args: argparse.Namespace) -> int:
    params = _params(args)
    raw = _load(args)
    _check_sorted(raw)
    geom = _geometry(args, raw)
    events = filter_polarity(raw, args.polarity)
    roots = {(r.root_t, r.root_x, r.root_y) for r in StreamClusterer(geom, params).run(events)}

    # Mark the first event (in file order, among the clustered polarity) that
    # matches each root.
    keep = {"pos": (1,), "neg": (-1,), "both": (1, -1)}[args.polarity]
    lines = ["t,x,y,p,is_root"]
    for t, x, y, p in raw:
        is_root = 0
        if p in keep and (t, x, y) in roots:
            roots.discard((t, x, y))
            is_root = 1
        if args.roi is not None:
            x0, y0, x1, y1 = args.roi
            if not (x0 <= x <= x1 and y0 <= y <= y1):
                continue
        lines.append(f"{t},{x},{y},{p},{is_root}")
    text = "\n".join(lines) + "\n"
    if args.output:
        with open(args.output, "w", encoding="utf-8") as f:
            f.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


# -- parser -------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="evcluster", description="Streaming event-camera cluster root detection.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("cluster", help="run the detector on an event file")
    _add_input_args(p)
    _add_cluster_args(p)
    p.add_argument("--output", help="clusters CSV (default: stdout)")
    p.add_argument("--detections", help="JSON-lines file of detections as they fire")
    p.add_argument("--summary", action="store_true", help="print a run summary as JSON")
    p.set_defaults(func=cmd_cluster)

    p = sub.add_parser("synth", help="write a synthetic event stream")
    p.add_argument("--signal", choices=("lamp", "none"), default="lamp")
    p.add_argument("--freq", type=float, default=100.0)
    p.add_argument("--periods", type=int, default=10)
    p.add_argument("--events-per-burst", type=int, default=40)
    p.add_argument("--burst-width-us", type=int, default=1500)
    p.add_argument("--roi-x", type=int, default=32)
    p.add_argument("--roi-y", type=int, default=32)
    p.add_argument("--roi-radius", type=int, default=3)
    p.add_argument("--width", type=int, default=64)
    p.add_argument("--height", type=int, default=64)
    p.add_argument("--hot-pixel", type=_parse_hot_pixel, action="append", default=[],
                   metavar="X,Y,RATE")
    p.add_argument("--background-rate", type=float, default=0.0, help="events/s per pixel")
    p.add_argument("--duration-us", type=int, help="noise duration (default: lamp duration)")
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--format", choices=("csv", "evc1"))
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("verify", help="compare the detector against the brute-force reference")
    _add_input_args(p)
    _add_cluster_args(p)
    p.add_argument("--allow-pixel-count-divergence", action="store_true")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("bench", help="measure per-event cost")
    p.add_argument("--events", type=_int_list, action="append", default=[],
                   help="comma-separated event counts (repeatable)")
    p.add_argument("--geometry", type=_geom_list, action="append", default=[],
                   help="comma-separated WxH list (repeatable)")
    p.add_argument("--repeat", type=int, default=3)
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--output")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("plot-data", help="export events with root markers for 3-D scatter plots")
    _add_input_args(p)
    _add_cluster_args(p, polarity_default="pos")
    p.add_argument("--roi", type=_roi, metavar="X0,Y0,X1,Y1", help="inclusive pixel window")
    p.add_argument("--output")
    p.set_defaults(func=cmd_plot_data)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"evcluster {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except InputError as exc:
        print(f"evcluster {args.command}: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except OSError as exc:
        print(f"evcluster {args.command}: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
