"""Command-line surface: classify traces, reformat reports, build trend
tables and top-sender tables, and generate synthetic traces.

Exit codes: 0 success, 1 usage error, 2 runtime error. All randomness is
seeded and recorded in report metadata, so identical invocations produce
byte-identical outputs.
"""

from __future__ import annotations

import argparse
import functools
import sys
from pathlib import Path

from . import __version__
from .classify import DEFAULT_APPLETALK_TLDS, StreamTally, classify_stream
from .ingest import IngestError, IngestStats, read_pcap, read_tsv, sample, window
from .names import NameParseError
from .report import (
    POLICIES,
    Report,
    TopCategory,
    empty_query_stats,
    fold,
    merge,
    read_report_doc,
    top_senders,
    trend_csv_from_docs,
    write_report,
)
from .synth import (
    MixSpecError,
    generate,
    load_mixspec,
    preset_years,
    write_tsv,
    year_mix,
)
from .tlds import RegistryError, default_registry, load_registry_path


class _Parser(argparse.ArgumentParser):
    """argparse flavor exiting 1 (not 2) on usage errors."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _parse_window(text: str) -> tuple[int, int]:
    try:
        start_s, end_s = text.split("-")
        sh, sm = (int(x) for x in start_s.split(":"))
        eh, em = (int(x) for x in end_s.split(":"))
    except ValueError:
        raise ValueError(f"bad window {text!r}, expected HH:MM-HH:MM") from None
    return sh * 3600 + sm * 60, eh * 3600 + em * 60


def _parse_day_origin(text: str) -> int:
    from datetime import datetime, timezone

    if text.isdigit():
        return int(text) * 1_000_000
    dt = datetime.strptime(text, "%Y-%m-%d").replace(tzinfo=timezone.utc)
    return int(dt.timestamp()) * 1_000_000


def _add_ingest_options(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--in", dest="inputs", nargs="+", action="extend", required=True,
                     metavar="PATH", help="input trace file(s); multiple inputs are merged")
    sub.add_argument("--format", choices=("tsv", "pcap"), default="tsv")
    sub.add_argument("--tld-list", metavar="PATH",
                     help="TLD registry file (default: $ROOTTRACE_TLDS or the pinned snapshot)")
    sub.add_argument("--appletalk", default="appletalk", metavar="TLDS",
                     help="comma-separated TLDs treated as appletalk leakage")
    sub.add_argument("--sample-rate", type=float, default=1.0)
    sub.add_argument("--seed", type=int, default=0, help="sampling seed")
    sub.add_argument("--window", metavar="HH:MM-HH:MM",
                     help="keep a time-of-day window (requires --day-origin)")
    sub.add_argument("--day-origin", metavar="DATE",
                     help="UTC day start for --window: ISO date or epoch seconds")
    sub.add_argument("--label", default="", help="report label, e.g. a year")
    sub.add_argument("--out", required=True, metavar="PATH")


def build_parser() -> _Parser:
    parser = _Parser(prog="roottrace",
                     description="Classify and aggregate DNS root-server query traces.")
    parser.add_argument("--version", action="version", version=f"roottrace {__version__}")
    commands = parser.add_subparsers(dest="command", required=True)

    p = commands.add_parser("classify", help="ingest, classify and fold a trace into a JSON report")
    _add_ingest_options(p)
    p.add_argument("--policy", choices=sorted(POLICIES), default="default",
                   help="unexpected-traffic rollup policy")
    p.add_argument("--top-k", type=int, default=10, help="sender table size in the report")
    p.add_argument("--no-senders", action="store_true", help="skip per-sender tables")
    p.set_defaults(func=_cmd_classify)

    p = commands.add_parser("report", help="reformat an existing JSON report")
    p.add_argument("--in", dest="inputs", nargs=1, action="extend", required=True, metavar="PATH")
    p.add_argument("--format", choices=("json", "csv", "plotdata"), default="csv")
    p.add_argument("--out", required=True, metavar="PATH")
    p.set_defaults(func=_cmd_report)

    p = commands.add_parser("top-senders", help="classify a trace and emit the top-sender table")
    _add_ingest_options(p)
    p.add_argument("-k", type=int, default=10, help="number of senders")
    p.add_argument("--empty", action="store_true",
                   help="rank senders of root-name queries instead of all queries")
    p.set_defaults(func=_cmd_top_senders)

    p = commands.add_parser("trend", help="merge labelled JSON reports into a trend CSV")
    p.add_argument("--in", dest="inputs", nargs="+", action="extend", required=True, metavar="PATH")
    p.add_argument("--out", required=True, metavar="PATH")
    p.set_defaults(func=_cmd_trend)

    p = commands.add_parser("gen", help="generate a seeded synthetic trace")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--spec", metavar="PATH", help="mix spec file")
    group.add_argument("--preset", type=int, choices=preset_years(), metavar="YEAR",
                       help="published year mix (2013-2022)")
    p.add_argument("--count", type=int, required=True, metavar="N")
    p.add_argument("--seed", type=int, help="override the spec seed")
    p.add_argument("--tld-list", metavar="PATH")
    p.add_argument("--appletalk", default="appletalk", metavar="TLDS")
    p.add_argument("--out", required=True, metavar="PATH")
    p.add_argument("--truth-out", metavar="PATH",
                   help="also write one ground-truth leaf line per record")
    p.set_defaults(func=_cmd_gen)

    return parser


def _registry_for(args) -> "TldRegistry":
    if getattr(args, "tld_list", None):
        return load_registry_path(args.tld_list)
    return default_registry()


def _appletalk_set(args) -> frozenset:
    tlds = frozenset(t.strip().lower() for t in args.appletalk.split(",") if t.strip())
    return tlds or DEFAULT_APPLETALK_TLDS


def _ingest_report(args, parser, track_senders: bool = True) -> tuple[Report, dict]:
    if args.window and not args.day_origin:
        parser.error("--window requires --day-origin")
    if args.sample_rate is not None and not 0 < args.sample_rate <= 1:
        parser.error("--sample-rate must be in (0, 1]")
    try:
        win = _parse_window(args.window) if args.window else None
        origin = _parse_day_origin(args.day_origin) if args.day_origin else None
    except ValueError as exc:
        parser.error(str(exc))
    registry = _registry_for(args)
    appletalk = _appletalk_set(args)

    shards = []
    dropped = 0
    for path in args.inputs:
        stats = IngestStats()
        tally = StreamTally()
        with open(path, "rb") as fh:
            records = read_pcap(fh, stats) if args.format == "pcap" else read_tsv(fh, stats)
            if args.sample_rate < 1:
                records = sample(records, args.sample_rate, args.seed)
            if win:
                records = window(records, win[0], win[1], origin)
            pairs = classify_stream(records, registry, appletalk, tally)
            shards.append(fold(pairs, label=args.label, track_senders=track_senders))
        dropped += stats.records_dropped_unparseable + tally.unparseable

    report = functools.reduce(merge, shards)
    report.dropped += dropped
    meta = {
        "tool": f"roottrace {__version__}",
        "inputs": list(args.inputs),
        "format": args.format,
        "sample_rate": args.sample_rate,
        "seed": args.seed,
        "window": args.window,
        "day_origin": args.day_origin,
        "registry": registry.source_description,
        "appletalk": sorted(appletalk),
    }
    return report, meta


def _cmd_classify(args, parser) -> int:
    report, meta = _ingest_report(args, parser, track_senders=not args.no_senders)
    if args.top_k < 1:
        parser.error("--top-k must be positive")
    data = write_report(report, "json", meta=meta, policy=POLICIES[args.policy], top_k=args.top_k)
    Path(args.out).write_bytes(data)
    return 0


def _cmd_report(args, parser) -> int:
    doc = read_report_doc(Path(args.inputs[0]).read_bytes())
    from .report import doc_to_csv, doc_to_json_bytes, doc_to_plotdata

    emit = {"json": doc_to_json_bytes, "csv": doc_to_csv, "plotdata": doc_to_plotdata}[args.format]
    Path(args.out).write_bytes(emit(doc))
    return 0


def _cmd_top_senders(args, parser) -> int:
    if args.k < 1:
        parser.error("-k must be positive")
    report, _ = _ingest_report(args, parser)
    lines = []
    if args.empty:
        lines.append("prefix,total,qtypes")
        for row in empty_query_stats(report, k=args.k).top:
            qtypes = ";".join(f"{m}={n}" for m, n in sorted(row.qtypes.items()))
            lines.append(f"{row.prefix.prefix},{row.total},{qtypes}")
    else:
        lines.append("prefix,total,empty,one_word,invalid_tld,valid_tld")
        for row in top_senders(report, args.k):
            cats = row.categories
            lines.append(
                f"{row.prefix.prefix},{row.total},{cats[TopCategory.EMPTY]},"
                f"{cats[TopCategory.ONE_WORD]},{cats[TopCategory.INVALID_TLD]},"
                f"{cats[TopCategory.VALID_TLD]}"
            )
    Path(args.out).write_text("\n".join(lines) + "\n", encoding="utf-8")
    return 0


def _cmd_trend(args, parser) -> int:
    docs = [read_report_doc(Path(path).read_bytes()) for path in args.inputs]
    Path(args.out).write_text(trend_csv_from_docs(docs), encoding="utf-8")
    return 0


def _cmd_gen(args, parser) -> int:
    if args.count < 0:
        parser.error("--count must be non-negative")
    spec = load_mixspec(args.spec) if args.spec else year_mix(args.preset)
    if args.seed is not None:
        spec.seed = args.seed
    registry = _registry_for(args)
    appletalk = _appletalk_set(args)
    pairs = generate(spec, args.count, registry, appletalk)

    truth_fh = open(args.truth_out, "w", encoding="utf-8") if args.truth_out else None
    try:
        with open(args.out, "wb") as out:
            if truth_fh is None:
                write_tsv((rec for rec, _ in pairs), out)
            else:
                for rec, cls in pairs:
                    write_tsv((rec,), out)
                    truth_fh.write(f"{cls.leaf.value}\t{cls.tld or ''}\t{int(cls.chromium_like)}\n")
    finally:
        if truth_fh is not None:
            truth_fh.close()
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args, parser)
    except (IngestError, RegistryError, MixSpecError, NameParseError) as exc:
        print(f"roottrace: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"roottrace: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"roottrace: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
