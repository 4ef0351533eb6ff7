"""Mergeable aggregates over classified query streams.

A Report is a bag of exact integer counters; fractions are derived from
the integers only at output time, so merging shards never drifts. fold()
builds one, merge() combines any number of them, and the accessor
functions compute every table and series the report formats expose.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Optional

from .model import (
    CLS_EMPTY,
    LEAF_TOP,
    Classification,
    Leaf,
    QueryRecord,
    SenderKey,
    TopCategory,
    qtype_mnemonic,
    sender_prefix,
)

QMIN_NAMED_TLDS = ("com", "net", "org")


@dataclass
class Report:
    """Aggregate counts for one labelled slice of traffic (e.g. a year)."""

    label: str = ""
    total: int = 0
    leaf_counts: Counter = field(default_factory=Counter)  # Classification -> n
    qtype_counts: Counter = field(default_factory=Counter)  # mnemonic -> n
    sender_counts: dict = field(default_factory=dict)  # SenderKey -> Counter[Leaf]
    empty_by_sender: dict = field(default_factory=dict)  # SenderKey -> Counter[mnemonic]
    dropped: int = 0
    senders_tracked: bool = True


def fold(
    classified: Iterable[tuple[QueryRecord, Classification]],
    label: str = "",
    dropped: int = 0,
    track_senders: bool = True,
) -> Report:
    """Count every classified record exactly once into a fresh Report."""
    leaf_counts: dict = {}
    qtype_ints: dict = {}
    senders: dict = {}
    empties: dict = {}
    total = 0
    empty_leaf = Leaf.EMPTY

    for record, cls in classified:
        total += 1
        try:
            leaf_counts[cls] += 1
        except KeyError:
            leaf_counts[cls] = 1
        qtype = record.qtype
        try:
            qtype_ints[qtype] += 1
        except KeyError:
            qtype_ints[qtype] = 1
        if track_senders:
            src = record.source
            if ":" in src:
                prefix = sender_prefix(src)
            else:
                second = src.find(".", src.find(".") + 1)
                if second < 0:
                    raise ValueError(f"not an IP address: {src!r}")
                prefix = src[:second] + ".0.0/16"
            leaf = cls.leaf
            by_leaf = senders.get(prefix)
            if by_leaf is None:
                senders[prefix] = {leaf: 1}
            else:
                try:
                    by_leaf[leaf] += 1
                except KeyError:
                    by_leaf[leaf] = 1
            if leaf is empty_leaf:
                by_qtype = empties.get(prefix)
                if by_qtype is None:
                    empties[prefix] = {qtype: 1}
                else:
                    try:
                        by_qtype[qtype] += 1
                    except KeyError:
                        by_qtype[qtype] = 1

    mnemonics = {code: qtype_mnemonic(code) for code in qtype_ints}
    return Report(
        label=label,
        total=total,
        leaf_counts=Counter(leaf_counts),
        qtype_counts=Counter({mnemonics[c]: n for c, n in qtype_ints.items()}),
        sender_counts={
            SenderKey(p): Counter(d) for p, d in senders.items()
        },
        empty_by_sender={
            SenderKey(p): Counter({mnemonics[c]: n for c, n in d.items()})
            for p, d in empties.items()
        },
        dropped=dropped,
        senders_tracked=track_senders,
    )


def _merge_labels(a: str, b: str) -> str:
    parts = set(a.split("+")) | set(b.split("+"))
    parts.discard("")
    return "+".join(sorted(parts))


def _merge_sender_tables(a: dict, b: dict) -> dict:
    out: dict = {}
    for table in (a, b):
        for key, counts in table.items():
            acc = out.get(key)
            if acc is None:
                out[key] = Counter(counts)
            else:
                acc.update(counts)
    return out


def merge(a: Report, b: Report) -> Report:
    """Pointwise sum of two Reports; commutative, associative, and the
    empty Report is the identity."""
    tracked = a.senders_tracked and b.senders_tracked
    return Report(
        label=_merge_labels(a.label, b.label),
        total=a.total + b.total,
        leaf_counts=a.leaf_counts + b.leaf_counts,
        qtype_counts=a.qtype_counts + b.qtype_counts,
        sender_counts=_merge_sender_tables(a.sender_counts, b.sender_counts) if tracked else {},
        empty_by_sender=_merge_sender_tables(a.empty_by_sender, b.empty_by_sender) if tracked else {},
        dropped=a.dropped + b.dropped,
        senders_tracked=tracked,
    )


def top_category_counts(report: Report) -> dict[TopCategory, int]:
    counts = {cat: 0 for cat in TopCategory}
    for cls, n in report.leaf_counts.items():
        counts[LEAF_TOP[cls.leaf]] += n
    return counts


def top_level_fractions(report: Report) -> dict[TopCategory, float]:
    """The four-category rollup as fractions of the report total."""
    if report.total == 0:
        raise ValueError("empty report has no fractions")
    total = report.total
    return {cat: n / total for cat, n in top_category_counts(report).items()}


@dataclass
class TopSender:
    prefix: SenderKey
    total: int
    categories: dict  # TopCategory -> int


def top_senders(report: Report, k: int) -> list[TopSender]:
    """The k busiest sender prefixes, descending; ties break on prefix."""
    if k < 1:
        raise ValueError("k must be positive")
    if not report.senders_tracked:
        raise ValueError("sender tracking was disabled for this report")
    rows = []
    for key, by_leaf in report.sender_counts.items():
        categories = {cat: 0 for cat in TopCategory}
        for leaf, n in by_leaf.items():
            categories[LEAF_TOP[leaf]] += n
        rows.append(TopSender(key, sum(by_leaf.values()), categories))
    rows.sort(key=lambda r: (-r.total, r.prefix.prefix))
    return rows[:k]


@dataclass
class EmptySender:
    prefix: SenderKey
    total: int
    qtypes: dict  # mnemonic -> int


@dataclass
class EmptyQueryStats:
    total: int
    sender_count: int
    mean_per_sender: Optional[float]  # absent when no empty queries
    qtype_fractions: dict  # mnemonic -> fraction of empty queries
    top: list  # list[EmptySender]


def empty_query_stats(report: Report, k: int = 10) -> EmptyQueryStats:
    """Priming-oriented view: who sends root-name queries, and of what type."""
    if not report.senders_tracked:
        raise ValueError("sender tracking was disabled for this report")
    total = report.leaf_counts.get(CLS_EMPTY, 0)
    senders = report.empty_by_sender
    qtype_totals: Counter = Counter()
    rows = []
    for key, by_qtype in senders.items():
        n = sum(by_qtype.values())
        qtype_totals.update(by_qtype)
        rows.append(EmptySender(key, n, dict(by_qtype)))
    rows.sort(key=lambda r: (-r.total, r.prefix.prefix))
    mean = total / len(senders) if senders else None
    fractions = {m: n / total for m, n in sorted(qtype_totals.items())} if total else {}
    return EmptyQueryStats(
        total=total,
        sender_count=len(senders),
        mean_per_sender=mean,
        qtype_fractions=fractions,
        top=rows[:k],
    )


def chromium_series(reports: Iterable[Report]) -> list[tuple[str, float, float]]:
    """Per-report probe fractions: (label, no-TLD fraction, with-TLD fraction).

    with-TLD pools probe-shaped names that gained a valid TLD and the
    probe-shaped invalid-TLD leaf.
    """
    out = []
    for report in reports:
        no_tld = 0
        with_tld = 0
        for cls, n in report.leaf_counts.items():
            if cls.leaf is Leaf.ONE_WORD_CHROMIUM:
                no_tld += n
            elif cls.leaf is Leaf.INVALID_CHROMIUM or (cls.leaf is Leaf.VALID_TLD and cls.chromium_like):
                with_tld += n
        if report.total:
            out.append((report.label, no_tld / report.total, with_tld / report.total))
        else:
            out.append((report.label, 0.0, 0.0))
    return out


def qmin_series(reports: Iterable[Report]) -> list[tuple[str, dict[str, float]]]:
    """Per-report minimized-query fractions bucketed com/net/org/other."""
    out = []
    for report in reports:
        buckets = {tld: 0 for tld in QMIN_NAMED_TLDS}
        buckets["other"] = 0
        for cls, n in report.leaf_counts.items():
            if cls.leaf is Leaf.ONE_WORD_MINIMIZED:
                buckets[cls.tld if cls.tld in buckets else "other"] += n
        total = report.total
        out.append((report.label, {k: (v / total if total else 0.0) for k, v in buckets.items()}))
    return out


@dataclass(frozen=True)
class UnexpectedPolicy:
    """A named predicate over leaves defining 'unexpected' traffic."""

    name: str
    leaves: frozenset


DEFAULT_POLICY = UnexpectedPolicy(
    "default",
    frozenset(
        leaf
        for leaf in Leaf
        if leaf not in (Leaf.VALID_TLD, Leaf.ONE_WORD_MINIMIZED)
    ),
)

INVALID_ONLY_POLICY = UnexpectedPolicy(
    "invalid-only",
    frozenset(leaf for leaf in Leaf if LEAF_TOP[leaf] is TopCategory.INVALID_TLD),
)

POLICIES = {p.name: p for p in (DEFAULT_POLICY, INVALID_ONLY_POLICY)}


def unexpected_fraction(report: Report, policy: UnexpectedPolicy = DEFAULT_POLICY) -> float:
    """Fraction of classified queries the policy marks unexpected."""
    if report.total == 0:
        return 0.0
    hits = sum(n for cls, n in report.leaf_counts.items() if cls.leaf in policy.leaves)
    return hits / report.total


@dataclass
class TrendTable:
    """Ordered per-label rollup rows, one per Report."""

    rows: list  # list[tuple[str, dict[TopCategory, float]]]


def trend_table(reports: Iterable[Report]) -> TrendTable:
    return TrendTable([(r.label, top_level_fractions(r)) for r in reports])


TREND_HEADER = "label,empty,one_word,invalid_tld,valid_tld"


def trend_to_csv(table: TrendTable) -> str:
    lines = [TREND_HEADER]
    for label, fractions in table.rows:
        lines.append(
            ",".join(
                [label]
                + [str(fractions[cat]) for cat in (TopCategory.EMPTY, TopCategory.ONE_WORD, TopCategory.INVALID_TLD, TopCategory.VALID_TLD)]
            )
        )
    return "\n".join(lines) + "\n"


# --- report documents -------------------------------------------------------
#
# JSON schema (stable key order, deterministic bytes):
#   meta, totals, leaves, qtypes, senders, empty_stats, policy


def build_report_doc(
    report: Report,
    meta: Optional[dict] = None,
    policy: UnexpectedPolicy = DEFAULT_POLICY,
    top_k: int = 10,
) -> dict:
    minimized_by_tld: Counter = Counter()
    valid_by_tld: Counter = Counter()
    invalid_other_by_tld: Counter = Counter()
    scalar = Counter()
    valid_chromium_like = 0
    for cls, n in report.leaf_counts.items():
        leaf = cls.leaf
        if leaf is Leaf.ONE_WORD_MINIMIZED:
            minimized_by_tld[cls.tld] += n
        elif leaf is Leaf.VALID_TLD:
            valid_by_tld[cls.tld] += n
            if cls.chromium_like:
                valid_chromium_like += n
        elif leaf is Leaf.INVALID_OTHER:
            invalid_other_by_tld[cls.tld] += n
        scalar[leaf] += n

    doc_meta = dict(meta or {})
    doc_meta.setdefault("label", report.label)
    doc_meta.setdefault("senders_tracked", report.senders_tracked)

    totals: dict = {
        "records": report.total,
        "dropped_unparseable": report.dropped,
    }
    if report.total:
        totals["fractions"] = {
            cat.value: frac for cat, frac in top_level_fractions(report).items()
        }

    leaves = {
        "empty": scalar[Leaf.EMPTY],
        "one_word": {
            "minimized": {
                "total": scalar[Leaf.ONE_WORD_MINIMIZED],
                "by_tld": dict(sorted(minimized_by_tld.items())),
            },
            "chromium": scalar[Leaf.ONE_WORD_CHROMIUM],
            "other": scalar[Leaf.ONE_WORD_OTHER],
        },
        "has_tld": {
            "valid": {
                "total": scalar[Leaf.VALID_TLD],
                "chromium_like": valid_chromium_like,
                "by_tld": dict(sorted(valid_by_tld.items())),
            },
            "invalid": {
                "appletalk": scalar[Leaf.INVALID_APPLETALK],
                "bad_encoding": scalar[Leaf.INVALID_BAD_ENCODING],
                "all_numeric": scalar[Leaf.INVALID_ALL_NUMERIC],
                "chromium": scalar[Leaf.INVALID_CHROMIUM],
                "other": {
                    "total": scalar[Leaf.INVALID_OTHER],
                    "by_tld": dict(sorted(invalid_other_by_tld.items())),
                },
            },
        },
    }

    senders: dict = {"tracked": report.senders_tracked}
    if report.senders_tracked:
        senders["count"] = len(report.sender_counts)
        senders["top"] = [
            {
                "prefix": row.prefix.prefix,
                "total": row.total,
                "categories": {cat.value: n for cat, n in row.categories.items()},
            }
            for row in top_senders(report, top_k)
        ]

        stats = empty_query_stats(report, k=top_k)
        empty_stats = {
            "total": stats.total,
            "senders": stats.sender_count,
            "mean_per_sender": stats.mean_per_sender,
            "qtype_fractions": stats.qtype_fractions,
            "top": [
                {"prefix": row.prefix.prefix, "total": row.total, "qtypes": dict(sorted(row.qtypes.items()))}
                for row in stats.top
            ],
        }
    else:
        empty_stats = {"total": report.leaf_counts.get(CLS_EMPTY, 0)}

    return {
        "meta": doc_meta,
        "totals": totals,
        "leaves": leaves,
        "qtypes": dict(sorted(report.qtype_counts.items())),
        "senders": senders,
        "empty_stats": empty_stats,
        "policy": {
            "name": policy.name,
            "unexpected_leaves": sorted(leaf.value for leaf in policy.leaves),
            "unexpected_fraction": unexpected_fraction(report, policy),
        },
    }


def doc_to_json_bytes(doc: dict) -> bytes:
    return (json.dumps(doc, sort_keys=True, indent=2) + "\n").encode("utf-8")


def doc_to_csv(doc: dict) -> bytes:
    fractions = doc["totals"].get("fractions")
    label = doc["meta"].get("label", "")
    if fractions is None:
        row = f"{label},0,0,0,0"
    else:
        row = ",".join(
            [label] + [str(fractions[c]) for c in ("empty", "one_word", "invalid_tld", "valid_tld")]
        )
    return (TREND_HEADER + "\n" + row + "\n").encode("utf-8")


def _flatten(prefix: str, table: dict, lines: list) -> None:
    for key, value in table.items():
        lines.append(f"{prefix}\t{key}\t{value}")


def doc_to_plotdata(doc: dict) -> bytes:
    """Plain TSV series blocks for external plotting tools."""
    lines: list[str] = []
    lines.append("# series: top_level_fractions")
    _flatten("top_level", doc["totals"].get("fractions", {}), lines)
    lines.append("# series: qtypes")
    _flatten("qtype", doc["qtypes"], lines)
    leaves = doc["leaves"]
    lines.append("# series: minimized_by_tld")
    _flatten("minimized", leaves["one_word"]["minimized"]["by_tld"], lines)
    lines.append("# series: chromium")
    total = doc["totals"]["records"]
    no_tld = leaves["one_word"]["chromium"]
    with_tld = leaves["has_tld"]["valid"]["chromium_like"] + leaves["has_tld"]["invalid"]["chromium"]
    lines.append(f"chromium\tno_tld\t{no_tld / total if total else 0.0}")
    lines.append(f"chromium\twith_tld\t{with_tld / total if total else 0.0}")
    if doc["senders"].get("tracked"):
        lines.append("# series: top_senders (prefix, total, empty, one_word, invalid_tld, valid_tld)")
        for row in doc["senders"].get("top", []):
            cats = row["categories"]
            lines.append(
                "\t".join(
                    [
                        row["prefix"],
                        str(row["total"]),
                        str(cats["empty"]),
                        str(cats["one_word"]),
                        str(cats["invalid_tld"]),
                        str(cats["valid_tld"]),
                    ]
                )
            )
        lines.append("# series: empty_senders (prefix, total)")
        for row in doc["empty_stats"].get("top", []):
            lines.append(f"{row['prefix']}\t{row['total']}")
    return ("\n".join(lines) + "\n").encode("utf-8")


def write_report(
    report: Report,
    fmt: str = "json",
    meta: Optional[dict] = None,
    policy: UnexpectedPolicy = DEFAULT_POLICY,
    top_k: int = 10,
) -> bytes:
    """Serialize a Report; identical inputs give byte-identical output."""
    doc = build_report_doc(report, meta=meta, policy=policy, top_k=top_k)
    if fmt == "json":
        return doc_to_json_bytes(doc)
    if fmt == "csv":
        return doc_to_csv(doc)
    if fmt in ("plotdata", "tsv-plotdata"):
        return doc_to_plotdata(doc)
    raise ValueError(f"unknown report format {fmt!r}")


def read_report_doc(data: bytes | str) -> dict:
    doc = json.loads(data)
    for key in ("meta", "totals", "leaves", "qtypes"):
        if key not in doc:
            raise ValueError(f"not a report document: missing {key!r}")
    return doc


def trend_csv_from_docs(docs: Iterable[dict]) -> str:
    """Fig-4-style trend rows from stored report documents, input order."""
    lines = [TREND_HEADER]
    for doc in docs:
        label = doc["meta"].get("label", "")
        fractions = doc["totals"].get("fractions")
        if fractions is None:
            raise ValueError(f"report {label!r} is empty; no trend row")
        lines.append(
            ",".join(
                [label] + [str(fractions[c]) for c in ("empty", "one_word", "invalid_tld", "valid_tld")]
            )
        )
    return "\n".join(lines) + "\n"
