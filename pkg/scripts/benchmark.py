#!/usr/bin/env python3
"""Measure single-worker TSV classify+fold throughput and record it.

Replays a generated 100k-record TSV block through the full
read -> classify -> fold -> merge pipeline until 10^7 records have been
processed, then writes docs/BENCHMARK.md. Run from the repo root:

    PYTHONPATH=src python3 scripts/benchmark.py
"""

import functools
import io
import platform
import sys
import time
from pathlib import Path

from roottrace.classify import classify_stream
from roottrace.ingest import read_tsv
from roottrace.report import fold, merge
from roottrace.synth import generate, tsv_bytes, year_mix
from roottrace.tlds import default_registry

BLOCK = 100_000
REPLAYS = 100
TARGET_SECONDS = 60.0


def run(block: bytes, registry, track_senders: bool) -> tuple[int, float]:
    start = time.perf_counter()
    shards = []
    for _ in range(REPLAYS):
        shards.append(
            fold(classify_stream(read_tsv(io.BytesIO(block)), registry),
                 track_senders=track_senders)
        )
    report = functools.reduce(merge, shards)
    elapsed = time.perf_counter() - start
    assert report.total == BLOCK * REPLAYS
    return report.total, elapsed


def main() -> int:
    registry = default_registry()
    spec = year_mix(2022, seed=8)
    block = tsv_bytes(r for r, _ in generate(spec, BLOCK, registry))

    rows = []
    for track in (True, False):
        total, elapsed = run(block, registry, track)
        rows.append((track, total, elapsed))
        print(f"senders={'on' if track else 'off'}: {total} records in "
              f"{elapsed:.1f}s ({total / elapsed / 1000:.0f}k records/s)")

    doc = Path(__file__).resolve().parent.parent / "docs" / "BENCHMARK.md"
    doc.parent.mkdir(exist_ok=True)
    lines = [
        "# Throughput benchmark",
        "",
        f"Pipeline: `read_tsv` -> `classify_stream` -> `fold` (x{REPLAYS} shards) -> `merge`,",
        f"single worker, {BLOCK * REPLAYS:,} TSV records from the 2022 preset mix.",
        f"Target: {TARGET_SECONDS:.0f} s (soft gate).",
        "",
        "| sender tables | records | seconds | records/s | target met |",
        "|---|---|---|---|---|",
    ]
    for track, total, elapsed in rows:
        lines.append(
            f"| {'on' if track else 'off'} | {total:,} | {elapsed:.1f} "
            f"| {total / elapsed:,.0f} | {'yes' if elapsed <= TARGET_SECONDS else 'no'} |"
        )
    lines += [
        "",
        f"Measured on: Python {platform.python_version()}, {platform.machine()}, "
        f"{platform.system()} {platform.release()}.",
        "",
        "Regenerate with `PYTHONPATH=src python3 scripts/benchmark.py`; the",
        "acceptance suite re-measures the senders-on configuration on every run",
        "(`tests/test_acceptance.py::test_throughput_ten_million_soft_gate`).",
    ]
    doc.write_text("\n".join(lines) + "\n", encoding="utf-8")
    print(f"wrote {doc}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
