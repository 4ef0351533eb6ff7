import json
import os
import subprocess
import sys
from pathlib import Path

import pytest

from roottrace.cli import main

SRC = str(Path(__file__).resolve().parent.parent / "src")


def run(*argv):
    return main(list(argv))


@pytest.fixture()
def trace(tmp_path):
    path = tmp_path / "t.tsv"
    assert run("gen", "--preset", "2022", "--count", "5000", "--seed", "11",
               "--out", str(path)) == 0
    return path


def test_gen_then_classify_round_trip(tmp_path, trace):
    out = tmp_path / "r.json"
    assert run("classify", "--in", str(trace), "--label", "2022", "--out", str(out)) == 0
    doc = json.loads(out.read_text())
    assert doc["totals"]["records"] == 5000
    assert doc["totals"]["dropped_unparseable"] == 0
    assert doc["meta"]["label"] == "2022"
    assert doc["totals"]["fractions"]["empty"] == pytest.approx(0.3724, abs=0.03)
    assert doc["policy"]["unexpected_fraction"] > 0.5


def test_classify_deterministic_bytes(tmp_path, trace):
    out1 = tmp_path / "r1.json"
    out2 = tmp_path / "r2.json"
    args = ["classify", "--in", str(trace), "--label", "x", "--seed", "3",
            "--sample-rate", "0.5"]
    assert run(*args, "--out", str(out1)) == 0
    assert run(*args, "--out", str(out2)) == 0
    assert out1.read_bytes() == out2.read_bytes()


def test_classify_missing_file_is_runtime_error(tmp_path, capsys):
    out = tmp_path / "r.json"
    rc = run("classify", "--in", str(tmp_path / "nope.tsv"), "--out", str(out))
    assert rc == 2
    assert not out.exists()
    assert "roottrace:" in capsys.readouterr().err


def test_usage_error_exits_one(capsys):
    with pytest.raises(SystemExit) as err:
        run("classify", "--out", "x.json")  # --in missing
    assert err.value.code == 1


def test_unknown_command_exits_one():
    with pytest.raises(SystemExit) as err:
        run("frobnicate")
    assert err.value.code == 1


def test_window_requires_day_origin(tmp_path, trace):
    with pytest.raises(SystemExit) as err:
        run("classify", "--in", str(trace), "--window", "06:00-07:00",
            "--out", str(tmp_path / "r.json"))
    assert err.value.code == 1


def test_classify_with_window(tmp_path, trace):
    out = tmp_path / "r.json"
    assert run("classify", "--in", str(trace), "--window", "06:00-07:00",
               "--day-origin", "2022-04-12", "--out", str(out)) == 0
    doc = json.loads(out.read_text())
    # a 1-hour slice of a uniform day holds ~1/24 of the records
    assert 0 < doc["totals"]["records"] < 500


def test_classify_merges_multiple_inputs(tmp_path, trace):
    out = tmp_path / "r.json"
    assert run("classify", "--in", str(trace), str(trace), "--out", str(out)) == 0
    doc = json.loads(out.read_text())
    assert doc["totals"]["records"] == 10_000


def test_classify_sample_seed_recorded(tmp_path, trace):
    out = tmp_path / "r.json"
    assert run("classify", "--in", str(trace), "--sample-rate", "0.25",
               "--seed", "9", "--out", str(out)) == 0
    doc = json.loads(out.read_text())
    assert doc["meta"]["sample_rate"] == 0.25
    assert doc["meta"]["seed"] == 9
    assert 1000 < doc["totals"]["records"] < 1500
    assert "registry" in doc["meta"]


def test_report_reformat_csv_and_plotdata(tmp_path, trace):
    report = tmp_path / "r.json"
    run("classify", "--in", str(trace), "--label", "2022", "--out", str(report))
    csv_out = tmp_path / "r.csv"
    assert run("report", "--in", str(report), "--format", "csv", "--out", str(csv_out)) == 0
    lines = csv_out.read_text().strip().split("\n")
    assert lines[0] == "label,empty,one_word,invalid_tld,valid_tld"
    assert lines[1].startswith("2022,")

    plot_out = tmp_path / "r.tsv"
    assert run("report", "--in", str(report), "--format", "plotdata", "--out", str(plot_out)) == 0
    assert "# series: top_level_fractions" in plot_out.read_text()


def test_trend_over_years(tmp_path):
    reports = []
    for year in (2013, 2022):
        trace = tmp_path / f"{year}.tsv"
        run("gen", "--preset", str(year), "--count", "4000", "--out", str(trace))
        report = tmp_path / f"{year}.json"
        run("classify", "--in", str(trace), "--label", str(year), "--out", str(report))
        reports.append(str(report))
    out = tmp_path / "trend.csv"
    assert run("trend", "--in", *reports, "--out", str(out)) == 0
    lines = out.read_text().strip().split("\n")
    assert len(lines) == 3
    assert lines[1].split(",")[0] == "2013"
    assert lines[2].split(",")[0] == "2022"
    empty_2013 = float(lines[1].split(",")[1])
    empty_2022 = float(lines[2].split(",")[1])
    assert empty_2013 < 0.06 and empty_2022 > 0.3


def test_top_senders_table(tmp_path, trace):
    out = tmp_path / "senders.csv"
    assert run("top-senders", "--in", str(trace), "-k", "5", "--out", str(out)) == 0
    lines = out.read_text().strip().split("\n")
    assert lines[0] == "prefix,total,empty,one_word,invalid_tld,valid_tld"
    assert len(lines) == 6
    totals = [int(l.split(",")[1]) for l in lines[1:]]
    assert totals == sorted(totals, reverse=True)


def test_top_senders_empty_table(tmp_path, trace):
    out = tmp_path / "empty.csv"
    assert run("top-senders", "--in", str(trace), "--empty", "-k", "3", "--out", str(out)) == 0
    lines = out.read_text().strip().split("\n")
    assert lines[0] == "prefix,total,qtypes"
    assert "NS=" in lines[1]


def test_gen_truth_file(tmp_path):
    trace = tmp_path / "t.tsv"
    truth = tmp_path / "t.truth"
    assert run("gen", "--preset", "2020", "--count", "300", "--out", str(trace),
               "--truth-out", str(truth)) == 0
    truth_lines = truth.read_text().strip().split("\n")
    assert len(truth_lines) == 300
    assert all(len(l.split("\t")) == 3 for l in truth_lines)
    assert len(trace.read_bytes().strip().split(b"\n")) == 300


def test_gen_from_spec_file(tmp_path):
    spec = tmp_path / "mix.cfg"
    spec.write_text("seed = 5\nweight.empty = 1.0\nqtype.empty.NS = 1\n")
    out = tmp_path / "t.tsv"
    assert run("gen", "--spec", str(spec), "--count", "10", "--out", str(out)) == 0
    lines = out.read_bytes().strip().split(b"\n")
    assert len(lines) == 10
    assert all(l.endswith(b"\tIN\tNS\t.") for l in lines)


def test_gen_bad_spec_is_runtime_error(tmp_path, capsys):
    spec = tmp_path / "bad.cfg"
    spec.write_text("weight.empty = 0.4\n")
    rc = run("gen", "--spec", str(spec), "--count", "10", "--out", str(tmp_path / "t.tsv"))
    assert rc == 2


def test_custom_tld_list(tmp_path):
    tlds = tmp_path / "tlds.txt"
    tlds.write_text("ZZ\n")
    trace = tmp_path / "t.tsv"
    trace.write_bytes(b"1\t1.2.3.4\tIN\tA\tfoo.zz.\n1\t1.2.3.4\tIN\tA\tfoo.com.\n")
    out = tmp_path / "r.json"
    assert run("classify", "--in", str(trace), "--tld-list", str(tlds), "--out", str(out)) == 0
    doc = json.loads(out.read_text())
    assert doc["leaves"]["has_tld"]["valid"]["by_tld"] == {"zz": 1}
    assert doc["leaves"]["has_tld"]["invalid"]["other"]["by_tld"] == {"com": 1}


def test_appletalk_flag(tmp_path):
    trace = tmp_path / "t.tsv"
    trace.write_bytes(b"1\t1.2.3.4\tIN\tA\tbox.printerzone.\n")
    out = tmp_path / "r.json"
    assert run("classify", "--in", str(trace), "--appletalk", "appletalk,printerzone",
               "--out", str(out)) == 0
    doc = json.loads(out.read_text())
    assert doc["leaves"]["has_tld"]["invalid"]["appletalk"] == 1


def test_pcap_classify_end_to_end(tmp_path):
    from test_ingest import dns_payload, pcap_file, udp4

    frames = [udp4("44.242.1.2", dns_payload([b"com"], 2)) for _ in range(3)]
    pcap = tmp_path / "t.pcap"
    pcap.write_bytes(pcap_file(frames))
    out = tmp_path / "r.json"
    assert run("classify", "--in", str(pcap), "--format", "pcap", "--out", str(out)) == 0
    doc = json.loads(out.read_text())
    assert doc["totals"]["records"] == 3
    assert doc["leaves"]["one_word"]["minimized"]["total"] == 3


def test_module_entry_point(tmp_path):
    env = dict(os.environ, PYTHONPATH=SRC)
    proc = subprocess.run(
        [sys.executable, "-m", "roottrace", "--version"],
        capture_output=True, text=True, env=env,
    )
    assert proc.returncode == 0
    assert proc.stdout.startswith("roottrace ")


def test_no_senders_flag(tmp_path, trace):
    out = tmp_path / "r.json"
    assert run("classify", "--in", str(trace), "--no-senders", "--out", str(out)) == 0
    doc = json.loads(out.read_text())
    assert doc["senders"] == {"tracked": False}
    assert "top" not in doc["senders"]
