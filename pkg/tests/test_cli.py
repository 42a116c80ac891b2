from __future__ import annotations

import json
import sys
from pathlib import Path

from ppmbench.cli import main
from ppmbench.eventlog import serialize_csv
from ppmbench.runner import run_experiment
from ppmbench.config import load_config

from conftest import make_log

REPO = Path(__file__).resolve().parent.parent
ORDERS = str(REPO / "data" / "synthetic_orders.csv")
STUB = str(Path(__file__).parent / "stub_predictor.py")


def write_chain_csv(tmp_path: Path, n_cases: int = 20) -> Path:
    log = make_log(
        {f"c{i:02d}": ["A", "B", "C"] for i in range(n_cases)},
        start_days={f"c{i:02d}": float(i) for i in range(n_cases)},
    )
    path = tmp_path / "chain.csv"
    path.write_text(serialize_csv(log), encoding="utf-8")
    return path


def chain_config(tmp_path: Path, **overrides) -> Path:
    dataset = write_chain_csv(tmp_path)
    text = f"""
dataset:
  path: {dataset}
split:
  fractions: [0.6, 0.2, 0.2]
preprocessing:
  n_gram: 4
predictor:
  ngram: {{n: 4, alpha: 0.0}}
output:
  report_dir: {tmp_path / 'reports'}
  formats: [json, csv]
master_seed: 7
"""
    for line in overrides.get("extra", "").splitlines():
        text += line + "\n"
    path = tmp_path / "config.yaml"
    path.write_text(text, encoding="utf-8")
    return path


def test_stats_emits_five_keys(capsys):
    code = main(["stats", ORDERS])
    assert code == 0
    payload = json.loads(capsys.readouterr().out)
    assert set(payload) == {
        "n_cases",
        "n_unique_activities",
        "avg_case_length",
        "max_case_length",
        "avg_throughput_days",
    }
    assert payload["n_cases"] == 100


def test_stats_missing_file_is_runtime_error(capsys):
    assert main(["stats", "no-such-file.csv"]) == 2


def test_split_deterministic_bytes(tmp_path, capsys):
    dataset = write_chain_csv(tmp_path)
    out1, out2 = tmp_path / "s1.csv", tmp_path / "s2.csv"
    for out in (out1, out2):
        code = main([
            "split", str(dataset), "--strategy", "case_random", "--seed", "7",
            "--out", str(out),
        ])
        assert code == 0
    assert out1.read_bytes() == out2.read_bytes()


def test_split_bad_fractions_is_validation_error(tmp_path):
    dataset = write_chain_csv(tmp_path)
    code = main([
        "split", str(dataset), "--strategy", "case_random",
        "--fractions", "0.8,0.3,0.1", "--out", str(tmp_path / "s.csv"),
    ])
    assert code == 2  # InfeasibleSplitError is a runtime failure


def test_export_samples_jsonl(tmp_path):
    config = chain_config(tmp_path)
    out = tmp_path / "samples.jsonl"
    assert main(["export-samples", str(config), "--out", str(out), "--split", "test"]) == 0
    lines = out.read_text().strip().split("\n")
    records = [json.loads(line) for line in lines]
    assert all(r["split"] == "test" for r in records)
    assert {len(r["input_ids"]) for r in records} == {4}


def test_run_writes_report_and_manifest(tmp_path):
    config = chain_config(tmp_path)
    assert main(["run", str(config)]) == 0
    report = json.loads((tmp_path / "reports" / "report.json").read_text())
    assert set(report) == {"manifest", "tasks"}
    manifest = report["manifest"]
    for key in ("engine_version", "config_hash", "master_seed", "split_hash"):
        assert key in manifest
    assert set(report["tasks"]) == {
        "next_activity",
        "next_timestamp",
        "suffix",
        "remaining_direct",
        "remaining_iterative",
    }
    # Deterministic chain log: the n-gram baseline is perfect.
    next_activity = report["tasks"]["next_activity"]
    assert next_activity["global"]["accuracy"] == 1.0
    assert report["tasks"]["suffix"]["global"]["dl_similarity"] == 1.0
    assert report["tasks"]["next_timestamp"]["global"]["mae"] == 0.0


def test_run_twice_byte_identical(tmp_path):
    config = chain_config(tmp_path)
    assert main(["run", str(config)]) == 0
    first = (tmp_path / "reports" / "report.json").read_bytes()
    first_csv = (tmp_path / "reports" / "report.csv").read_bytes()
    assert main(["run", str(config)]) == 0
    assert (tmp_path / "reports" / "report.json").read_bytes() == first
    assert (tmp_path / "reports" / "report.csv").read_bytes() == first_csv


def test_run_workers_byte_identical(tmp_path):
    config = chain_config(tmp_path)
    assert main(["run", str(config)]) == 0
    serial = (tmp_path / "reports" / "report.json").read_bytes()
    assert main(["run", str(config), "--workers", "4"]) == 0
    assert (tmp_path / "reports" / "report.json").read_bytes() == serial


def test_run_missing_dataset_nonzero_exit(tmp_path, capsys):
    config = tmp_path / "config.yaml"
    config.write_text(
        "dataset: {path: /nonexistent.csv}\npredictor: {ngram: {}}\n", encoding="utf-8"
    )
    assert main(["run", str(config)]) == 2
    assert "dataset" in capsys.readouterr().err


def test_run_invalid_config_exit_one(tmp_path):
    config = tmp_path / "config.yaml"
    config.write_text("dataset: {path: x.csv}\npredictor: {ngram: {}}\nbogus: 1\n")
    assert main(["run", str(config)]) == 1


def test_run_with_external_stub_predictor(tmp_path):
    dataset = write_chain_csv(tmp_path)
    config = tmp_path / "config.yaml"
    config.write_text(
        f"""
dataset:
  path: {dataset}
predictor:
  external:
    command: ["{sys.executable}", "{STUB}"]
    timeout: 15
tasks: [next_activity, remaining_direct]
output:
  report_dir: {tmp_path / 'reports'}
""",
        encoding="utf-8",
    )
    assert main(["run", str(config)]) == 0
    report = json.loads((tmp_path / "reports" / "report.json").read_text())
    # The stub is uniform over non-PAD ids: far from perfect but well-formed.
    assert 0.0 <= report["tasks"]["next_activity"]["global"]["accuracy"] < 1.0


def test_stats_on_xes_input(tmp_path, capsys):
    xes = tmp_path / "tiny.xes"
    xes.write_text(
        """<log>
  <trace>
    <string key="concept:name" value="t1"/>
    <event><string key="concept:name" value="A"/>
           <date key="time:timestamp" value="2020-01-01T00:00:00+00:00"/></event>
    <event><string key="concept:name" value="B"/>
           <date key="time:timestamp" value="2020-01-02T00:00:00+00:00"/></event>
  </trace>
</log>""",
        encoding="utf-8",
    )
    assert main(["stats", str(xes)]) == 0  # format inferred from the extension
    payload = json.loads(capsys.readouterr().out)
    assert payload["n_cases"] == 1
    assert payload["avg_throughput_days"] == 1.0


def test_protocol_check_against_stub(capsys):
    code = main(["protocol-check", "--", sys.executable, STUB])
    assert code == 0
    assert "handshake ok" in capsys.readouterr().out


def test_protocol_check_failure_exit_two(capsys):
    code = main(["protocol-check", "--", sys.executable, STUB, "wrong-vocab"])
    assert code == 2


def test_report_csv_unions_metric_columns(tmp_path):
    config = chain_config(tmp_path)
    assert main(["run", str(config)]) == 0
    lines = (tmp_path / "reports" / "report.csv").read_text().splitlines()
    header = lines[0].split(",")
    assert header[:4] == ["task", "row", "k", "n_samples"]
    # One shared header: classification, regression and sequence columns.
    for column in ("accuracy", "mae", "dl_similarity"):
        assert column in header
    accuracy_col = header.index("accuracy")
    suffix_row = next(l for l in lines if l.startswith("suffix,per_k")).split(",")
    next_act_row = next(l for l in lines if l.startswith("next_activity,per_k")).split(",")
    assert suffix_row[accuracy_col] == ""  # blank where a task lacks the metric
    assert next_act_row[accuracy_col] != ""


def test_run_result_reports_match_files(tmp_path):
    config_path = chain_config(tmp_path)
    cfg = load_config(config_path.read_text())
    result = run_experiment(cfg)
    document = json.loads((tmp_path / "reports" / "report.json").read_text())
    for task, report in result.reports.items():
        assert document["tasks"][task]["global"] == report.to_json_dict()["global"]
