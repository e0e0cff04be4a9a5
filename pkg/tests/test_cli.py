import json

import pytest
import yaml

from counterarg.cli import DEFAULTS, run_command
from pipeline import FIXTURES, run_pipeline


def _stderr_record(capsys):
    return json.loads(capsys.readouterr().err.strip().splitlines()[-1])


def test_ingest_happy_path(tmp_path):
    out = tmp_path / "corpus"
    assert run_command(["ingest", "--input", str(FIXTURES / "posts.jsonl"),
                        "--claims", str(FIXTURES / "claim_pairs.jsonl"), "--out", str(out)]) == 0
    lines = (out / "arguments.jsonl").read_text().splitlines()
    assert len(lines) == 500
    assert all(json.loads(line)["implicitness"] is not None for line in lines)
    split = json.loads((out / "splits.json").read_text())
    assert sum(len(split[k]) for k in split) == 500
    manifest = json.loads((out / "manifests" / "ingest.json").read_text())
    assert len(manifest["run_id"]) == 16
    assert (out / "manifests" / "ingest.config.json").exists()


def test_unknown_subcommand_is_usage_error(tmp_path, capsys):
    assert run_command(["frobnicate", "--out", str(tmp_path / "x")]) == 2
    assert _stderr_record(capsys)["exit_code"] == 2
    assert not (tmp_path / "x").exists()


def test_no_subcommand(capsys):
    assert run_command([]) == 2
    assert _stderr_record(capsys)["error"] == "usage"


def test_missing_input_writes_nothing(tmp_path, capsys):
    out = tmp_path / "corpus"
    assert run_command(["ingest", "--input", str(tmp_path / "absent.jsonl"), "--out", str(out)]) == 2
    assert "not found" in _stderr_record(capsys)["message"]
    assert not out.exists()


def test_missing_required_setting(tmp_path):
    assert run_command(["ingest", "--out", str(tmp_path / "c")]) == 2


def test_config_file_then_flag_override(tmp_path):
    cfg = tmp_path / "ingest.yaml"
    out = tmp_path / "corpus"
    cfg.write_text(yaml.safe_dump({"input": str(FIXTURES / "posts.jsonl"), "out": str(out),
                                   "ratios": [0.5, 0.25, 0.25], "seed": 3}))
    assert run_command(["ingest", "--config", str(cfg), "--seed", "9"]) == 0
    snapshot = json.loads((out / "manifests" / "ingest.config.json").read_text())
    assert snapshot["seed"] == 9 and snapshot["ratios"] == [0.5, 0.25, 0.25]
    split = json.loads((out / "splits.json").read_text())
    assert abs(len(split["train"]) - 250) <= 5


def test_config_unknown_key(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"inptu": "x"}))
    assert run_command(["ingest", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 2


def test_bad_ratios(tmp_path):
    assert run_command(["ingest", "--input", str(FIXTURES / "posts.jsonl"), "--out", str(tmp_path / "o"),
                        "--ratios", "0.5", "0.5", "0.5"]) == 2


def test_runtime_failure_exit_1(tmp_path, capsys):
    bad = tmp_path / "bad.jsonl"
    bad.write_text("{not json}\n")
    assert run_command(["ingest", "--input", str(bad), "--out", str(tmp_path / "o")]) == 1
    assert _stderr_record(capsys)["exit_code"] == 1


def test_defaults_match_training_configs():
    assert DEFAULTS["train-gen"]["learning_rate"] == 5e-5
    assert (DEFAULTS["generate"]["n"], DEFAULTS["generate"]["m"]) == (8, 5)
    assert (DEFAULTS["generate"]["p"], DEFAULTS["generate"]["k"]) == (0.95, 50)


@pytest.mark.parametrize("mode", ["twodec"])
def test_full_pipeline_twodec(tmp_path, mode):
    codes = run_pipeline(tmp_path, mode=mode)
    assert set(codes.values()) == {0} and len(codes) == 7
    report = json.loads((tmp_path / "run" / "report.json").read_text())
    assert report["n_instances"] > 0
    ranked = [json.loads(line) for line in (tmp_path / "run" / "ranked.jsonl").read_text().splitlines()]
    by_arg = {}
    for r in ranked:
        by_arg.setdefault(r["argument_id"], []).append(r)
    for recs in by_arg.values():
        assert len({r["conclusion"] for r in recs}) == 1
        assert [r["rank"] for r in recs] == list(range(1, len(recs) + 1))
