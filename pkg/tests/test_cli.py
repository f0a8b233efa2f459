import json
import shutil

import pytest

from conftest import FIXTURES
from flashscan.cli import EXIT_CLEAN, EXIT_ERROR, EXIT_FINDINGS, bundled_corpus, main, write_atomic

SAFE = """
contract Safe {
    mapping(address => uint256) bal;
    function put(uint256 x) external { bal[msg.sender] = x; }
}
"""


@pytest.fixture(autouse=True)
def in_tmp(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)


def test_analyze_zzf_writes_report(tmp_path):
    out = tmp_path / "report.json"
    assert main(["analyze", str(FIXTURES / "zzf.sol"), "--engine", "offline", "-o", str(out)]) == EXIT_FINDINGS
    doc = json.loads(out.read_text())
    [rep] = doc["contracts"]
    assert [f["severity"] for f in rep["findings"]] == ["high"]
    assert doc["config"]["engine"]["mode"] == "offline"


def test_analyze_safe_exit_zero(tmp_path):
    p = tmp_path / "safe.sol"
    p.write_text(SAFE)
    assert main(["analyze", str(p), "--engine", "offline", "-o", str(tmp_path / "r.json")]) == EXIT_CLEAN


def test_analyze_missing_file(capsys):
    assert main(["analyze", "missing.sol"]) == EXIT_ERROR
    assert "file-not-found" in capsys.readouterr().err


def test_bad_engine_config(capsys):
    assert main(["analyze", str(FIXTURES / "zzf.sol"), "--engine", "remote"]) == EXIT_ERROR
    assert "bad-config" in capsys.readouterr().err


def test_unknown_flag_is_operational_error():
    assert main(["analyze", "--no-such-flag"]) == EXIT_ERROR


def test_text_output(capsys):
    assert main(["analyze", str(FIXTURES / "zzf.sol"), "--text"]) == EXIT_FINDINGS
    out = capsys.readouterr().out
    assert "phase 1: burnToHolder" in out and "_transfer" in out


def test_stage_dump_files(tmp_path):
    main(["analyze", str(FIXTURES / "zzf.sol"), "-o", "r.json", "--stage-dump", "--run-dir", "run"])
    stages = tmp_path / "run" / "stages" / "zzf" / "ZZF"
    assert sorted(p.name for p in stages.iterdir()) == [
        "checker.json", "filter.json", "groups.json", "ir.json", "simulation.json", "taint.json"]


def test_ir_json_input_matches_solidity_input(tmp_path):
    assert main(["dump-ir", str(FIXTURES / "zzf.sol"), "-o", "zzf.ir.json"]) == EXIT_CLEAN
    assert main(["analyze", "zzf.ir.json", "-o", "a.json"]) == EXIT_FINDINGS
    assert main(["analyze", str(FIXTURES / "zzf.sol"), "-o", "b.json"]) == EXIT_FINDINGS
    a = json.loads((tmp_path / "a.json").read_text())["contracts"][0]
    b = json.loads((tmp_path / "b.json").read_text())["contracts"][0]
    assert [f["groupKey"] for f in a["findings"]] == [f["groupKey"] for f in b["findings"]]


def test_config_override_replaces_defaults(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"dex_functions": ["somethingElse"]}))
    assert main(["analyze", str(FIXTURES / "zzf.sol"), "--config", str(cfg), "-o", "r.json"]) == EXIT_CLEAN
    echo = json.loads((tmp_path / "r.json").read_text())["config"]["analysis"]
    assert echo["dex_functions"] == ["somethingElse"]


def test_config_rejects_unknown_key(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"dex_function": ["x"]}))
    assert main(["analyze", str(FIXTURES / "zzf.sol"), "--config", str(cfg)]) == EXIT_ERROR
    assert "bad-config" in capsys.readouterr().err


def test_grammar(capsys):
    assert main(["grammar", "--json"]) == EXIT_CLEAN
    rows = json.loads(capsys.readouterr().out)
    assert any(r["name"] == "inline assembly" and not r["supported"] for r in rows)


def test_eval_bundled(tmp_path, capsys):
    assert main(["eval", "--run-dir", "run", "--concurrency", "1"]) == EXIT_CLEAN
    metrics = json.loads((tmp_path / "run" / "metrics.json").read_text())["metrics"]
    assert metrics["precision"] == 1.0 and metrics["recall"] >= 0.83
    assert "Precision" in capsys.readouterr().out


def test_eval_concurrency_does_not_change_metrics(tmp_path):
    main(["eval", "--run-dir", "one", "--concurrency", "1"])
    main(["eval", "--run-dir", "eight", "--concurrency", "8"])
    a = json.loads((tmp_path / "one" / "metrics.json").read_text())
    b = json.loads((tmp_path / "eight" / "metrics.json").read_text())
    assert a["metrics"] == b["metrics"] and a["contracts"] == b["contracts"]


def test_eval_skips_unlabeled_contract(tmp_path, capsys):
    corpus = tmp_path / "corpus"
    shutil.copytree(bundled_corpus(), corpus)
    labels = json.loads((corpus / "labels.json").read_text())
    del labels["zzf_burn.sol"]
    (corpus / "labels.json").write_text(json.dumps(labels))
    assert main(["eval", str(corpus), "--run-dir", "run"]) == EXIT_CLEAN
    doc = json.loads((tmp_path / "run" / "metrics.json").read_text())
    assert doc["skipped"] == [{"contract": "zzf_burn.sol", "code": "label-missing", "message": "no label for zzf_burn.sol"}]
    assert doc["metrics"]["tp"] + doc["metrics"]["fn"] == 5
    assert "label-missing" in capsys.readouterr().err


def test_eval_with_nothing_analyzable(tmp_path):
    corpus = tmp_path / "empty"
    corpus.mkdir()
    (corpus / "labels.json").write_text("{}")
    assert main(["eval", str(corpus)]) == EXIT_ERROR


def test_eval_refuses_remote_without_opt_in(capsys):
    rc = main(["eval", "--engine", "remote", "--endpoint", "http://x", "--api-key-env", "K"])
    assert rc == EXIT_ERROR and "--allow-remote-eval" in capsys.readouterr().err


def test_write_atomic_leaves_no_temp(tmp_path):
    target = tmp_path / "d" / "out.json"
    write_atomic(target, "{}\n")
    write_atomic(target, "[]\n")
    assert target.read_text() == "[]\n"
    assert [p.name for p in target.parent.iterdir()] == ["out.json"]
