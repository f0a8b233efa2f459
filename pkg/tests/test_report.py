import json
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from conftest import FIXTURES, fixture_ir, lower
from flashscan.config import AnalysisConfig
from flashscan.errors import FlashscanError
from flashscan.pipeline import analyze_ir
from flashscan.reasoning import EngineConfig
from flashscan.report import UNDEFINED, CorpusMetrics, build_report, compute_metrics, dumps

SAFE = """
contract Safe {
    mapping(address => uint256) bal;
    function put(uint256 x) external { bal[msg.sender] = x; }
}"""


def report_for(ir, **engine):
    return build_report(analyze_ir(ir, AnalysisConfig(), EngineConfig(**engine)), {"engine": EngineConfig(**engine).to_json()})


def test_zzf_report_single_high_with_anchors(zzf):
    rep = report_for(zzf)
    highs = [f for f in rep["findings"] if f["severity"] == "high"]
    assert len(highs) == 1
    p1, p3 = highs[0]["phases"]["1"], highs[0]["phases"]["3"]
    assert p1["callee"] == "getAmountsOut" and p1["kind"] == "ExternalCall"
    assert p3["callee"] == "_transfer" and p3["sinkKind"] == "EtherTokenTransfer"
    assert set(highs[0]["phases"]) == {"0", "1", "2", "3", "4"}
    assert rep["reportVersion"] == 1


def test_safe_contract_has_stats_and_no_findings():
    rep = report_for(lower(SAFE))
    assert rep["findings"] == []
    assert rep["stats"]["paths"] >= 1 and rep["stats"]["groups"] >= 1


def test_report_bytes_stable(zzf):
    assert dumps(report_for(zzf)) == dumps(report_for(fixture_ir("zzf.sol")))


def test_suppressed_group_is_not_high():
    ir = fixture_ir("zzf_fee_on_transfer.sol")
    rep = report_for(ir)
    assert all(f["severity"] != "high" for f in rep["findings"])
    assert rep["stats"]["suppressed"] == rep["stats"]["vulnerable"] > 0


def test_undetermined_group_reported_as_info(zzf):
    class Mute:
        def respond(self, stage, prompts, text):
            if stage == "PathFiltering":
                return json.dumps({"verdicts": [{"keep": True} for _ in prompts]})
            return "cannot say"

    a = analyze_ir(zzf, AnalysisConfig(), EngineConfig(max_retries=0), backend=Mute())
    rep = build_report(a)
    assert rep["findings"] and all(f["severity"] == "info" for f in rep["findings"])
    assert all("undetermined" in f["flags"] for f in rep["findings"])
    assert rep["stats"]["undetermined"] == rep["stats"]["kept"]


def test_stage_ordering_inside_pipeline():
    ir = fixture_ir("zzf_only_owner.sol")
    a = analyze_ir(ir, AnalysisConfig(), EngineConfig())
    discarded = {a.groups[i].key.render() for i, v in enumerate(a.filter_verdicts) if not v.keep}
    sims = [e for e in a.log.entries if e["stage"] == "AttackSimulation"]
    assert discarded and not any(set(e["groups"]) & discarded for e in sims)


def test_secret_value_never_serialized(zzf, monkeypatch):
    monkeypatch.setenv("FLASHSCAN_SECRET", "hunter2-value")
    eng = EngineConfig(mode="remote", endpoint="http://x", api_key_env="FLASHSCAN_SECRET")
    rep = build_report(analyze_ir(zzf, AnalysisConfig(), EngineConfig()), {"engine": eng.to_json()})
    assert "hunter2-value" not in dumps(rep)


# --- metrics -----------------------------------------------------------------------

def reference(tp, fn, fp):
    p = Fraction(tp, tp + fp) if tp + fp else None
    r = Fraction(tp, tp + fn) if tp + fn else None
    f = 2 * p * r / (p + r) if p is not None and r is not None and p + r else None
    return p, r, f


@given(st.integers(0, 500), st.integers(0, 500), st.integers(0, 500))
def test_metrics_match_exact_arithmetic(tp, fn, fp):
    m = CorpusMetrics(tp, fn, fp)
    for got, want in zip((m.precision, m.recall, m.f1), reference(tp, fn, fp)):
        if want is None:
            assert got is None
        else:
            assert got == pytest.approx(float(want), abs=1e-12)


def test_empty_corpus_uses_markers():
    doc = CorpusMetrics(0, 0, 0).to_json()
    assert doc["precision"] == doc["recall"] == doc["f1"] == UNDEFINED


def test_table_shape():
    lines = CorpusMetrics(57, 11, 0).table().splitlines()
    assert lines[0].split() == ["Tool", "TP", "FN", "Recall", "FP", "Precision", "F1"]
    assert lines[1].split()[1:] == ["57", "11", "0.84", "0", "1.00", "0.91"]


def _rep(high):
    return {"findings": [{"severity": "high"}] if high else []}


def test_compute_metrics_counts():
    labels = {"a": "vulnerable", "b": "vulnerable", "c": "safe", "d": "safe"}
    reports = {"a": _rep(True), "b": _rep(False), "c": _rep(True), "d": _rep(False)}
    m = compute_metrics(labels, reports)
    assert (m.tp, m.fn, m.fp, m.tn) == (1, 1, 1, 1)


def test_compute_metrics_label_missing():
    with pytest.raises(FlashscanError) as e:
        compute_metrics({}, {"x.sol": _rep(True)})
    assert e.value.code == "label-missing" and "x.sol" in e.value.message
