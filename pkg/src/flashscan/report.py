"""Findings with attack-phase anchors, versioned report documents and corpus metrics."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Mapping, Optional

from .errors import FlashscanError
from .ir.model import ContractIR, InstId
from .pipeline import ContractAnalysis
from .taint.model import PRICE_SOURCES, SINK_KINDS, TaintPath

REPORT_VERSION = 1
UNDEFINED = "undefined"

PHASE_NAMES = {
    0: "setup",
    1: "taint introduction",
    2: "propagation",
    3: "value extraction",
    4: "cleanup",
}


@dataclass
class Finding:
    contract: str
    group_key: str
    severity: str  # high | medium | info
    phases: dict[int, dict]
    filter_verdict: dict
    simulation_verdict: dict
    checker_outcome: dict
    narrative: str
    flags: list[str] = field(default_factory=list)
    merged_groups: list[str] = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "contract": self.contract,
            "groupKey": self.group_key,
            "mergedGroups": list(self.merged_groups),
            "severity": self.severity,
            "phases": {str(k): v for k, v in sorted(self.phases.items())},
            "filterVerdict": self.filter_verdict,
            "simulationVerdict": self.simulation_verdict,
            "checkerOutcome": self.checker_outcome,
            "narrative": self.narrative,
            "flags": sorted(self.flags),
        }


def _anchor(ir: ContractIR, iid: InstId) -> dict:
    inst = ir.instruction(iid)
    out = {"instruction": str(iid), "function": ir.function_of(iid).name, "kind": inst.kind,
           "text": inst.describe()}
    if inst.callee:
        out["callee"] = inst.callee
    if inst.span and ir.source:
        out["line"] = ir.source.count("\n", 0, inst.span[0]) + 1
    return out


def _anchor_path(paths: list[TaintPath]) -> TaintPath:
    # price-derived sources first, then the most direct value movement, then the shortest chain
    return min(paths, key=lambda p: (p.source_kind not in PRICE_SOURCES, SINK_KINDS.index(p.sink_kind),
                                     len(p), p.steps, p.source_id))


def phase_map(ir: ContractIR, paths: list[TaintPath]) -> dict[int, dict]:
    p = _anchor_path(paths)
    src, sink = _anchor(ir, p.steps[0]), _anchor(ir, p.sink[0])
    return {
        0: {"name": PHASE_NAMES[0], "narrative": "attacker borrows funds with a flash loan"},
        1: {"name": PHASE_NAMES[1], "sourceKind": p.source_kind, **src},
        2: {"name": PHASE_NAMES[2], "steps": [str(s) for s in p.steps[1:-1]]},
        3: {"name": PHASE_NAMES[3], "sinkKind": p.sink_kind, **sink},
        4: {"name": PHASE_NAMES[4], "narrative": "attacker unwinds the manipulation and repays the loan"},
    }


def _severity(vulnerable: bool, suppressed: bool, undetermined: bool) -> Optional[str]:
    if undetermined:
        return "info"
    if vulnerable and not suppressed:
        return "high"
    if vulnerable:
        return "medium"  # kept for audit: flagged by simulation, neutralized by a defense
    return None


def build_findings(a: ContractAnalysis) -> list[Finding]:
    """One finding per (source function, sink function, severity); groups sharing them are merged."""
    warn_codes = {w["code"] for w in a.taint.warnings}
    buckets: dict[tuple, list[int]] = {}
    for gi in a.simulated:
        sim, chk = a.simulation_for(gi), a.checker_for(gi)
        sev = _severity(sim.vulnerable, chk.suppressed, sim.undetermined)
        if sev is None:
            continue
        k = a.groups[gi].key
        buckets.setdefault((k.source_function, k.sink_function, sev), []).append(gi)
    order = {"high": 0, "medium": 1, "info": 2}
    out = []
    for (src, sink, sev), gis in sorted(buckets.items(), key=lambda kv: (order[kv[0][2]], kv[0][0], kv[0][1])):
        paths = [p for gi in gis for p in a.groups[gi].members]
        anchor = _anchor_path(paths)
        lead = next(gi for gi in gis if anchor in a.groups[gi].members)
        sim, chk, flt = a.simulation_for(lead), a.checker_for(lead), a.filter_verdicts[lead]
        flags = set()
        if any(a.simulation_for(gi).undetermined for gi in gis):
            flags.add("undetermined")
        if "path-capped" in warn_codes:
            flags.add("path-capped")
        if "fixpoint-budget-exceeded" in warn_codes:
            flags.add("fixpoint-budget")
        out.append(Finding(
            contract=a.ir.name,
            group_key=a.groups[lead].key.render(),
            severity=sev,
            phases=phase_map(a.ir, paths),
            filter_verdict={k: v for k, v in flt.to_json().items() if k != "groupKey"},
            simulation_verdict={k: v for k, v in sim.to_json().items() if k != "groupKey"},
            checker_outcome={k: v for k, v in chk.to_json().items() if k != "groupKey"},
            narrative=sim.attack_explanation,
            flags=sorted(flags),
            merged_groups=[a.groups[gi].key.render() for gi in gis],
        ))
    return out


def stage_stats(a: ContractAnalysis) -> dict:
    vulnerable = [gi for gi in a.simulated if a.simulation_for(gi).vulnerable]
    return {
        "paths": len(a.taint.paths),
        "groups": len(a.groups),
        "kept": len(a.simulated),
        "defaulted": sum(v.defaulted for v in a.filter_verdicts),
        "vulnerable": len(vulnerable),
        "undetermined": sum(v.undetermined for v in a.simulation_verdicts),
        "suppressed": sum(a.checker_for(gi).suppressed for gi in vulnerable),
        "iterations": a.taint.iterations,
        "promptTokens": {k: sum(v) for k, v in sorted(a.token_estimates.items())},
    }


def build_report(a: ContractAnalysis, config_echo: Optional[dict] = None) -> dict:
    ir = a.ir
    findings = build_findings(a)
    return {
        "reportVersion": REPORT_VERSION,
        "contract": {"name": ir.name, "path": ir.path, "functions": len(ir.functions),
                     "instructions": sum(len(f.instructions) for f in ir.functions)},
        "findings": [f.to_json() for f in findings],
        "stats": stage_stats(a),
        "warnings": sorted(a.taint.warnings + [d.to_json() for d in a.icfg.diagnostics],
                           key=lambda w: (w.get("code", ""), w.get("message", ""))),
        "config": config_echo or {},
    }


def high_findings(report: dict) -> int:
    return sum(1 for f in report.get("findings", []) if f.get("severity") == "high")


def report_text(doc: dict) -> str:
    lines = []
    for rep in doc.get("contracts", [doc]):
        c = rep["contract"]
        lines.append(f"{c['name']} ({c['path']}): {high_findings(rep)} high finding(s)")
        s = rep["stats"]
        lines.append(f"  paths {s['paths']}, groups {s['groups']}, kept {s['kept']}, "
                     f"vulnerable {s['vulnerable']}, suppressed {s['suppressed']}")
        for f in rep["findings"]:
            lines.append(f"  [{f['severity']}] {f['groupKey']}")
            p1, p3 = f["phases"]["1"], f["phases"]["3"]
            lines.append(f"    phase 1: {p1['function']} {p1['instruction']} {p1.get('callee', p1['kind'])}")
            lines.append(f"    phase 3: {p3['function']} {p3['instruction']} {p3.get('callee', p3['kind'])}")
            if f["narrative"]:
                lines.append(f"    {f['narrative']}")
    return "\n".join(lines) + "\n"


# --- metrics -----------------------------------------------------------------------

def _ratio(num: int, den: int) -> Optional[float]:
    return num / den if den > 0 else None


@dataclass
class CorpusMetrics:
    tp: int
    fn: int
    fp: int
    tn: int = 0

    @property
    def precision(self) -> Optional[float]:
        return _ratio(self.tp, self.tp + self.fp)

    @property
    def recall(self) -> Optional[float]:
        return _ratio(self.tp, self.tp + self.fn)

    @property
    def f1(self) -> Optional[float]:
        p, r = self.precision, self.recall
        if p is None or r is None or p + r == 0:
            return None
        return 2 * p * r / (p + r)

    def to_json(self) -> dict:
        mark = lambda v: UNDEFINED if v is None else v  # noqa: E731
        return {"tp": self.tp, "fn": self.fn, "fp": self.fp, "tn": self.tn,
                "precision": mark(self.precision), "recall": mark(self.recall), "f1": mark(self.f1)}

    def table(self, label: str = "flashscan") -> str:
        fmt = lambda v: "-" if v is None else f"{v:.2f}"  # noqa: E731
        header = f"{'Tool':<12}{'TP':>5}{'FN':>5}{'Recall':>8}{'FP':>5}{'Precision':>11}{'F1':>6}"
        row = (f"{label:<12}{self.tp:>5}{self.fn:>5}{fmt(self.recall):>8}{self.fp:>5}"
               f"{fmt(self.precision):>11}{fmt(self.f1):>6}")
        return header + "\n" + row + "\n"


def compute_metrics(labels: Mapping[str, str], reports: Mapping[str, dict]) -> CorpusMetrics:
    """Contract-level scoring: a contract is detected iff its report has a high finding.

    ``reports`` maps the label key of each contract to its report document (or to a
    list of per-contract reports when one file holds several contracts).
    """
    tp = fn = fp = tn = 0
    for name in sorted(reports):
        if name not in labels:
            raise FlashscanError("label-missing", f"no label for {name}", name)
        label = labels[name]
        if label not in ("vulnerable", "safe"):
            raise FlashscanError("bad-config", f"label for {name} must be vulnerable or safe, got {label!r}")
        rep = reports[name]
        docs = rep if isinstance(rep, list) else rep.get("contracts", [rep])
        detected = any(high_findings(d) for d in docs)
        if label == "vulnerable":
            tp += detected
            fn += not detected
        else:
            fp += detected
            tn += not detected
    return CorpusMetrics(tp, fn, fp, tn)


def dumps(doc: dict) -> str:
    """Canonical serialization used for every written artifact."""
    return json.dumps(doc, indent=2, sort_keys=True, ensure_ascii=False) + "\n"
