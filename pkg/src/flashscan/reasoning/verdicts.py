"""Structured verdicts and tolerant extraction from free-form responses."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any, Iterator, Optional

from ..errors import FlashscanError
from .prompts import FILTERING, SIMULATION

ANSWER_FIELDS = {
    "accessControl": ("accessControl", "access_control", "q1"),
    "economicIntent": ("economicIntent", "economic_intent", "q2"),
    "mitigation": ("mitigation", "q3"),
}
STEP_FIELDS = {
    "priceSource": ("priceSource", "price_source"),
    "attackScenario": ("attackScenario", "attack_scenario"),
    "cashOut": ("cashOut", "cash_out"),
    "defenseCheck": ("defenseCheck", "defense_check"),
}
_TRUE = {"true", "yes", "y", "1", "keep", "kept", "vulnerable", "exploitable"}
_FALSE = {"false", "no", "n", "0", "discard", "discarded", "drop", "safe", "not vulnerable"}


@dataclass
class FilterVerdict:
    group_key: str
    keep: bool
    answers: dict[str, str] = field(default_factory=dict)
    raw_response: str = ""
    defaulted: bool = False  # set when the response could not be parsed and the fail-open default applied

    def to_json(self) -> dict:
        return {"groupKey": self.group_key, "keep": self.keep, "answers": dict(self.answers),
                "defaulted": self.defaulted}


@dataclass
class SimulationVerdict:
    group_key: str
    vulnerable: bool
    vulnerable_functions: list[str] = field(default_factory=list)
    vulnerable_paths: list[list[str]] = field(default_factory=list)
    attack_explanation: str = ""
    steps: dict[str, str] = field(default_factory=dict)
    raw_response: str = ""
    undetermined: bool = False

    def to_json(self) -> dict:
        return {"groupKey": self.group_key, "vulnerable": self.vulnerable,
                "vulnerableFunctions": list(self.vulnerable_functions),
                "vulnerablePaths": [list(p) for p in self.vulnerable_paths],
                "attackExplanation": self.attack_explanation, "steps": dict(self.steps),
                "undetermined": self.undetermined}


def normalize_bool(value: Any) -> Optional[bool]:
    if isinstance(value, bool):
        return value
    if isinstance(value, (int, float)) and value in (0, 1):
        return bool(value)
    if isinstance(value, str):
        v = value.strip().lower()
        if v in _TRUE:
            return True
        if v in _FALSE:
            return False
    return None


def iter_documents(raw: str) -> Iterator[Any]:
    """Every JSON object or array embedded in ``raw``, in order of appearance."""
    decoder = json.JSONDecoder()
    i = 0
    while i < len(raw):
        if raw[i] in "{[":
            try:
                doc, end = decoder.raw_decode(raw, i)
            except json.JSONDecodeError:
                i += 1
                continue
            yield doc
            i = end
        else:
            i += 1


def _pick(doc: dict, names: tuple[str, ...]) -> Any:
    for n in names:
        if n in doc:
            return doc[n]
    return None


def _text(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, str):
        return value.strip()
    return json.dumps(value, sort_keys=True)


def _filter_from(doc: Any, group_key: str, raw: str) -> Optional[FilterVerdict]:
    if not isinstance(doc, dict):
        return None
    keep = normalize_bool(_pick(doc, ("keep", "verdict", "decision")))
    if keep is None:
        return None
    answers = {k: _text(_pick(doc, names)) for k, names in ANSWER_FIELDS.items()}
    if not keep and not any(answers.values()):
        return None
    key = doc.get("group") if isinstance(doc.get("group"), str) else group_key
    return FilterVerdict(key or group_key, keep, answers, raw)


def _simulation_from(doc: Any, group_key: str, raw: str) -> Optional[SimulationVerdict]:
    if not isinstance(doc, dict):
        return None
    vulnerable = normalize_bool(_pick(doc, ("verdict", "vulnerable")))
    if vulnerable is None:
        return None
    fns = _pick(doc, ("vulnerableFunctions", "vulnerable_functions")) or []
    paths = _pick(doc, ("vulnerablePaths", "vulnerable_paths")) or []
    explanation = _text(_pick(doc, ("attackExplanation", "attack_explanation", "explanation")))
    if not isinstance(fns, list) or not isinstance(paths, list):
        return None
    fns = [str(f) for f in fns]
    if vulnerable and (not fns or not explanation):
        return None
    steps_doc = doc.get("steps") if isinstance(doc.get("steps"), dict) else {}
    steps = {k: _text(_pick(steps_doc, names)) for k, names in STEP_FIELDS.items()}
    norm_paths = [[str(s) for s in p] if isinstance(p, list) else [str(p)] for p in paths]
    return SimulationVerdict(group_key, vulnerable, fns, norm_paths, explanation, steps, raw)


def parse_verdict(raw: str, stage: str, group_key: str = ""):
    """First valid verdict document in ``raw`` for ``stage``; raises unparseable-response."""
    build = _filter_from if stage == FILTERING else _simulation_from
    if stage not in (FILTERING, SIMULATION):
        raise ValueError(f"unknown stage {stage!r}")
    for doc in iter_documents(raw or ""):
        v = build(doc, group_key, raw)
        if v is not None:
            return v
    raise FlashscanError("unparseable-response", f"no valid {stage} document in response")


def parse_filter_batch(raw: str, group_keys: list[str]) -> list[FilterVerdict]:
    """Verdicts for a concatenated filtering request, one per key in order."""
    if len(group_keys) == 1:
        for doc in iter_documents(raw or ""):
            if isinstance(doc, dict) and isinstance(doc.get("verdicts"), list) and len(doc["verdicts"]) == 1:
                v = _filter_from(doc["verdicts"][0], group_keys[0], raw)
                if v is not None:
                    v.group_key = group_keys[0]
                    return [v]
            v = _filter_from(doc, group_keys[0], raw)
            if v is not None:
                v.group_key = group_keys[0]
                return [v]
        raise FlashscanError("unparseable-response", "no valid filtering document in response")
    for doc in iter_documents(raw or ""):
        items = doc.get("verdicts") if isinstance(doc, dict) else doc if isinstance(doc, list) else None
        if not isinstance(items, list) or len(items) != len(group_keys):
            continue
        out = []
        for item, key in zip(items, group_keys):
            v = _filter_from(item, key, raw)
            if v is None:
                break
            v.group_key = key
            out.append(v)
        else:
            return out
    raise FlashscanError("unparseable-response", f"no filtering document with {len(group_keys)} verdicts")
