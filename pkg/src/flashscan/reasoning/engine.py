"""Reasoning engines: a deterministic offline rule engine and a remote chat-completion client."""

from __future__ import annotations

import json
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Protocol

import httpx

from ..config import AnalysisConfig
from ..errors import FlashscanError
from ..grouping import GroupSummary
from ..taint.model import PRICE_SOURCES
from .prompts import FILTERING, SIMULATION, PromptInstance, build_filter_request
from .verdicts import FilterVerdict, SimulationVerdict, parse_filter_batch, parse_verdict

SYSTEM_MESSAGE = "You are a careful smart contract security auditor. Answer only with the requested JSON."


@dataclass
class EngineConfig:
    mode: str = "offline"
    endpoint: Optional[str] = None
    model: str = "default"
    api_key_env: Optional[str] = None
    timeout_secs: float = 60.0
    max_retries: int = 2
    temperature: float = 0.0
    batch_size: int = 8
    concurrency: int = 4
    token_budget: int = 12_000

    def validate(self) -> None:
        if self.mode not in ("offline", "remote"):
            raise FlashscanError("bad-config", f"unknown engine mode {self.mode!r}")
        if self.mode == "remote" and (not self.endpoint or not self.api_key_env):
            raise FlashscanError("bad-config", "remote mode needs --endpoint and --api-key-env")
        if not 1 <= self.batch_size <= 8:
            raise FlashscanError("bad-config", "batch size must be between 1 and 8")
        if self.concurrency < 1 or self.max_retries < 0 or self.timeout_secs <= 0:
            raise FlashscanError("bad-config", "concurrency, retries and timeout must be positive")

    def to_json(self) -> dict:
        """Configuration echo; holds the variable name only, never its value."""
        out = {"mode": self.mode, "model": self.model, "temperature": self.temperature,
               "batchSize": self.batch_size, "concurrency": self.concurrency,
               "maxRetries": self.max_retries, "timeoutSecs": self.timeout_secs}
        if self.mode == "remote":
            out["endpoint"] = self.endpoint
            out["apiKeyEnv"] = self.api_key_env
        return out


class Backend(Protocol):
    def respond(self, stage: str, prompts: list[PromptInstance], text: str) -> str: ...


# --- offline rule engine -----------------------------------------------------------

class OfflineBackend:
    """Mechanical stand-in for a model: answers from the group summary and the rule table."""

    def __init__(self, rules: Optional[AnalysisConfig] = None):
        self.rules = rules or AnalysisConfig()

    def filter_one(self, s: GroupSummary) -> dict:
        guarded = [m for m in s.source_modifiers if m in self.rules.privileged_modifiers]
        price = [k for k in s.source_kinds if k in PRICE_SOURCES]
        if guarded:
            access = f"discard: {s.source_function} is restricted by {', '.join(guarded)}"
        else:
            access = f"{s.source_function} carries no privileged modifier"
        if price or s.affected_states:
            parts = []
            if price:
                parts.append(f"price read from {', '.join(s.price_sources) or ', '.join(price)}")
            if s.affected_states:
                parts.append(f"writes {', '.join(s.affected_states)}")
            economic = "; ".join(parts)
        else:
            economic = "discard: no price read and no accounting state on the path"
        if s.cooldown_guards:
            mitigation = f"discard: cooldown guard present ({s.cooldown_guards[0]})"
        else:
            mitigation = "no cooldown guard on the path"
        keep = not guarded and bool(price or s.affected_states) and not s.cooldown_guards
        return {"group": s.key, "accessControl": access, "economicIntent": economic,
                "mitigation": mitigation, "keep": keep}

    def simulate_one(self, s: GroupSummary) -> dict:
        hits = sorted(f for f in s.flows if f.split(" -> ")[0] in PRICE_SOURCES)
        price = ", ".join(s.price_sources) or "none"
        if not hits:
            return {"verdict": False, "vulnerableFunctions": [], "vulnerablePaths": [],
                    "attackExplanation": "no manipulable price read reaches a transfer or ledger write",
                    "steps": {"priceSource": "none", "attackScenario": "not applicable",
                              "cashOut": "not applicable", "defenseCheck": "not needed"}}
        fns = sorted({s.source_function, s.sink_function})
        return {
            "verdict": True,
            "vulnerableFunctions": fns,
            "vulnerablePaths": [list(s.steps)],
            "attackExplanation": (f"{s.source_function} reads {price}; the value flows ({'; '.join(hits)}) "
                                  f"into {s.sink_function}, so skewing the pool before the call inflates what is paid out"),
            "steps": {
                "priceSource": price,
                "attackScenario": f"borrow, swap to skew the pool, call {s.source_function}",
                "cashOut": f"{s.sink_function} pays or credits the inflated amount",
                "defenseCheck": "no TWAP, cooldown or access control found on the path",
            },
        }

    def respond(self, stage: str, prompts: list[PromptInstance], text: str) -> str:
        if stage == FILTERING:
            doc = {"verdicts": [self.filter_one(p.summary) for p in prompts]}
        else:
            doc = self.simulate_one(prompts[0].summary)
        return json.dumps(doc, sort_keys=True)


# --- remote client -------------------------------------------------------------------

class RemoteBackend:
    def __init__(self, config: EngineConfig, transport: Optional[httpx.BaseTransport] = None):
        self.config = config
        self.transport = transport

    def _key(self) -> str:
        value = os.environ.get(self.config.api_key_env or "")
        if not value:
            raise FlashscanError("engine-unreachable", f"credential variable {self.config.api_key_env} is not set")
        return value

    def respond(self, stage: str, prompts: list[PromptInstance], text: str) -> str:
        key = self._key()
        body = {"model": self.config.model, "temperature": self.config.temperature,
                "messages": [{"role": "system", "content": SYSTEM_MESSAGE},
                             {"role": "user", "content": text}]}
        last: Optional[Exception] = None
        for attempt in range(self.config.max_retries + 1):
            try:
                with httpx.Client(transport=self.transport, timeout=self.config.timeout_secs) as client:
                    r = client.post(self.config.endpoint, json=body,
                                    headers={"Authorization": f"Bearer {key}"})
                if r.status_code in (401, 403):
                    raise FlashscanError("engine-unreachable", f"endpoint rejected the credential ({r.status_code})")
                r.raise_for_status()
                doc = r.json()
                return doc["choices"][0]["message"]["content"]
            except FlashscanError:
                raise
            except (httpx.HTTPError, ValueError, KeyError, IndexError, TypeError) as e:
                last = e
                if attempt < self.config.max_retries:
                    time.sleep(min(0.05 * 2 ** attempt, 1.0))
        raise FlashscanError("engine-unreachable", f"no usable response after {self.config.max_retries + 1} attempts: {last}")


def make_backend(config: EngineConfig, rules: Optional[AnalysisConfig] = None,
                 transport: Optional[httpx.BaseTransport] = None) -> Backend:
    config.validate()
    if config.mode == "offline":
        return OfflineBackend(rules)
    return RemoteBackend(config, transport)


# --- stage runner -----------------------------------------------------------------------

@dataclass
class StageLog:
    """Request/response transcripts, in request order."""
    entries: list[dict] = field(default_factory=list)


def _run_filter_batch(backend: Backend, batch: list[PromptInstance], config: EngineConfig) -> tuple[list[FilterVerdict], list[dict]]:
    text = build_filter_request(batch) if len(batch) > 1 else batch[0].rendered_text
    keys = [p.group_key for p in batch]
    log = []
    for _ in range(config.max_retries + 1):
        raw = backend.respond(FILTERING, batch, text)
        log.append({"stage": FILTERING, "groups": keys, "request": text, "response": raw})
        try:
            return parse_filter_batch(raw, keys), log
        except FlashscanError:
            continue
    # fail open: keep every group of an unreadable batch
    return [FilterVerdict(k, True, {"accessControl": "", "economicIntent": "", "mitigation": ""},
                          raw, defaulted=True) for k in keys], log


def _run_simulation(backend: Backend, prompt: PromptInstance, config: EngineConfig) -> tuple[SimulationVerdict, list[dict]]:
    log = []
    raw = ""
    for _ in range(config.max_retries + 1):
        raw = backend.respond(SIMULATION, [prompt], prompt.rendered_text)
        log.append({"stage": SIMULATION, "groups": [prompt.group_key], "request": prompt.rendered_text, "response": raw})
        try:
            v = parse_verdict(raw, SIMULATION, prompt.group_key)
            v.group_key = prompt.group_key
            return v, log
        except FlashscanError:
            continue
    return SimulationVerdict(prompt.group_key, False, raw_response=raw, undetermined=True), log


def run_stage(prompts: list[PromptInstance], engine: EngineConfig, backend: Optional[Backend] = None,
              log: Optional[StageLog] = None, rules: Optional[AnalysisConfig] = None,
              transport: Optional[httpx.BaseTransport] = None) -> list:
    """One verdict per prompt, in input order. All prompts must belong to the same stage."""
    if not prompts:
        return []
    stages = {p.stage for p in prompts}
    if len(stages) != 1:
        raise ValueError("prompts from different stages cannot share a run")
    stage = stages.pop()
    backend = backend or make_backend(engine, rules, transport)
    if stage == FILTERING:
        units = [prompts[i:i + engine.batch_size] for i in range(0, len(prompts), engine.batch_size)]
        work = lambda unit: _run_filter_batch(backend, unit, engine)  # noqa: E731
    else:
        units = prompts
        work = lambda unit: _run_simulation(backend, unit, engine)  # noqa: E731
    if engine.concurrency > 1 and len(units) > 1:
        with ThreadPoolExecutor(max_workers=engine.concurrency) as pool:
            results = list(pool.map(work, units))
    else:
        results = [work(u) for u in units]
    verdicts = []
    for out, entries in results:
        if log is not None:
            log.entries.extend(entries)
        verdicts.extend(out if isinstance(out, list) else [out])
    return verdicts
