"""Prompt templates for the path-filtering and attack-simulation stages."""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Optional

from ..errors import FlashscanError
from ..grouping import GroupSummary

FILTERING = "PathFiltering"
SIMULATION = "AttackSimulation"
STAGES = (FILTERING, SIMULATION)

PLACEHOLDERS = ("source function", "sink function", "affected states", "critical operations")
PLACEHOLDER_RE = re.compile(r"<(?:source function|sink function|affected states|critical operations)>")

FILTER_HEADER = """\
Role: you audit Solidity contracts for price-manipulation bugs that a flash-loan-funded attacker can trigger.
Each candidate below is a data-flow path from an attacker-reachable entry point to an operation that moves value or rewrites accounting state.
Apply the three checks to every candidate and discard it if any check rules it out.

Q1 Access control: can only a privileged account (owner-only modifier, sender equality check) reach the source function? If yes, discard.
Q2 Economic intent: would an inflated or deflated price read along this path let the caller receive more tokens, ether or credited balance than they paid for? If no, discard.
Q3 Mitigation: does the path already defend itself, for example a cooldown between actions, a time-weighted price or a bound on the amount? If yes, discard.
"""

FILTER_INSTANCE = """\
--- candidate {index}: {key}
Source function:
<source function>
Sink function:
<sink function>
Affected states: <affected states>
Critical operations on the path (external calls and state writes): <critical operations>
"""

FILTER_FOOTER = """\
Reply with one JSON document and nothing else:
{"verdicts": [{"group": "<candidate key>", "accessControl": "...", "economicIntent": "...", "mitigation": "...", "keep": true}]}
List one entry per candidate in the order given. When keep is false, the answer that rules the candidate out must say why.
"""

SIMULATION_TEMPLATE = """\
Role: you are a security auditor reviewing one high-potential price-manipulation path that survived rule-based filtering.
Work through the four steps in order before giving a verdict.

Step 1, price source: name the on-chain value read on this path that a large, flash-loan-funded swap could move within one transaction. Candidate reads: {price_hint}.
Step 2, attack scenario: starting from the entry point, write out the call sequence an attacker would submit, from borrowing funds to triggering the read.
Step 3, cash-out: explain how the distorted value is turned into profit at the sink, and which state or transfer pays the attacker.
Step 4, defense check: look for anything that would stop the attack, such as a TWAP oracle, reentrancy guards, cooldowns, access control or amount caps.

Entry point (source function):
<source function>

Sink function:
<sink function>

Affected states: <affected states>
Critical operations on the path: <critical operations>
Representative path:
{steps}

Reply with one JSON document:
{{"verdict": true, "vulnerableFunctions": ["..."], "vulnerablePaths": [["..."]], "attackExplanation": "...", "steps": {{"priceSource": "...", "attackScenario": "...", "cashOut": "...", "defenseCheck": "..."}}}}
Set verdict to false when the path cannot be exploited.
"""


@dataclass
class PromptInstance:
    stage: str
    group_key: str
    rendered_text: str
    placeholder_bindings: dict[str, str]
    body: str = ""
    summary: Optional[GroupSummary] = field(default=None, compare=False, repr=False)

    @property
    def token_estimate(self) -> int:
        return estimate_tokens(self.rendered_text)


def estimate_tokens(text: str) -> int:
    """Rough token count: four characters per token."""
    return math.ceil(len(text) / 4)


def _bindings(summary: GroupSummary) -> dict[str, str]:
    out = {}
    for name in PLACEHOLDERS:
        value = summary.binding(name).strip()
        if not value:
            raise FlashscanError("summary-incomplete", f"no text for <{name}> in group {summary.key}")
        out[name] = value
    return out


def _fill(template: str, bindings: dict[str, str]) -> str:
    # single pass so bound text containing a placeholder-like token is never re-expanded
    return PLACEHOLDER_RE.sub(lambda m: bindings[m.group(0)[1:-1]], template)


def render_filter_prompt(summary: GroupSummary, index: int = 1) -> PromptInstance:
    bindings = _bindings(summary)
    body = _fill(FILTER_INSTANCE.format(index=index, key=summary.key), bindings)
    text = "\n".join([FILTER_HEADER, body, FILTER_FOOTER])
    return PromptInstance(FILTERING, summary.key, text, bindings, body, summary)


def build_filter_request(instances: list[PromptInstance]) -> str:
    """Concatenate several filtering instances into one request."""
    bodies = []
    for k, inst in enumerate(instances, 1):
        first, _, rest = inst.body.partition("\n")
        bodies.append(f"--- candidate {k}: {inst.group_key}\n{rest}")
    return "\n".join([FILTER_HEADER, *bodies, FILTER_FOOTER])


def render_simulation_prompt(summary: GroupSummary, filter_verdict) -> PromptInstance:
    if not filter_verdict.keep:
        raise FlashscanError("not-filtered", f"group {summary.key} was discarded by the filtering stage")
    bindings = _bindings(summary)
    hint = ", ".join(summary.price_sources) if summary.price_sources else "none identified statically"
    template = SIMULATION_TEMPLATE.format(price_hint=hint, steps="\n".join(f"  {s}" for s in summary.steps))
    text = _fill(template, bindings)
    return PromptInstance(SIMULATION, summary.key, text, bindings, text, summary)


def unexpanded_placeholders(text: str) -> list[str]:
    return PLACEHOLDER_RE.findall(text)
