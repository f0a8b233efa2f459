"""Path grouping by (source function, sink function, critical operations)."""

from __future__ import annotations

import hashlib
from dataclasses import asdict, dataclass, field
from typing import Iterable, Optional

from .config import AnalysisConfig
from .ir.model import ContractIR, FunctionIR
from .patterns import privilege_matches, temporal_matches
from .taint.model import Descriptor, PRICE_SOURCES, TaintPath

CRITICAL_KINDS = ("ExternalCall", "SStore")
EXCERPT_LINES = 120


@dataclass(frozen=True)
class GroupKey:
    source_function: str
    sink_function: str
    critical_ops: frozenset[Descriptor]

    def rendered_ops(self) -> list[str]:
        return sorted({render_descriptor(d) for d in self.critical_ops})

    def digest(self) -> str:
        text = repr(sorted(self.critical_ops))
        return hashlib.sha256(text.encode()).hexdigest()[:16]

    def sort_key(self) -> tuple:
        return (self.source_function, self.sink_function, self.digest())

    def render(self) -> str:
        return f"<{self.source_function}, {self.sink_function}, {{{', '.join(self.rendered_ops())}}}>"


def render_descriptor(d: Descriptor) -> str:
    kind, key, _ = d
    if kind == "ExternalCall":
        return f"EC:{key}"
    if kind == "SStore":
        return f"SSTORE:{key.split('[')[0].split('.')[0]}"
    return f"{kind}:{key}"


def is_critical(d: Descriptor) -> bool:
    return d[0] in CRITICAL_KINDS


def compute_key(path: TaintPath) -> GroupKey:
    return GroupKey(path.source_function, path.sink_function,
                    frozenset(d for d in path.descriptors if is_critical(d)))


@dataclass
class PathGroup:
    key: GroupKey
    members: list[TaintPath]
    representative: TaintPath


def _rep_order(p: TaintPath) -> tuple:
    # longest first; ties go to the lexicographically smallest step sequence
    return (-len(p), p.steps, p.sink[1], p.source_id)


def group_paths(paths: Iterable[TaintPath]) -> list[PathGroup]:
    buckets: dict[GroupKey, list[TaintPath]] = {}
    for p in paths:
        buckets.setdefault(compute_key(p), []).append(p)
    groups = []
    for key in sorted(buckets, key=GroupKey.sort_key):
        members = sorted(set(buckets[key]), key=_rep_order)
        groups.append(PathGroup(key, members, members[0]))
    return groups


# --- summaries -----------------------------------------------------------------

@dataclass
class GroupSummary:
    key: str
    source_function: str
    source_signature: str
    source_excerpt: str
    sink_function: str
    sink_signature: str
    sink_excerpt: str
    critical_operations: list[str]
    affected_states: list[str]
    steps: list[str]
    source_kinds: list[str] = field(default_factory=list)
    sink_kinds: list[str] = field(default_factory=list)
    flows: list[str] = field(default_factory=list)  # "<sourceKind> -> <sinkKind>" per member
    price_sources: list[str] = field(default_factory=list)  # callee names of DEX/oracle sources
    source_modifiers: list[str] = field(default_factory=list)
    access_guards: list[str] = field(default_factory=list)
    cooldown_guards: list[str] = field(default_factory=list)

    def binding(self, placeholder: str) -> str:
        if placeholder == "source function":
            return f"{self.source_function}\n{self.source_signature}\n{self.source_excerpt}".rstrip()
        if placeholder == "sink function":
            return f"{self.sink_function}\n{self.sink_signature}\n{self.sink_excerpt}".rstrip()
        if placeholder == "affected states":
            return ", ".join(self.affected_states) if self.affected_states else "none"
        if placeholder == "critical operations":
            return ", ".join(self.critical_operations) if self.critical_operations else "none"
        raise KeyError(placeholder)

    def to_json(self) -> dict:
        return asdict(self)

    def to_text(self) -> str:
        lines = [f"group {self.key}",
                 f"source function: {self.source_signature}",
                 f"sink function: {self.sink_signature}",
                 f"critical operations: {self.binding('critical operations')}",
                 f"affected states: {self.binding('affected states')}",
                 "representative path:"]
        lines += [f"  {s}" for s in self.steps]
        return "\n".join(lines) + "\n"


def _line_of(text: str, offset: int) -> int:
    return text.count("\n", 0, max(0, min(offset, len(text))))


def function_excerpt(ir: ContractIR, fn: Optional[FunctionIR], focus: Iterable[int] = (),
                     cap: int = EXCERPT_LINES) -> str:
    """Source lines of ``fn`` (or its instruction listing without source), capped around ``focus`` offsets."""
    if fn is None:
        return ""
    if ir.source and fn.span:
        start, end = fn.span
        first = _line_of(ir.source, start)
        all_lines = ir.source.split("\n")
        last = _line_of(ir.source, max(start, end - 1))
        lines = all_lines[first:last + 1]
        focus_lines = sorted(_line_of(ir.source, o) - first for o in focus)
    else:
        lines = [f"{i.id} {i.describe()}" for i in fn.instructions]
        focus_lines = sorted(int(o) for o in focus if 0 <= int(o) < len(lines)) if not ir.source else []
    if len(lines) <= cap:
        return "\n".join(lines)
    center = (focus_lines[0] + focus_lines[-1]) // 2 if focus_lines else 0
    lo = max(0, min(center - cap // 2, len(lines) - cap))
    return "\n".join(lines[lo:lo + cap])


def summarize_group(group: PathGroup, ir: ContractIR, config: Optional[AnalysisConfig] = None) -> GroupSummary:
    config = config or AnalysisConfig()
    rep = group.representative
    src_fn = ir.function(group.key.source_function)
    sink_fn = ir.function(group.key.sink_function)

    def focus(fn: Optional[FunctionIR]) -> list[int]:
        if fn is None:
            return []
        steps = [s for s in rep.steps if s.func == fn.index]
        if ir.source:
            return [ir.instruction(s).span[0] for s in steps if ir.instruction(s).span]
        return [s.idx for s in steps]

    affected = sorted({ir.state_var_by_slot(s.base_slot).name if ir.state_var_by_slot(s.base_slot) else s.render()
                       for p in group.members for s in p.affected_slots})
    price = sorted({ir.instruction(p.source[0]).callee or "" for p in group.members
                    if p.source_kind in PRICE_SOURCES})
    on_path = _path_functions(ir, group)
    access, cooldown = [], []
    for fn in on_path:
        access += [f"{m.function}: {m.evidence}" for m in privilege_matches(ir, fn, config)]
        cooldown += [f"{m.function}: {m.evidence}" for m in temporal_matches(ir, fn)]
    return GroupSummary(
        key=group.key.render(),
        source_function=group.key.source_function,
        source_signature=src_fn.signature if src_fn else group.key.source_function,
        source_excerpt=function_excerpt(ir, src_fn, focus(src_fn)),
        sink_function=group.key.sink_function,
        sink_signature=sink_fn.signature if sink_fn else group.key.sink_function,
        sink_excerpt=function_excerpt(ir, sink_fn, focus(sink_fn)),
        critical_operations=group.key.rendered_ops(),
        affected_states=affected,
        steps=[f"{s} {ir.instruction(s).kind}: {ir.instruction(s).describe()}" for s in rep.steps],
        source_kinds=sorted({p.source_kind for p in group.members}),
        sink_kinds=sorted({p.sink_kind for p in group.members}),
        flows=sorted({f"{p.source_kind} -> {p.sink_kind}" for p in group.members}),
        price_sources=price,
        source_modifiers=[m.name for m in src_fn.modifiers] if src_fn else [],
        access_guards=sorted(set(access)),
        cooldown_guards=sorted(set(cooldown)),
    )


def _path_functions(ir: ContractIR, group: PathGroup) -> list[FunctionIR]:
    idx = sorted({s.func for p in group.members for s in p.steps})
    fns = [ir.functions[i] for i in idx]
    sink = ir.function(group.key.sink_function)
    if sink is not None and sink not in fns:
        fns.append(sink)
    return fns


def groups_debug_json(groups: list[PathGroup], summaries: list[GroupSummary]) -> dict:
    return {"groups": [{
        "key": g.key.render(),
        "members": len(g.members),
        "representative": [str(s) for s in g.representative.steps],
        "summary": s.to_json(),
    } for g, s in zip(groups, summaries)]}
