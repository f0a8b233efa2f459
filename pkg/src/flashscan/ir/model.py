"""Instruction-level contract IR."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, NamedTuple, Optional, Union

INSTRUCTION_KINDS = (
    "Entry", "Assign", "BinOp", "InternalCall", "ExternalCall", "LowLevelCall",
    "SStore", "SLoad", "Require", "Revert", "Return", "Jump", "CondJump", "Phi",
)
BINOPS = ("+", "-", "*", "/", "%", "<", "<=", ">", ">=", "==", "!=", "&&", "||")
LOW_LEVEL_OPS = ("call", "send", "transfer")
CALL_KINDS = ("InternalCall", "ExternalCall", "LowLevelCall")
TX_PROPERTIES = ("msg.sender", "msg.value", "msg.data", "msg.sig", "block.timestamp",
                 "block.number", "tx.origin", "tx.gasprice")

UNKNOWN_KEY = "*"


class InstId(NamedTuple):
    func: int
    idx: int

    def __str__(self) -> str:
        return f"{self.func}:{self.idx}"

    @classmethod
    def parse(cls, text: str) -> "InstId":
        a, b = text.split(":")
        return cls(int(a), int(b))


# --- storage slots -----------------------------------------------------------

@dataclass(frozen=True)
class SlotId:
    """Abstract storage location: a state variable plus an abstracted access path.

    Path elements are ``("key", k)``, ``("index", k)`` or ``("member", name)``
    where ``k`` is an abstract key: ``"*"`` (unknown), ``"const:<lit>"`` or
    ``"tx:<property>"``.
    """
    base_slot: int
    path: tuple[tuple[str, str], ...] = ()
    is_mapping_base: bool = field(default=False, compare=False)
    name: str = field(default="", compare=False)

    def aliases(self, other: "SlotId") -> bool:
        if self.base_slot != other.base_slot:
            return False
        for (ka, va), (kb, vb) in zip(self.path, other.path):
            if ka != kb:
                return False
            if va != vb and va != UNKNOWN_KEY and vb != UNKNOWN_KEY:
                return False
        return True

    def render(self) -> str:
        out = self.name or f"slot{self.base_slot}"
        for kind, key in self.path:
            if kind == "member":
                out += f".{key}"
            else:
                shown = key.split(":", 1)[1] if ":" in key else key
                out += f"[{shown}]"
        return out


# --- value references --------------------------------------------------------

@dataclass(frozen=True)
class Local:
    function: str
    name: str
    version: int = 0

    kind = "Local"

    def __str__(self) -> str:
        return f"{self.name}_{self.version}"


@dataclass(frozen=True)
class Param:
    function: str
    index: int

    kind = "Param"

    def __str__(self) -> str:
        return f"param{self.index}@{self.function}"


@dataclass(frozen=True)
class StateSlot:
    slot: SlotId

    kind = "StateSlot"

    def __str__(self) -> str:
        return self.slot.render()


@dataclass(frozen=True)
class TxProperty:
    name: str

    kind = "TxProperty"

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class Const:
    literal: str

    kind = "Const"

    def __str__(self) -> str:
        return self.literal


@dataclass(frozen=True)
class CallReturn:
    inst: InstId
    index: int = 0

    kind = "CallReturn"

    def __str__(self) -> str:
        return f"ret{self.index}@{self.inst}"


ValueRef = Union[Local, Param, StateSlot, TxProperty, Const, CallReturn]


# --- instructions ------------------------------------------------------------

@dataclass
class Instruction:
    id: InstId
    kind: str
    operands: tuple[ValueRef, ...] = ()
    result: Optional[ValueRef] = None
    span: Optional[tuple[int, int]] = None
    op: Optional[str] = None  # BinOp operator, LowLevelCall flavour, Require flavour, Assign note
    callee: Optional[str] = None  # called function name
    target: Optional[str] = None  # interface/contract type of an external callee
    mutability: Optional[str] = None  # declared mutability of an external callee
    receiver: Optional[ValueRef] = None
    targets: tuple[int, ...] = ()  # successor indices for Jump / CondJump
    extra: dict[str, Any] = field(default_factory=dict)

    @property
    def slot(self) -> Optional[SlotId]:
        if self.kind in ("SStore", "SLoad") and self.operands and isinstance(self.operands[0], StateSlot):
            return self.operands[0].slot
        return None

    @property
    def stored_value(self) -> Optional[ValueRef]:
        if self.kind == "SStore" and len(self.operands) > 1:
            return self.operands[1]
        return None

    @property
    def args(self) -> tuple[ValueRef, ...]:
        return self.operands if self.kind in CALL_KINDS else ()

    def describe(self) -> str:
        res = f"{self.result} = " if self.result is not None else ""
        ops = ", ".join(str(o) for o in self.operands)
        if self.kind == "BinOp":
            return f"{res}{self.operands[0]} {self.op} {self.operands[1]}"
        if self.kind in ("ExternalCall", "LowLevelCall"):
            recv = f"{self.receiver}." if self.receiver is not None else ""
            name = self.callee or self.op
            return f"{res}{recv}{name}({ops})"
        if self.kind == "InternalCall":
            return f"{res}{self.callee}({ops})"
        if self.kind == "SStore":
            return f"{self.operands[0]} := {self.operands[1]}"
        if self.kind == "SLoad":
            return f"{res}load {self.operands[0]}"
        if self.kind in ("Jump", "CondJump"):
            tgt = ", ".join(str(t) for t in self.targets)
            return f"{self.kind.lower()} {ops} -> {tgt}".replace("  ", " ")
        label = self.kind if self.op is None else f"{self.kind}[{self.op}]"
        return f"{res}{label}({ops})"


@dataclass
class ModifierUse:
    name: str
    args: list[str] = field(default_factory=list)


@dataclass
class StateVarInfo:
    name: str
    type: str
    slot: int
    is_mapping: bool = False
    constant: bool = False


@dataclass
class FunctionIR:
    name: str
    index: int
    visibility: str
    mutability: str = "default"
    kind: str = "function"
    params: list[tuple[str, str]] = field(default_factory=list)
    returns: list[tuple[str, str]] = field(default_factory=list)
    modifiers: list[ModifierUse] = field(default_factory=list)
    instructions: list[Instruction] = field(default_factory=list)
    span: Optional[tuple[int, int]] = None

    @property
    def is_public(self) -> bool:
        return self.visibility in ("public", "external") and self.kind != "constructor"

    @property
    def signature(self) -> str:
        ps = ", ".join(f"{t} {n}".strip() for n, t in self.params)
        head = f"function {self.name}({ps}) {self.visibility}"
        if self.mutability != "default":
            head += f" {self.mutability}"
        for m in self.modifiers:
            head += f" {m.name}" + (f"({', '.join(m.args)})" if m.args else "")
        if self.returns:
            head += " returns (" + ", ".join(f"{t} {n}".strip() for n, t in self.returns) + ")"
        return head

    @property
    def entry(self) -> InstId:
        return InstId(self.index, 0)


@dataclass
class ContractIR:
    name: str
    state_vars: list[StateVarInfo] = field(default_factory=list)
    functions: list[FunctionIR] = field(default_factory=list)
    source: Optional[str] = None
    path: str = ""
    diagnostics: list = field(default_factory=list)

    def function(self, name: str) -> Optional[FunctionIR]:
        for fn in self.functions:
            if fn.name == name:
                return fn
        return None

    def instruction(self, iid: InstId) -> Instruction:
        return self.functions[iid.func].instructions[iid.idx]

    def function_of(self, iid: InstId) -> FunctionIR:
        return self.functions[iid.func]

    def instructions(self):
        for fn in self.functions:
            yield from fn.instructions

    def state_var(self, name: str) -> Optional[StateVarInfo]:
        for v in self.state_vars:
            if v.name == name:
                return v
        return None

    def state_var_by_slot(self, slot: int) -> Optional[StateVarInfo]:
        for v in self.state_vars:
            if v.slot == slot and not v.constant:
                return v
        return None
