"""Taint labels, the taint map and reconstructed paths."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

from ..ir.model import CallReturn, InstId, Local, Param, SlotId, ValueRef

SOURCE_KINDS = ("PublicInput", "TxProperty", "OracleViewCall", "KnownDexCall")
SINK_KINDS = ("EtherTokenTransfer", "InternalLedgerUpdate", "EconomicStateWrite")
PRICE_SOURCES = ("KnownDexCall", "OracleViewCall")

Carrier = Union[Local, Param, CallReturn, SlotId]


@dataclass(frozen=True, order=True)
class TaintLabel:
    source_id: str
    source_kind: str
    provenance: tuple[InstId, ...]
    implicit: bool = False

    def extend(self, steps: tuple[InstId, ...], implicit: bool = False) -> "TaintLabel":
        return TaintLabel(self.source_id, self.source_kind, self.provenance + steps, self.implicit or implicit)


@dataclass
class TaintMap:
    var_taints: dict[ValueRef, set[TaintLabel]] = field(default_factory=dict)
    slot_taints: dict[SlotId, set[TaintLabel]] = field(default_factory=dict)

    def _table(self, carrier: Carrier) -> dict:
        return self.slot_taints if isinstance(carrier, SlotId) else self.var_taints

    def labels(self, carrier: Carrier) -> set[TaintLabel]:
        return self._table(carrier).get(carrier, set())

    def add(self, carrier: Carrier, label: TaintLabel) -> bool:
        bucket = self._table(carrier).setdefault(carrier, set())
        if label in bucket:
            return False
        bucket.add(label)
        return True

    def copy(self) -> "TaintMap":
        return TaintMap({k: set(v) for k, v in self.var_taints.items()},
                        {k: set(v) for k, v in self.slot_taints.items()})

    def carriers(self) -> set[Carrier]:
        return {k for k, v in self.var_taints.items() if v} | {k for k, v in self.slot_taints.items() if v}

    def tainted_pairs(self) -> set[tuple[Carrier, str]]:
        """(carrier, source id) pairs; the carrier-level view used by oracle comparisons."""
        out = set()
        for table in (self.var_taints, self.slot_taints):
            for k, labels in table.items():
                for lab in labels:
                    out.add((k, lab.source_id))
        return out

    def issubset(self, other: "TaintMap") -> bool:
        for mine, theirs in ((self.var_taints, other.var_taints), (self.slot_taints, other.slot_taints)):
            for k, labels in mine.items():
                if not labels <= theirs.get(k, set()):
                    return False
        return True

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, TaintMap):
            return NotImplemented
        strip = lambda t: {k: v for k, v in t.items() if v}  # noqa: E731
        return strip(self.var_taints) == strip(other.var_taints) and strip(self.slot_taints) == strip(other.slot_taints)

    def size(self) -> int:
        return sum(len(v) for v in self.var_taints.values()) + sum(len(v) for v in self.slot_taints.values())


Descriptor = tuple[str, str, tuple[str, ...]]


@dataclass(frozen=True)
class TaintPath:
    source: tuple[InstId, str]
    sink: tuple[InstId, str]
    steps: tuple[InstId, ...]
    source_function: str
    sink_function: str
    affected_slots: frozenset[SlotId] = frozenset()
    source_id: str = ""
    # canonical (kind, callee-or-slot, operand kinds) per step; independent of instruction ids
    descriptors: tuple[Descriptor, ...] = ()
    implicit: bool = False

    def __len__(self) -> int:
        return len(self.steps)

    @property
    def source_kind(self) -> str:
        return self.source[1]

    @property
    def sink_kind(self) -> str:
        return self.sink[1]


def carrier_id(c: Carrier) -> str:
    """Stable textual id for a taint carrier."""
    if isinstance(c, Local):
        return f"local:{c.function}.{c.name}#{c.version}"
    if isinstance(c, Param):
        return f"param:{c.function}#{c.index}"
    if isinstance(c, CallReturn):
        return f"ret:{c.inst}#{c.index}"
    if isinstance(c, SlotId):
        return f"slot:{c.base_slot}" + "".join(f"/{k}={v}" for k, v in c.path)
    return f"other:{c}"
