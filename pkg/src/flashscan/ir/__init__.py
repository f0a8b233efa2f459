"""Instruction-level IR: lowering, control flow, facts and interchange."""

from .cfg import ICFG, build_icfg, control_dependence, post_dominators, successors
from .facts import Facts, extract_primitives
from .interchange import SCHEMA, export_ir_json, import_ir_json
from .lower import LoweringError, lower_contract, lower_unit
from .model import (
    CallReturn, Const, ContractIR, FunctionIR, InstId, Instruction, Local,
    ModifierUse, Param, SlotId, StateSlot, StateVarInfo, TxProperty, ValueRef,
)

__all__ = [
    "ICFG", "SCHEMA", "CallReturn", "Const", "ContractIR", "Facts", "FunctionIR",
    "InstId", "Instruction", "Local", "LoweringError", "ModifierUse", "Param",
    "SlotId", "StateSlot", "StateVarInfo", "TxProperty", "ValueRef", "build_icfg",
    "control_dependence", "export_ir_json", "extract_primitives", "import_ir_json",
    "lower_contract", "lower_unit", "post_dominators", "successors",
]
