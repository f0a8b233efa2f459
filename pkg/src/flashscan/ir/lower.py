"""Lower parsed contracts to the instruction-level IR.

Locals are versioned so each assignment defines a fresh value; Phi
instructions are placed at join points where incoming versions differ.
Storage is never renamed: every state access is an SLoad/SStore on an
abstract SlotId. Modifier bodies are inlined at their placeholder.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from typing import Callable, Optional

from ..config import ARITHMETIC_WRAPPERS
from ..frontend.nodes import (
    ArrayType, Assignment, BinaryOp, Block, BoolLit, Break, Conditional,
    Continue, ContractDecl, Diagnostic, DoWhile, ElementaryType, Emit, Expr,
    ExprStmt, For, FunctionCall, FunctionDecl, Identifier, If, IndexAccess,
    MappingType, MemberAccess, ModifierDecl, NewExpr, Node, NumberLit,
    Placeholder, Return, RevertStmt, SourceUnit, Span, Stmt, StringLit,
    TupleExpr, TupleVarDecl, TypeExpr, TypeName, UnaryOp, UserType, VarDecl,
    While,
)
from ..frontend.printer import print_type
from .model import (
    BINOPS, UNKNOWN_KEY, CallReturn, Const, ContractIR, FunctionIR, InstId,
    Instruction, Local, ModifierUse, Param, SlotId, StateSlot, StateVarInfo,
    TxProperty, ValueRef,
)

BUILTINS = frozenset({
    "keccak256", "sha256", "sha3", "ripemd160", "ecrecover", "addmod", "mulmod",
    "gasleft", "blockhash", "selfdestruct", "suicide", "type",
})
TX_MEMBERS = {
    ("msg", "sender"), ("msg", "value"), ("msg", "data"), ("msg", "sig"),
    ("block", "timestamp"), ("block", "number"), ("tx", "origin"), ("tx", "gasprice"),
}
ADDRESS_TYPES = ("address", "address payable", "payable")


class LoweringError(Exception):
    def __init__(self, span: Span, message: str):
        super().__init__(message)
        self.span = span


@dataclass
class _Loop:
    continue_jumps: list = field(default_factory=list)  # (Instruction, env)
    break_jumps: list = field(default_factory=list)


@dataclass
class UnitInfo:
    """Cross-contract facts the lowering needs: declared kinds and callee mutabilities."""
    kinds: dict[str, str] = field(default_factory=dict)
    mutability: dict[str, dict[str, str]] = field(default_factory=dict)

    @classmethod
    def from_unit(cls, unit: Optional[SourceUnit]) -> "UnitInfo":
        info = cls()
        if unit is None:
            return info
        for c in unit.contracts:
            info.kinds[c.name] = c.kind
            info.mutability[c.name] = {f.name: f.mutability for f in c.functions}
            for v in c.state_vars:
                # public state variables expose view getters
                if v.visibility == "public":
                    info.mutability[c.name].setdefault(v.name, "view")
        return info


class _ContractLowerer:
    def __init__(self, decl: ContractDecl, unit: UnitInfo, diags: list[Diagnostic]):
        self.decl = decl
        self.unit = unit
        self.diags = diags
        self.structs = {s.name: {m.name: m.type_name for m in s.members} for s in decl.structs}
        self.enums = {e.name for e in decl.enums}
        self.modifiers = {m.name: m for m in decl.modifiers}
        self.state: dict[str, tuple[StateVarInfo, TypeName]] = {}
        slot = 0
        self.state_infos: list[StateVarInfo] = []
        for v in decl.state_vars:
            is_map = isinstance(v.type_name, MappingType)
            if v.constant:
                info = StateVarInfo(v.name, print_type(v.type_name), -1, is_map, constant=True)
            else:
                info = StateVarInfo(v.name, print_type(v.type_name), slot, is_map)
                slot += 1
            self.state[v.name] = (info, v.type_name)
            self.state_infos.append(info)
        self.fn_names: dict[int, str] = {}
        self.by_name: dict[str, list[tuple[str, FunctionDecl]]] = defaultdict(list)
        seen: dict[str, int] = defaultdict(int)
        for i, fn in enumerate(decl.functions):
            if fn.excluded or fn.body is None:
                continue
            seen[fn.name] += 1
            ir_name = fn.name if seen[fn.name] == 1 else f"{fn.name}#{seen[fn.name]}"
            self.fn_names[i] = ir_name
            self.by_name[fn.name].append((ir_name, fn))

    def resolve_internal(self, name: str, nargs: int) -> Optional[str]:
        cands = self.by_name.get(name, [])
        for ir_name, fn in cands:
            if len(fn.params) == nargs:
                return ir_name
        return cands[0][0] if cands else None

    def callee_decl(self, ir_name: str) -> Optional[FunctionDecl]:
        for cands in self.by_name.values():
            for n, fn in cands:
                if n == ir_name:
                    return fn
        return None

    def is_contract_type(self, t: Optional[TypeName]) -> bool:
        return isinstance(t, UserType) and t.name not in self.structs and t.name not in self.enums

    def lower(self, source: Optional[str], path: str) -> ContractIR:
        ir = ContractIR(name=self.decl.name, state_vars=self.state_infos, source=source, path=path)
        for i, fn in enumerate(self.decl.functions):
            if i not in self.fn_names:
                continue
            index = len(ir.functions)
            try:
                fir = _FunctionLowerer(self, fn, self.fn_names[i], index).run()
            except LoweringError as e:
                self.diags.append(Diagnostic("warning", e.span, f"function {fn.name!r} not lowered: {e}", "lowering-unsupported"))
                continue
            except RecursionError:
                self.diags.append(Diagnostic("warning", fn.span, f"function {fn.name!r} not lowered: nesting too deep", "lowering-unsupported"))
                continue
            ir.functions.append(fir)
        ir.diagnostics = list(self.diags)
        return ir


class _FunctionLowerer:
    def __init__(self, cl: _ContractLowerer, fn: FunctionDecl, name: str, index: int):
        self.cl = cl
        self.fn = fn
        self.name = name
        self.index = index
        self.instrs: list[Instruction] = []
        self.env: dict[str, ValueRef] = {}
        self.types: dict[str, TypeName] = {}
        self.versions: dict[str, int] = defaultdict(int)
        self.ntemp = 0
        self.loops: list[_Loop] = []
        self.exit_jumps: list[tuple[Instruction, dict]] = []
        self.exit_envs: list[dict] = []
        self.terminated = False
        self.span: Optional[Span] = fn.span
        self.modifier: Optional[str] = None
        self.placeholders: list[Callable[[], None]] = []

    # --- emission helpers ----------------------------------------------------

    def emit(self, kind: str, **kw) -> Instruction:
        inst = Instruction(id=InstId(self.index, len(self.instrs)), kind=kind,
                           span=(self.span.start, self.span.end) if self.span else None, **kw)
        if self.modifier is not None:
            inst.extra["modifier"] = self.modifier
        self.instrs.append(inst)
        return inst

    def temp(self) -> Local:
        self.ntemp += 1
        return Local(self.name, f"%{self.ntemp}", 0)

    def new_version(self, name: str) -> Local:
        self.versions[name] += 1
        return Local(self.name, name, self.versions[name])

    def assign_temp(self, operands: tuple, op: Optional[str] = None) -> Local:
        t = self.temp()
        self.emit("Assign", operands=operands, result=t, op=op)
        return t

    def bind(self, name: str, value: ValueRef) -> Local:
        v = self.new_version(name)
        self.emit("Assign", operands=(value,), result=v)
        self.env[name] = v
        return v

    # --- entry point -----------------------------------------------------------

    def run(self) -> FunctionIR:
        fn = self.fn
        self.emit("Entry", extra={"params": [p.name for p in fn.params]})
        for i, p in enumerate(fn.params):
            if p.name:
                self.env[p.name] = Param(self.name, i)
                self.types[p.name] = p.type_name
        for k, r in enumerate(fn.returns):
            if r.name:
                self.types[r.name] = r.type_name
                self.bind(r.name, Const("0"))
        mods: list[tuple[ModifierDecl, list[Expr]]] = []
        uses: list[ModifierUse] = []
        from .. frontend.printer import print_expr
        for inv in fn.modifiers:
            uses.append(ModifierUse(inv.name, [print_expr(a) for a in (inv.args or [])]))
            decl = self.cl.modifiers.get(inv.name)
            if decl is None or decl.body is None:
                if inv.name not in self.cl.unit.kinds:  # base-constructor calls look like modifiers
                    self.cl.diags.append(Diagnostic("warning", inv.span, f"modifier {inv.name!r} not found; treated as opaque", "unresolved-modifier"))
                continue
            mods.append((decl, list(inv.args or [])))
        self.lower_modifiers(mods, 0)
        self.finish()
        return FunctionIR(
            name=self.name, index=self.index, visibility=fn.visibility,
            mutability=fn.mutability, kind=fn.kind,
            params=[(p.name or "", print_type(p.type_name)) for p in fn.params],
            returns=[(r.name or "", print_type(r.type_name)) for r in fn.returns],
            modifiers=uses, instructions=self.instrs,
            span=(fn.span.start, fn.span.end),
        )

    def lower_modifiers(self, mods: list, i: int) -> None:
        if i == len(mods):
            if self.fn.body is not None:
                self.block(self.fn.body.statements)
            return
        decl, args = mods[i]
        values = [self.expr(a) for a in args]
        saved = {p.name: self.env.get(p.name) for p in decl.params if p.name}
        for p, v in zip(decl.params, values):
            if p.name:
                self.env[p.name] = v
                self.types[p.name] = p.type_name
        outer_modifier = self.modifier
        self.modifier = decl.name

        def placeholder() -> None:
            mine = {n: self.env.get(n) for n in saved}
            for n, old in saved.items():
                if old is None:
                    self.env.pop(n, None)
                else:
                    self.env[n] = old
            self.modifier = outer_modifier
            self.lower_modifiers(mods, i + 1)
            self.modifier = decl.name
            for n, v in mine.items():
                if v is not None:
                    self.env[n] = v

        self.placeholders.append(placeholder)
        try:
            self.block(decl.body.statements)
        finally:
            self.placeholders.pop()
            self.modifier = outer_modifier
        for n, old in saved.items():
            if old is None:
                self.env.pop(n, None)
            else:
                self.env[n] = old

    def finish(self) -> None:
        nret = len(self.fn.returns)
        if not self.terminated:
            for k, r in enumerate(self.fn.returns):
                if r.name and r.name in self.env:
                    self.bind(f"%ret{k}", self.env[r.name])
            self.exit_envs.append(dict(self.env))
        exit_index = len(self.instrs)
        for j, _ in self.exit_jumps:
            j.targets = (exit_index,)
        incoming = [env for _, env in self.exit_jumps] + self.exit_envs
        keys = [f"%ret{k}" for k in range(nret)]
        self.terminated = False
        self.span = Span(self.fn.span.end - 1, self.fn.span.end) if self.fn.span.end > 0 else self.fn.span
        merged = self.merge(incoming, keys, default=Const("0")) if incoming else {}
        self.emit("Return", operands=tuple(merged.get(k, Const("0")) for k in keys))

    def merge(self, envs: list[dict], keys, default: Optional[ValueRef] = None) -> dict:
        """Join environments, emitting a Phi per name whose incoming versions differ."""
        out: dict = {}
        for name in keys:
            vals = [e.get(name, default) for e in envs]
            if any(v is None for v in vals):
                continue
            if all(v == vals[0] for v in vals):
                out[name] = vals[0]
                continue
            phi = self.new_version(name)
            self.emit("Phi", operands=tuple(vals), result=phi)
            out[name] = phi
        return out

    # --- statements -----------------------------------------------------------

    def block(self, stmts: list[Stmt]) -> None:
        for s in stmts:
            if self.terminated:
                break
            self.stmt(s)

    def stmt(self, s: Stmt) -> None:
        saved_span = self.span
        self.span = s.span
        try:
            self._stmt(s)
        finally:
            self.span = saved_span

    def _stmt(self, s: Stmt) -> None:
        if isinstance(s, Block):
            outer = set(self.env)
            self.block(s.statements)
            for name in list(self.env):
                if name not in outer and not name.startswith("%"):
                    del self.env[name]
        elif isinstance(s, VarDecl):
            self.types[s.name] = s.type_name
            value = self.expr(s.init) if s.init is not None else Const("0")
            self.bind(s.name, value)
        elif isinstance(s, TupleVarDecl):
            comps = self.components(s.init, len(s.decls))
            for d, v in zip(s.decls, comps):
                if d is not None and d.name:
                    self.types[d.name] = d.type_name
                    self.bind(d.name, v)
        elif isinstance(s, ExprStmt):
            self.expr(s.expr)
        elif isinstance(s, If):
            self.lower_if(s)
        elif isinstance(s, While):
            self.lower_loop(None, s.cond, None, s.body, do_while=False)
        elif isinstance(s, For):
            if s.init is not None:
                self.stmt(s.init)
            self.lower_loop(s, s.cond, s.post, s.body, do_while=False)
        elif isinstance(s, DoWhile):
            self.lower_loop(None, s.cond, None, s.body, do_while=True)
        elif isinstance(s, Return):
            values: list[ValueRef] = []
            if isinstance(s.value, TupleExpr):
                values = [self.expr(i) if i is not None else Const("0") for i in s.value.items]
            elif s.value is not None:
                values = [self.expr(s.value)]
            for k, v in enumerate(values):
                self.bind(f"%ret{k}", v)
            j = self.emit("Jump")
            self.exit_jumps.append((j, dict(self.env)))
            self.terminated = True
        elif isinstance(s, Emit):
            pass
        elif isinstance(s, RevertStmt):
            ops = ()
            if isinstance(s.call, FunctionCall):
                ops = tuple(self.expr(a) for a in s.call.args)
            self.emit("Revert", operands=ops)
            self.terminated = True
        elif isinstance(s, Break):
            if not self.loops:
                raise LoweringError(s.span, "break outside loop")
            j = self.emit("Jump")
            self.loops[-1].break_jumps.append((j, dict(self.env)))
            self.terminated = True
        elif isinstance(s, Continue):
            if not self.loops:
                raise LoweringError(s.span, "continue outside loop")
            j = self.emit("Jump")
            self.loops[-1].continue_jumps.append((j, dict(self.env)))
            self.terminated = True
        elif isinstance(s, Placeholder):
            if not self.placeholders:
                raise LoweringError(s.span, "placeholder outside modifier")
            cb = self.placeholders.pop()
            try:
                cb()
            finally:
                self.placeholders.append(cb)
        else:
            raise LoweringError(s.span, f"unsupported statement {s.kind}")

    def lower_if(self, s: If) -> None:
        c = self.expr(s.cond)
        cj = self.emit("CondJump", operands=(c,))
        env0 = dict(self.env)
        keys = list(env0)
        then_start = len(self.instrs)
        self.terminated = False
        self.stmt(s.then)
        then_env, then_term = self.env, self.terminated
        jt = None if then_term else self.emit("Jump")
        self.env = dict(env0)
        self.terminated = False
        else_start = len(self.instrs)
        if s.otherwise is not None:
            self.stmt(s.otherwise)
        else_env, else_term = self.env, self.terminated
        join = len(self.instrs)
        cj.targets = (then_start, else_start)
        if jt is not None:
            jt.targets = (join,)
        incoming = [e for e, t in ((then_env, then_term), (else_env, else_term)) if not t]
        if not incoming:
            self.env = env0
            self.terminated = True
            return
        self.terminated = False
        merged = self.merge(incoming, keys)
        self.env = {**env0, **merged}

    def assigned_names(self, *nodes: Optional[Node]) -> set[str]:
        out: set[str] = set()
        for node in nodes:
            if node is None:
                continue
            for n in node.walk():
                target = None
                if isinstance(n, Assignment):
                    target = n.target
                elif isinstance(n, UnaryOp) and n.op in ("++", "--", "delete"):
                    target = n.operand
                if target is not None:
                    out.update(_roots(target))
        return out

    def lower_loop(self, for_stmt, cond: Optional[Expr], post: Optional[Expr], body: Stmt, do_while: bool) -> None:
        names = sorted(n for n in self.assigned_names(cond, post, body) if n in self.env)
        names_with_ret = names
        pre_env = dict(self.env)
        header = len(self.instrs)
        phis: dict[str, Instruction] = {}
        for name in names_with_ret:
            v = self.new_version(name)
            phis[name] = self.emit("Phi", operands=(pre_env[name],), result=v)
            self.env[name] = v
        loop = _Loop()
        cj = None
        if not do_while:
            c = self.expr(cond) if cond is not None else Const("true")
            cj = self.emit("CondJump", operands=(c,))
            header_env = dict(self.env)
        body_start = len(self.instrs)
        self.loops.append(loop)
        self.terminated = False
        self.stmt(body)
        self.loops.pop()
        incoming = [e for _, e in loop.continue_jumps]
        if not self.terminated:
            incoming.append(self.env)
        self.terminated = False
        cont = len(self.instrs)
        for j, _ in loop.continue_jumps:
            j.targets = (cont,)
        back_env = None
        if incoming:
            self.env = {**pre_env, **self.merge(incoming, list(pre_env))}
            if post is not None:
                self.expr(post)
            if do_while:
                c = self.expr(cond) if cond is not None else Const("true")
                cj = self.emit("CondJump", operands=(c,))
                header_env = dict(self.env)
            else:
                back = self.emit("Jump")
                back.targets = (header,)
            back_env = dict(self.env)
        elif do_while:
            # body never reaches the condition
            header_env = dict(self.env)
        exit_index = len(self.instrs)
        if cj is not None:
            cj.targets = (body_start if not do_while else header, exit_index)
        for j, _ in loop.break_jumps:
            j.targets = (exit_index,)
        if back_env is not None:
            for name, phi in phis.items():
                phi.operands = phi.operands + (back_env[name],)
        exits = []
        if cj is not None:
            exits.append(header_env)
        exits.extend(e for _, e in loop.break_jumps)
        if not exits:
            self.terminated = True
            self.env = pre_env
            return
        self.env = {**pre_env, **self.merge(exits, list(pre_env))}
        del for_stmt

    # --- expressions -----------------------------------------------------------

    def expr(self, e: Expr) -> ValueRef:
        saved_span = self.span
        self.span = e.span
        try:
            return self._expr(e)
        finally:
            self.span = saved_span

    def components(self, e: Expr, n: int) -> list[ValueRef]:
        if isinstance(e, TupleExpr):
            return [self.expr(i) if i is not None else Const("0") for i in e.items]
        v = self.expr(e)
        if isinstance(v, CallReturn):
            return [CallReturn(v.inst, k) for k in range(n)]
        return [v] * n

    def type_of(self, e: Optional[Expr]) -> Optional[TypeName]:
        if isinstance(e, Identifier):
            if e.name in self.types and e.name in self.env:
                return self.types[e.name]
            if e.name in self.cl.state:
                return self.cl.state[e.name][1]
            if e.name == "this":
                return UserType(self.cl.decl.name)
            return None
        if isinstance(e, MemberAccess):
            if isinstance(e.expr, Identifier) and (e.expr.name, e.member) in TX_MEMBERS:
                return ElementaryType("address") if e.member in ("sender", "origin") else ElementaryType("uint256")
            base = self.type_of(e.expr)
            if isinstance(base, UserType) and base.name in self.cl.structs:
                return self.cl.structs[base.name].get(e.member)
            if e.member == "balance" or e.member == "length":
                return ElementaryType("uint256")
            return None
        if isinstance(e, IndexAccess):
            base = self.type_of(e.base)
            if isinstance(base, MappingType):
                return base.value
            if isinstance(base, ArrayType):
                return base.base
            return None
        if isinstance(e, FunctionCall):
            callee = e.callee
            if isinstance(callee, TypeExpr):
                return callee.type_name
            if isinstance(callee, Identifier) and self.is_type_name(callee.name):
                return UserType(callee.name)
            return None
        return None

    def is_type_name(self, name: str) -> bool:
        if name in self.cl.structs or name in self.cl.enums or name in self.cl.unit.kinds:
            return True
        return len(name) > 1 and name[0] == "I" and name[1].isupper() and name not in self.cl.by_name

    def storage_path(self, e: Expr):
        """Resolve a state-rooted access to (info, path, key exprs, type) or None."""
        if isinstance(e, Identifier):
            if e.name in self.env or e.name not in self.cl.state:
                return None
            info, t = self.cl.state[e.name]
            if info.constant:
                return None
            return info, [], [], t
        if isinstance(e, IndexAccess):
            r = self.storage_path(e.base)
            if r is None:
                return None
            info, path, keys, t = r
            if e.index is None:
                raise LoweringError(e.span, "empty index on storage")
            if isinstance(t, MappingType):
                return info, path + [("key", self.abstract_key(e.index))], keys + [e.index], t.value
            nt = t.base if isinstance(t, ArrayType) else None
            return info, path + [("index", self.abstract_key(e.index))], keys + [e.index], nt
        if isinstance(e, MemberAccess):
            r = self.storage_path(e.expr)
            if r is None:
                return None
            info, path, keys, t = r
            nt = None
            if isinstance(t, UserType) and t.name in self.cl.structs:
                nt = self.cl.structs[t.name].get(e.member)
            elif e.member == "length":
                nt = ElementaryType("uint256")
            elif self.cl.is_contract_type(t) or (isinstance(t, ElementaryType) and t.name in ADDRESS_TYPES):
                return None  # e.g. router.WETH without call, or addr.balance
            return info, path + [("member", e.member)], keys, nt
        return None

    def abstract_key(self, e: Expr) -> str:
        if isinstance(e, NumberLit):
            return f"const:{e.value}"
        if isinstance(e, (StringLit,)):
            return f"const:{e.value}"
        if isinstance(e, BoolLit):
            return f"const:{str(e.value).lower()}"
        if isinstance(e, Identifier):
            if e.name in self.cl.state and self.cl.state[e.name][0].constant and e.name not in self.env:
                return f"const:{e.name}"
            return UNKNOWN_KEY
        if isinstance(e, MemberAccess) and isinstance(e.expr, Identifier) and (e.expr.name, e.member) in TX_MEMBERS:
            return f"tx:{e.expr.name}.{e.member}"
        if (isinstance(e, FunctionCall) and isinstance(e.callee, TypeExpr) and len(e.args) == 1
                and isinstance(e.args[0], Identifier) and e.args[0].name == "this"):
            return "const:this"
        return UNKNOWN_KEY

    def slot_for(self, r) -> SlotId:
        info, path, _, _ = r
        return SlotId(info.slot, tuple(path), is_mapping_base=info.is_mapping, name=info.name)

    def load(self, r) -> Local:
        keys = [self.expr(k) for k in r[2]]
        t = self.temp()
        inst = self.emit("SLoad", operands=(StateSlot(self.slot_for(r)),), result=t)
        if keys:
            inst.extra["keys"] = keys
        return t

    def store(self, target: Expr, value: ValueRef) -> None:
        r = self.storage_path(target)
        if r is not None:
            keys = [self.expr(k) for k in r[2]]
            inst = self.emit("SStore", operands=(StateSlot(self.slot_for(r)), value))
            if keys:
                inst.extra["keys"] = keys
            return
        if isinstance(target, Identifier):
            if target.name in self.env:
                self.bind(target.name, value)
                return
            if target.name in self.cl.state:
                raise LoweringError(target.span, f"assignment to constant {target.name!r}")
            raise LoweringError(target.span, f"assignment to undeclared name {target.name!r}")
        if isinstance(target, (IndexAccess, MemberAccess)):
            roots = _roots(target)
            if len(roots) == 1 and roots[0] in self.env:
                name = roots[0]
                extra_ops: list[ValueRef] = []
                if isinstance(target, IndexAccess) and target.index is not None:
                    extra_ops.append(self.expr(target.index))
                new = self.new_version(name)
                self.emit("Assign", operands=(self.env[name], value, *extra_ops), result=new, op="elem")
                self.env[name] = new
                return
            raise LoweringError(target.span, "unsupported assignment target")
        if isinstance(target, TupleExpr):
            n = len(target.items)
            comps = [CallReturn(value.inst, k) for k in range(n)] if isinstance(value, CallReturn) else [value] * n
            for item, v in zip(target.items, comps):
                if item is not None:
                    self.store(item, v)
            return
        raise LoweringError(target.span, f"unsupported assignment target {target.kind}")

    def _expr(self, e: Expr) -> ValueRef:
        if isinstance(e, NumberLit):
            return Const(e.value if e.unit is None else f"{e.value} {e.unit}")
        if isinstance(e, StringLit):
            return Const(repr(e.value))
        if isinstance(e, BoolLit):
            return Const("true" if e.value else "false")
        if isinstance(e, Identifier):
            if e.name in self.env:
                return self.env[e.name]
            if e.name == "now":
                return self.assign_temp((TxProperty("block.timestamp"),))
            r = self.storage_path(e)
            if r is not None:
                return self.load(r)
            return Const(e.name)
        if isinstance(e, TypeExpr):
            return Const(print_type(e.type_name))
        if isinstance(e, NewExpr):
            return Const("new " + print_type(e.type_name))
        if isinstance(e, BinaryOp):
            a = self.expr(e.left)
            b = self.expr(e.right)
            t = self.temp()
            if e.op in BINOPS:
                self.emit("BinOp", operands=(a, b), result=t, op=e.op)
            else:
                self.emit("Assign", operands=(a, b), result=t, op=e.op)
            return t
        if isinstance(e, UnaryOp):
            return self.unary(e)
        if isinstance(e, Assignment):
            rhs = self.expr(e.value)
            if e.op != "=":
                if isinstance(e.target, TupleExpr):
                    raise LoweringError(e.span, "compound assignment to tuple")
                cur = self.expr(e.target)
                t = self.temp()
                op = e.op[:-1]
                if op in BINOPS:
                    self.emit("BinOp", operands=(cur, rhs), result=t, op=op)
                else:
                    self.emit("Assign", operands=(cur, rhs), result=t, op=op)
                rhs = t
            if isinstance(e.target, TupleExpr) and isinstance(e.value, TupleExpr):
                values = [self.expr(i) if i is not None else Const("0") for i in e.value.items]
                for item, v in zip(e.target.items, values):
                    if item is not None:
                        self.store(item, v)
                return rhs
            self.store(e.target, rhs)
            return rhs
        if isinstance(e, Conditional):
            c = self.expr(e.cond)
            a = self.expr(e.then)
            b = self.expr(e.otherwise)
            return self.assign_temp((c, a, b), op="select")
        if isinstance(e, MemberAccess):
            return self.member(e)
        if isinstance(e, IndexAccess):
            r = self.storage_path(e)
            if r is not None:
                return self.load(r)
            base = self.expr(e.base)
            if e.index is None:
                return base
            idx = self.expr(e.index)
            return self.assign_temp((base, idx), op="index")
        if isinstance(e, TupleExpr):
            items = [self.expr(i) for i in e.items if i is not None]
            if len(items) == 1:
                return items[0]
            return self.assign_temp(tuple(items), op="tuple")
        if isinstance(e, FunctionCall):
            return self.call(e)
        raise LoweringError(e.span, f"unsupported expression {e.kind}")

    def unary(self, e: UnaryOp) -> ValueRef:
        if e.op in ("++", "--"):
            cur = self.expr(e.operand)
            t = self.temp()
            self.emit("BinOp", operands=(cur, Const("1")), result=t, op="+" if e.op == "++" else "-")
            self.store(e.operand, t)
            return t if e.prefix else cur
        if e.op == "delete":
            self.store(e.operand, Const("0"))
            return Const("0")
        v = self.expr(e.operand)
        t = self.temp()
        if e.op == "-":
            self.emit("BinOp", operands=(Const("0"), v), result=t, op="-")
        elif e.op == "!":
            self.emit("BinOp", operands=(v, Const("false")), result=t, op="==")
        else:
            self.emit("Assign", operands=(v,), result=t, op=e.op)
        return t

    def member(self, e: MemberAccess) -> ValueRef:
        if isinstance(e.expr, Identifier) and (e.expr.name, e.member) in TX_MEMBERS and e.expr.name not in self.env:
            return self.assign_temp((TxProperty(f"{e.expr.name}.{e.member}"),))
        r = self.storage_path(e)
        if r is not None:
            return self.load(r)
        if isinstance(e.expr, Identifier) and e.expr.name not in self.env and e.expr.name not in self.cl.state:
            # enum values, type(...) members, library constants
            return Const(f"{e.expr.name}.{e.member}")
        if isinstance(e.expr, FunctionCall) and isinstance(e.expr.callee, Identifier) and e.expr.callee.name == "type":
            return Const(f"type.{e.member}")
        base = self.expr(e.expr)
        return self.assign_temp((base,), op=e.member if e.member == "balance" else f"member:{e.member}")

    # --- calls -----------------------------------------------------------------

    def call(self, e: FunctionCall) -> ValueRef:
        callee = e.callee
        if isinstance(callee, Identifier) and callee.name not in self.env:
            name = callee.name
            if name in ("require", "assert"):
                if not e.args:
                    raise LoweringError(e.span, f"{name} without condition")
                c = self.expr(e.args[0])
                self.emit("Require", operands=(c,), op=name)
                return Const("true")
            if name == "revert":
                ops = tuple(self.expr(a) for a in e.args)
                self.emit("Revert", operands=ops)
                self.terminated = True
                return Const("0")
            args = [self.expr(a) for a in e.args]
            if name in BUILTINS:
                return self.assign_temp(tuple(args), op=f"builtin:{name}")
            resolved = self.cl.resolve_internal(name, len(e.args))
            if resolved is not None:
                cs = InstId(self.index, len(self.instrs))
                self.emit("InternalCall", operands=tuple(self._order_args(resolved, e, args)),
                          result=CallReturn(cs, 0), callee=resolved)
                return CallReturn(cs, 0)
            if self.is_type_name(name):
                return self.assign_temp(tuple(args), op=f"cast:{name}")
            cs = InstId(self.index, len(self.instrs))
            self.emit("InternalCall", operands=tuple(args), result=CallReturn(cs, 0), callee=name,
                      extra={"unresolved": True})
            return CallReturn(cs, 0)
        if isinstance(callee, TypeExpr):
            args = [self.expr(a) for a in e.args]
            return self.assign_temp(tuple(args), op=f"cast:{print_type(callee.type_name)}")
        if isinstance(callee, NewExpr):
            args = [self.expr(a) for a in e.args]
            if isinstance(callee.type_name, UserType) and callee.type_name.name not in self.cl.structs:
                cs = InstId(self.index, len(self.instrs))
                self.emit("ExternalCall", operands=tuple(args), result=CallReturn(cs, 0),
                          callee="constructor", target=callee.type_name.name)
                return CallReturn(cs, 0)
            return self.assign_temp(tuple(args), op="new")
        if isinstance(callee, MemberAccess):
            return self.member_call(e, callee)
        base = self.expr(callee)
        args = [self.expr(a) for a in e.args]
        return self.assign_temp((base, *args), op="call")

    def _order_args(self, resolved: str, e: FunctionCall, args: list[ValueRef]) -> list[ValueRef]:
        if e.arg_names is None:
            return args
        decl = self.cl.callee_decl(resolved)
        if decl is None:
            return args
        order = {n: v for n, v in zip(e.arg_names, args)}
        return [order.get(p.name, Const("0")) for p in decl.params]

    def member_call(self, e: FunctionCall, callee: MemberAccess) -> ValueRef:
        name = callee.member
        base_expr = callee.expr
        if isinstance(base_expr, Identifier) and base_expr.name not in self.env:
            if base_expr.name == "abi":
                args = [self.expr(a) for a in e.args]
                return self.assign_temp(tuple(args), op=f"builtin:abi.{name}")
            if base_expr.name == "super":
                args = [self.expr(a) for a in e.args]
                cs = InstId(self.index, len(self.instrs))
                self.emit("InternalCall", operands=tuple(args), result=CallReturn(cs, 0), callee=name,
                          extra={"unresolved": True, "super": True})
                return CallReturn(cs, 0)
            if base_expr.name not in self.cl.state and base_expr.name != "this" and (
                    base_expr.name in self.cl.unit.kinds or self.is_type_name(base_expr.name)):
                # static call into a library or a type-qualified function
                args = [self.expr(a) for a in e.args]
                cs = InstId(self.index, len(self.instrs))
                self.emit("ExternalCall", operands=tuple(args), result=CallReturn(cs, 0), callee=name,
                          target=base_expr.name, mutability=self._mutability(base_expr.name, name))
                return CallReturn(cs, 0)
        bt = self.type_of(base_expr)
        contract_typed = self.cl.is_contract_type(bt)
        address_typed = isinstance(bt, ElementaryType) and bt.name in ADDRESS_TYPES
        if name in ARITHMETIC_WRAPPERS and 1 <= len(e.args) <= 2 and not contract_typed and not address_typed:
            a = self.expr(base_expr)
            b = self.expr(e.args[0])
            for extra in e.args[1:]:
                self.expr(extra)
            t = self.temp()
            self.emit("BinOp", operands=(a, b), result=t, op=ARITHMETIC_WRAPPERS[name])
            return t
        if isinstance(bt, ArrayType) and name in ("push", "pop"):
            r = self.storage_path(base_expr)
            args = [self.expr(a) for a in e.args]
            if r is not None:
                info, path, keys, t = r
                r2 = (info, path + [("index", UNKNOWN_KEY)], keys, t.base if isinstance(t, ArrayType) else None)
                if name == "push":
                    self.store_slot(r2, args[0] if args else Const("0"))
                    return Const("0")
                return self.load(r2)
            return self.assign_temp((self.expr(base_expr), *args), op=f"member:{name}")
        value_opt = next((o.value for o in e.options if o.name == "value"), None)
        if name in ("transfer", "send") and len(e.args) == 1 and not contract_typed:
            recv = self.expr(base_expr)
            amount = self.expr(e.args[0])
            cs = InstId(self.index, len(self.instrs))
            self.emit("LowLevelCall", operands=(amount,), result=CallReturn(cs, 0), op=name, callee=name,
                      receiver=recv, extra={"amount_index": 0})
            return CallReturn(cs, 0)
        if name == "call" and not contract_typed:
            recv = self.expr(base_expr)
            ops: list[ValueRef] = []
            extra: dict = {}
            if value_opt is not None:
                ops.append(self.expr(value_opt))
                extra["amount_index"] = 0
            ops.extend(self.expr(a) for a in e.args)
            cs = InstId(self.index, len(self.instrs))
            self.emit("LowLevelCall", operands=tuple(ops), result=CallReturn(cs, 0), op="call", callee="call",
                      receiver=recv, extra=extra)
            return CallReturn(cs, 0)
        if isinstance(bt, ElementaryType) and not address_typed:
            # library function attached with using-for on an elementary type
            a = self.expr(base_expr)
            args = [self.expr(x) for x in e.args]
            return self.assign_temp((a, *args), op=f"libcall:{name}")
        recv = self.expr(base_expr)
        args = [self.expr(a) for a in e.args]
        extra = {}
        if value_opt is not None:
            extra["value"] = self.expr(value_opt)
        target = bt.name if isinstance(bt, (UserType, ElementaryType)) else None
        cs = InstId(self.index, len(self.instrs))
        self.emit("ExternalCall", operands=tuple(args), result=CallReturn(cs, 0), callee=name,
                  target=target, receiver=recv, mutability=self._mutability(target, name), extra=extra)
        return CallReturn(cs, 0)

    def store_slot(self, r, value: ValueRef) -> None:
        keys = [self.expr(k) for k in r[2]]
        inst = self.emit("SStore", operands=(StateSlot(self.slot_for(r)), value))
        if keys:
            inst.extra["keys"] = keys

    def _mutability(self, target: Optional[str], name: str) -> Optional[str]:
        if target is None:
            return None
        fns = self.cl.unit.mutability.get(target)
        if not fns:
            return None
        return fns.get(name)


def _roots(e: Expr) -> list[str]:
    if isinstance(e, Identifier):
        return [e.name]
    if isinstance(e, IndexAccess):
        return _roots(e.base)
    if isinstance(e, MemberAccess):
        return _roots(e.expr)
    if isinstance(e, TupleExpr):
        out: list[str] = []
        for item in e.items:
            if item is not None:
                out.extend(_roots(item))
        return out
    return []


def lower_contract(decl: ContractDecl, unit: Optional[SourceUnit] = None,
                   source: Optional[str] = None, path: str = "") -> ContractIR:
    """Lower one contract declaration. Functions that cannot be lowered are
    skipped with a ``lowering-unsupported`` warning in ``ir.diagnostics``."""
    diags: list[Diagnostic] = []
    return _ContractLowerer(decl, UnitInfo.from_unit(unit), diags).lower(source, path or (unit.path if unit else ""))


def lower_unit(unit: SourceUnit, source: Optional[str] = None) -> list[ContractIR]:
    """Lower every concrete contract in a source unit (interfaces and libraries are skipped)."""
    return [lower_contract(c, unit, source, unit.path) for c in unit.contracts
            if c.kind in ("contract", "abstract")]
