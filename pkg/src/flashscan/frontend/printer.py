"""Pretty-printer producing source that re-parses to a structurally equal AST."""

from __future__ import annotations

from typing import Optional

from .nodes import (
    ArrayType, Assignment, BinaryOp, Block, BoolLit, Break, Conditional,
    Continue, ContractDecl, DoWhile, ElementaryType, Emit, Expr, ExprStmt, For,
    FunctionCall, FunctionDecl, Identifier, If, IndexAccess, MappingType,
    MemberAccess, ModifierDecl, NewExpr, NumberLit, Param, Placeholder, Return,
    RevertStmt, SourceUnit, StateVarDecl, Stmt, StringLit, TupleExpr,
    TupleVarDecl, TypeExpr, TypeName, UnaryOp, UserType, VarDecl, While,
)

INDENT = "    "


def print_type(t: TypeName) -> str:
    if isinstance(t, ElementaryType):
        return t.name
    if isinstance(t, UserType):
        return t.name
    if isinstance(t, MappingType):
        return f"mapping({print_type(t.key)} => {print_type(t.value)})"
    if isinstance(t, ArrayType):
        length = print_expr(t.length) if t.length is not None else ""
        return f"{print_type(t.base)}[{length}]"
    raise TypeError(f"not a type node: {t!r}")


def _quote(value: str) -> str:
    if '"' in value.replace('\\"', ""):
        return f"'{value}'"
    return f'"{value}"'


def print_expr(e: Optional[Expr]) -> str:
    if e is None:
        return ""
    if isinstance(e, Identifier):
        return e.name
    if isinstance(e, NumberLit):
        return f"{e.value} {e.unit}" if e.unit else e.value
    if isinstance(e, StringLit):
        return _quote(e.value)
    if isinstance(e, BoolLit):
        return "true" if e.value else "false"
    if isinstance(e, BinaryOp):
        return f"({print_expr(e.left)} {e.op} {print_expr(e.right)})"
    if isinstance(e, UnaryOp):
        if not e.prefix:
            return f"({print_expr(e.operand)}{e.op})"
        sep = " " if e.op == "delete" else ""
        return f"({e.op}{sep}{print_expr(e.operand)})"
    if isinstance(e, Assignment):
        return f"({print_expr(e.target)} {e.op} {print_expr(e.value)})"
    if isinstance(e, Conditional):
        return f"({print_expr(e.cond)} ? {print_expr(e.then)} : {print_expr(e.otherwise)})"
    if isinstance(e, MemberAccess):
        return f"{print_expr(e.expr)}.{e.member}"
    if isinstance(e, IndexAccess):
        return f"{print_expr(e.base)}[{print_expr(e.index)}]"
    if isinstance(e, FunctionCall):
        opts = ""
        if e.options:
            opts = "{" + ", ".join(f"{o.name}: {print_expr(o.value)}" for o in e.options) + "}"
        if e.arg_names is not None:
            inner = "{" + ", ".join(f"{n}: {print_expr(a)}" for n, a in zip(e.arg_names, e.args)) + "}"
        else:
            inner = ", ".join(print_expr(a) for a in e.args)
        return f"{print_expr(e.callee)}{opts}({inner})"
    if isinstance(e, NewExpr):
        return f"new {print_type(e.type_name)}"
    if isinstance(e, TupleExpr):
        return "(" + ", ".join(print_expr(i) for i in e.items) + ")"
    if isinstance(e, TypeExpr):
        return print_type(e.type_name)
    raise TypeError(f"not an expression node: {e!r}")


def _param(p: Param) -> str:
    parts = [print_type(p.type_name)]
    if p.location:
        parts.append(p.location)
    if p.name:
        parts.append(p.name)
    return " ".join(parts)


def _params(ps: list[Param]) -> str:
    return "(" + ", ".join(_param(p) for p in ps) + ")"


def print_stmt(s: Stmt, depth: int = 0) -> str:
    pad = INDENT * depth
    if isinstance(s, Block):
        head = "unchecked {" if s.unchecked else "{"
        if not s.statements:
            return pad + head + "}"
        body = "\n".join(print_stmt(x, depth + 1) for x in s.statements)
        return f"{pad}{head}\n{body}\n{pad}}}"
    if isinstance(s, VarDecl):
        loc = f" {s.location}" if s.location else ""
        init = f" = {print_expr(s.init)}" if s.init is not None else ""
        return f"{pad}{print_type(s.type_name)}{loc} {s.name}{init};"
    if isinstance(s, TupleVarDecl):
        items = ", ".join(_param(d) if d is not None else "" for d in s.decls)
        return f"{pad}({items}) = {print_expr(s.init)};"
    if isinstance(s, ExprStmt):
        if isinstance(s.expr, Assignment):
            a = s.expr
            return f"{pad}{print_expr(a.target)} {a.op} {print_expr(a.value)};"
        return f"{pad}{print_expr(s.expr)};"
    if isinstance(s, If):
        out = f"{pad}if ({print_expr(s.cond)})\n{print_stmt(s.then, depth + 1)}"
        if s.otherwise is not None:
            out += f"\n{pad}else\n{print_stmt(s.otherwise, depth + 1)}"
        return out
    if isinstance(s, For):
        init = print_stmt(s.init).strip() if s.init is not None else ";"
        return (f"{pad}for ({init} {print_expr(s.cond)}; {print_expr(s.post)})\n"
                f"{print_stmt(s.body, depth + 1)}")
    if isinstance(s, While):
        return f"{pad}while ({print_expr(s.cond)})\n{print_stmt(s.body, depth + 1)}"
    if isinstance(s, DoWhile):
        return f"{pad}do\n{print_stmt(s.body, depth + 1)}\n{pad}while ({print_expr(s.cond)});"
    if isinstance(s, Return):
        return f"{pad}return {print_expr(s.value)};" if s.value is not None else f"{pad}return;"
    if isinstance(s, Emit):
        return f"{pad}emit {print_expr(s.call)};"
    if isinstance(s, RevertStmt):
        return f"{pad}revert {print_expr(s.call)};"
    if isinstance(s, Break):
        return f"{pad}break;"
    if isinstance(s, Continue):
        return f"{pad}continue;"
    if isinstance(s, Placeholder):
        return f"{pad}_;"
    raise TypeError(f"not a statement node: {s!r}")


def _function(fn: FunctionDecl, depth: int) -> str:
    pad = INDENT * depth
    if fn.excluded and fn.raw is not None:
        return pad + fn.raw
    head = "function " + fn.name if fn.kind == "function" else fn.kind
    parts = [head + _params(fn.params), fn.visibility]
    if fn.mutability != "default":
        parts.append(fn.mutability)
    for m in fn.modifiers:
        parts.append(m.name if m.args is None else f"{m.name}(" + ", ".join(print_expr(a) for a in m.args) + ")")
    if fn.returns:
        parts.append("returns " + _params(fn.returns))
    sig = pad + " ".join(parts)
    if fn.body is None:
        return sig + ";"
    return sig + "\n" + print_stmt(fn.body, depth)


def _modifier(m: ModifierDecl, depth: int) -> str:
    pad = INDENT * depth
    head = f"{pad}modifier {m.name}{_params(m.params)}"
    if m.body is None:
        return head + ";"
    return head + "\n" + print_stmt(m.body, depth)


def _state_var(v: StateVarDecl, depth: int) -> str:
    parts = [print_type(v.type_name)]
    if v.visibility:
        parts.append(v.visibility)
    if v.constant:
        parts.append("constant")
    if v.immutable:
        parts.append("immutable")
    parts.append(v.name)
    out = INDENT * depth + " ".join(parts)
    if v.init is not None:
        out += " = " + print_expr(v.init)
    return out + ";"


def print_contract(c: ContractDecl, depth: int = 0) -> str:
    pad = INDENT * depth
    head = "abstract contract" if c.kind == "abstract" else c.kind
    bases = f" is {', '.join(c.base_contracts)}" if c.base_contracts else ""
    lines = [f"{pad}{head} {c.name}{bases} {{"]
    inner = depth + 1
    for st in c.structs:
        members = " ".join(f"{_param(m)};" for m in st.members)
        lines.append(f"{INDENT * inner}struct {st.name} {{ {members} }}")
    for en in c.enums:
        lines.append(f"{INDENT * inner}enum {en.name} {{ {', '.join(en.values)} }}")
    for ev in c.events:
        lines.append(f"{INDENT * inner}event {ev.name}{_params(ev.params)};")
    for v in c.state_vars:
        lines.append(_state_var(v, inner))
    for m in c.modifiers:
        lines.append(_modifier(m, inner))
    for fn in c.functions:
        lines.append(_function(fn, inner))
    lines.append(pad + "}")
    return "\n".join(lines)


def print_source(unit: SourceUnit) -> str:
    """Render a SourceUnit back to Solidity text."""
    out = [f"pragma {p};" for p in unit.pragmas]
    out.extend(print_contract(c) for c in unit.contracts)
    return "\n\n".join(out) + "\n"
