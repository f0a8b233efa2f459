"""AST node classes for the Solidity subset.

Spans are excluded from equality so two trees compare structurally.
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields
from typing import Any, Iterator, Optional


@dataclass(frozen=True)
class Span:
    start: int
    end: int

    def slice(self, text: str) -> str:
        return text[self.start:self.end]


NO_SPAN = Span(0, 0)


@dataclass(eq=True)
class Node:
    span: Span = field(default=NO_SPAN, compare=False, repr=False, kw_only=True)

    @property
    def kind(self) -> str:
        return type(self).__name__

    def children(self) -> Iterator["Node"]:
        for f in fields(self):
            if f.name == "span":
                continue
            yield from _iter_nodes(getattr(self, f.name))

    def walk(self) -> Iterator["Node"]:
        yield self
        for child in self.children():
            yield from child.walk()


def _iter_nodes(value: Any) -> Iterator[Node]:
    if isinstance(value, Node):
        yield value
    elif isinstance(value, (list, tuple)):
        for item in value:
            yield from _iter_nodes(item)


# --- types -----------------------------------------------------------------

@dataclass(eq=True)
class TypeName(Node):
    pass


@dataclass(eq=True)
class ElementaryType(TypeName):
    name: str  # "address payable" kept as one name


@dataclass(eq=True)
class UserType(TypeName):
    name: str  # possibly dotted, e.g. "IUniswapV2Pair" or "Lib.Struct"


@dataclass(eq=True)
class MappingType(TypeName):
    key: TypeName
    value: TypeName


@dataclass(eq=True)
class ArrayType(TypeName):
    base: TypeName
    length: Optional["Expr"] = None


# --- expressions -----------------------------------------------------------

@dataclass(eq=True)
class Expr(Node):
    pass


@dataclass(eq=True)
class Identifier(Expr):
    name: str


@dataclass(eq=True)
class NumberLit(Expr):
    value: str
    unit: Optional[str] = None


@dataclass(eq=True)
class StringLit(Expr):
    value: str


@dataclass(eq=True)
class BoolLit(Expr):
    value: bool


@dataclass(eq=True)
class BinaryOp(Expr):
    op: str
    left: Expr
    right: Expr


@dataclass(eq=True)
class UnaryOp(Expr):
    op: str
    operand: Expr
    prefix: bool = True


@dataclass(eq=True)
class Assignment(Expr):
    op: str  # "=" or compound like "+="
    target: Expr
    value: Expr


@dataclass(eq=True)
class Conditional(Expr):
    cond: Expr
    then: Expr
    otherwise: Expr


@dataclass(eq=True)
class MemberAccess(Expr):
    expr: Expr
    member: str


@dataclass(eq=True)
class IndexAccess(Expr):
    base: Expr
    index: Optional[Expr]


@dataclass(eq=True)
class CallOption(Node):
    name: str
    value: Expr


@dataclass(eq=True)
class FunctionCall(Expr):
    callee: Expr
    args: list[Expr]
    arg_names: Optional[list[str]] = None  # named-argument call f({a: 1})
    options: list[CallOption] = field(default_factory=list)


@dataclass(eq=True)
class NewExpr(Expr):
    type_name: TypeName


@dataclass(eq=True)
class TupleExpr(Expr):
    items: list[Optional[Expr]]


@dataclass(eq=True)
class TypeExpr(Expr):
    """An elementary type used as an expression, e.g. the callee in ``address(x)``."""
    type_name: TypeName


# --- statements ------------------------------------------------------------

@dataclass(eq=True)
class Stmt(Node):
    pass


@dataclass(eq=True)
class Block(Stmt):
    statements: list[Stmt]
    unchecked: bool = False


@dataclass(eq=True)
class VarDecl(Stmt):
    type_name: TypeName
    name: str
    location: Optional[str] = None
    init: Optional[Expr] = None


@dataclass(eq=True)
class TupleVarDecl(Stmt):
    # None entries are skipped components: (uint a, , uint c) = f();
    decls: list[Optional["Param"]]
    init: Expr


@dataclass(eq=True)
class ExprStmt(Stmt):
    expr: Expr


@dataclass(eq=True)
class If(Stmt):
    cond: Expr
    then: Stmt
    otherwise: Optional[Stmt] = None


@dataclass(eq=True)
class For(Stmt):
    init: Optional[Stmt]
    cond: Optional[Expr]
    post: Optional[Expr]
    body: Stmt


@dataclass(eq=True)
class While(Stmt):
    cond: Expr
    body: Stmt


@dataclass(eq=True)
class DoWhile(Stmt):
    body: Stmt
    cond: Expr


@dataclass(eq=True)
class Return(Stmt):
    value: Optional[Expr] = None


@dataclass(eq=True)
class Emit(Stmt):
    call: Expr


@dataclass(eq=True)
class RevertStmt(Stmt):
    """``revert CustomError(args);``"""
    call: Expr


@dataclass(eq=True)
class Break(Stmt):
    pass


@dataclass(eq=True)
class Continue(Stmt):
    pass


@dataclass(eq=True)
class Placeholder(Stmt):
    """The ``_;`` statement inside a modifier body."""


# --- declarations ----------------------------------------------------------

@dataclass(eq=True)
class Param(Node):
    type_name: TypeName
    name: Optional[str] = None
    location: Optional[str] = None


@dataclass(eq=True)
class ModifierInvocation(Node):
    name: str
    args: Optional[list[Expr]] = None  # None when written without parentheses


@dataclass(eq=True)
class StateVarDecl(Node):
    name: str
    type_name: TypeName
    visibility: Optional[str] = None
    constant: bool = False
    immutable: bool = False
    init: Optional[Expr] = None


@dataclass(eq=True)
class FunctionDecl(Node):
    name: str
    params: list[Param]
    returns: list[Param]
    visibility: str
    mutability: str = "default"
    modifiers: list[ModifierInvocation] = field(default_factory=list)
    body: Optional[Block] = None
    kind: str = "function"  # function | constructor | receive | fallback
    excluded: bool = False
    # verbatim source of an excluded function, kept for printing
    raw: Optional[str] = None


@dataclass(eq=True)
class ModifierDecl(Node):
    name: str
    params: list[Param]
    body: Optional[Block]


@dataclass(eq=True)
class StructDecl(Node):
    name: str
    members: list[Param]


@dataclass(eq=True)
class EnumDecl(Node):
    name: str
    values: list[str]


@dataclass(eq=True)
class EventDecl(Node):
    name: str
    params: list[Param]


@dataclass(eq=True)
class ContractDecl(Node):
    name: str
    kind: str = "contract"  # contract | interface | library | abstract
    base_contracts: list[str] = field(default_factory=list)
    state_vars: list[StateVarDecl] = field(default_factory=list)
    functions: list[FunctionDecl] = field(default_factory=list)
    modifiers: list[ModifierDecl] = field(default_factory=list)
    structs: list[StructDecl] = field(default_factory=list)
    enums: list[EnumDecl] = field(default_factory=list)
    events: list[EventDecl] = field(default_factory=list)

    def function(self, name: str) -> Optional[FunctionDecl]:
        for fn in self.functions:
            if fn.name == name:
                return fn
        return None


@dataclass(frozen=True)
class Diagnostic:
    severity: str  # error | warning
    span: Span
    message: str
    code: str

    def to_json(self) -> dict:
        return {"severity": self.severity, "code": self.code, "message": self.message,
                "span": [self.span.start, self.span.end]}


@dataclass(eq=True)
class SourceUnit(Node):
    path: str
    contracts: list[ContractDecl] = field(default_factory=list)
    pragmas: list[str] = field(default_factory=list)
    diagnostics: list[Diagnostic] = field(default_factory=list, compare=False)

    def contract(self, name: str) -> Optional[ContractDecl]:
        for c in self.contracts:
            if c.name == name:
                return c
        return None

    @property
    def errors(self) -> list[Diagnostic]:
        return [d for d in self.diagnostics if d.severity == "error"]

    @property
    def warnings(self) -> list[Diagnostic]:
        return [d for d in self.diagnostics if d.severity == "warning"]


def to_json(node: Any) -> Any:
    """Debug dump: every node becomes {kind, span, fields..., children}."""
    if isinstance(node, Node):
        out: dict[str, Any] = {"kind": node.kind, "span": [node.span.start, node.span.end]}
        children = []
        for f in fields(node):
            if f.name == "span":
                continue
            value = getattr(node, f.name)
            if isinstance(value, Node) or (isinstance(value, list) and any(isinstance(v, Node) for v in value)):
                children.append({"field": f.name, "value": to_json(value)})
            elif isinstance(value, list) and value and isinstance(value[0], Diagnostic):
                out[f.name] = [d.to_json() for d in value]
            else:
                out[f.name] = value
        out["children"] = children
        return out
    if isinstance(node, list):
        return [to_json(v) for v in node]
    return node
