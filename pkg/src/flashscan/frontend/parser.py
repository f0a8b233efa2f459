"""Recursive-descent parser for the supported Solidity subset.

``parse_source`` never raises: lexical and syntax problems become error
diagnostics, unsupported constructs become ``unsupported-construct``
warnings that exclude only the enclosing function.
"""

from __future__ import annotations

import re
from typing import Callable, Optional, TypeVar

from .lexer import ETHER_UNITS, Token, tokenize
from .nodes import (
    ArrayType, Assignment, BinaryOp, Block, BoolLit, Break, CallOption,
    Conditional, Continue, ContractDecl, Diagnostic, DoWhile, ElementaryType,
    Emit, EnumDecl, EventDecl, Expr, ExprStmt, For, FunctionCall,
    FunctionDecl, Identifier, If, IndexAccess, MappingType, MemberAccess,
    ModifierDecl, ModifierInvocation, NewExpr, NumberLit, Param, Placeholder,
    Return, RevertStmt, SourceUnit, Span, StateVarDecl, Stmt, StringLit,
    StructDecl, TupleExpr, TupleVarDecl, TypeExpr, TypeName, UnaryOp,
    UserType, VarDecl, While,
)

T = TypeVar("T")

_ELEMENTARY = re.compile(
    r"^(address|bool|string|bytes|byte|uint|int|ufixed|fixed"
    r"|uint(8|16|24|32|40|48|56|64|72|80|88|96|104|112|120|128|136|144|152|160|168|176|184|192|200|208|216|224|232|240|248|256)"
    r"|int(8|16|24|32|40|48|56|64|72|80|88|96|104|112|120|128|136|144|152|160|168|176|184|192|200|208|216|224|232|240|248|256)"
    r"|bytes([1-9]|[12][0-9]|3[0-2]))$"
)

VISIBILITIES = ("public", "external", "internal", "private")
MUTABILITIES = ("view", "pure", "payable")
LOCATIONS = ("memory", "storage", "calldata")

ASSIGN_OPS = ("=", "+=", "-=", "*=", "/=", "%=", "|=", "&=", "^=", "<<=", ">>=", "**=")

# binding power per binary operator, higher binds tighter
BINARY_PRECEDENCE = {
    "||": 1, "&&": 2, "==": 3, "!=": 3, "<": 4, ">": 4, "<=": 4, ">=": 4,
    "|": 5, "^": 6, "&": 7, "<<": 8, ">>": 8, "+": 9, "-": 9,
    "*": 10, "/": 10, "%": 10, "**": 11,
}

MAX_DEPTH = 200


def is_elementary(name: str) -> bool:
    return bool(_ELEMENTARY.match(name))


class ParseError(Exception):
    def __init__(self, span: Span, message: str, code: str = "syntax-error"):
        super().__init__(message)
        self.span = span
        self.message = message
        self.code = code


class Unsupported(Exception):
    def __init__(self, span: Span, construct: str):
        super().__init__(construct)
        self.span = span
        self.construct = construct


class Parser:
    def __init__(self, text: str, tokens: list[Token], diagnostics: list[Diagnostic]):
        self.text = text
        self.toks = tokens
        self.pos = 0
        self.diags = diagnostics
        self.prev_end = 0
        self.depth = 0

    # --- token helpers -----------------------------------------------------

    def peek(self, k: int = 0) -> Token:
        i = min(self.pos + k, len(self.toks) - 1)
        return self.toks[i]

    def at(self, value: str, k: int = 0) -> bool:
        t = self.peek(k)
        return t.kind in ("punct", "keyword") and t.value == value

    def at_ident(self, k: int = 0) -> bool:
        return self.peek(k).kind == "ident"

    def advance(self) -> Token:
        t = self.toks[self.pos]
        if t.kind != "eof":
            self.pos += 1
            self.prev_end = t.end
        return t

    def accept(self, value: str) -> Optional[Token]:
        if self.at(value):
            return self.advance()
        return None

    def expect(self, value: str) -> Token:
        if not self.at(value):
            t = self.peek()
            found = t.value or "end of input"
            raise ParseError(Span(t.start, max(t.end, t.start + 1)), f"expected {value!r}, found {found!r}")
        return self.advance()

    def expect_ident(self, allow_keywords: bool = False) -> Token:
        t = self.peek()
        if t.kind == "ident" or (allow_keywords and t.kind == "keyword"):
            return self.advance()
        raise ParseError(Span(t.start, max(t.end, t.start + 1)), f"expected identifier, found {t.value or 'end of input'!r}")

    def span_from(self, start: int) -> Span:
        return Span(start, max(self.prev_end, start + 1))

    def error(self, span: Span, message: str, code: str) -> None:
        self.diags.append(Diagnostic("error", span, message, code))

    def warn(self, span: Span, message: str, code: str) -> None:
        self.diags.append(Diagnostic("warning", span, message, code))

    def attempt(self, fn: Callable[[], T]) -> Optional[T]:
        """Run ``fn``; on ParseError rewind and return None."""
        saved = (self.pos, self.prev_end)
        try:
            return fn()
        except ParseError:
            self.pos, self.prev_end = saved
            return None

    def skip_block(self, brace_pos: int) -> None:
        """Skip a balanced {...} starting at the '{' token index."""
        self.pos = brace_pos
        depth = 0
        while self.peek().kind != "eof":
            t = self.advance()
            if t.kind == "punct" and t.value == "{":
                depth += 1
            elif t.kind == "punct" and t.value == "}":
                depth -= 1
                if depth == 0:
                    return

    def enter(self) -> None:
        self.depth += 1
        if self.depth > MAX_DEPTH:
            t = self.peek()
            raise ParseError(Span(t.start, t.end + 1), "nesting too deep", "nesting-too-deep")

    def leave(self) -> None:
        self.depth -= 1

    # --- source unit -------------------------------------------------------

    def parse_unit(self, unit: SourceUnit) -> None:
        names: set[str] = set()
        while self.peek().kind != "eof":
            start_pos = self.pos
            t = self.peek()
            try:
                if self.at("pragma"):
                    self.advance()
                    body_start = self.peek().start
                    while not self.at(";") and self.peek().kind != "eof":
                        self.advance()
                    unit.pragmas.append(self.text[body_start:self.prev_end].strip())
                    self.expect(";")
                elif self.at("import"):
                    self.skip_member(self.pos)
                    self.warn(self.span_from(t.start), "import directives are not resolved; flatten sources first", "import-ignored")
                elif self.at("contract") or self.at("interface") or self.at("library") or self.at("abstract"):
                    decl = self.parse_contract()
                    if decl.name in names:
                        self.error(decl.span, f"duplicate contract name {decl.name!r}", "duplicate-contract")
                    else:
                        names.add(decl.name)
                        unit.contracts.append(decl)
                elif t.kind == "keyword" and t.value in ("struct", "enum", "event", "error", "using", "function"):
                    self.skip_member(self.pos)
                    self.warn(self.span_from(t.start), f"file-level {t.value} declarations are outside the subset", "unsupported-construct")
                else:
                    raise ParseError(Span(t.start, max(t.end, t.start + 1)), f"unexpected {t.value!r} at file level")
            except ParseError as e:
                self.error(e.span, e.message, e.code)
                self.pos = start_pos
                self.skip_toplevel()

    def skip_member(self, start_pos: int) -> None:
        self.pos = start_pos
        depth = 0
        while self.peek().kind != "eof":
            t = self.advance()
            if t.kind != "punct":
                continue
            if t.value == "{":
                depth += 1
            elif t.value == "}":
                if depth == 0:
                    self.pos -= 1
                    return
                depth -= 1
                if depth == 0:
                    return
            elif t.value == ";" and depth == 0:
                return

    def skip_toplevel(self) -> None:
        self.advance()
        while self.peek().kind != "eof":
            if any(self.at(k) for k in ("contract", "interface", "library", "abstract", "pragma")):
                return
            self.advance()

    def parse_contract(self) -> ContractDecl:
        start = self.peek().start
        kind = self.advance().value
        if kind == "abstract":
            self.expect("contract")
        name = self.expect_ident().value
        bases: list[str] = []
        if self.accept("is"):
            while True:
                bases.append(self.parse_dotted_name())
                if self.at("("):
                    self.skip_parens()
                if not self.accept(","):
                    break
        self.expect("{")
        decl = ContractDecl(name=name, kind=kind, base_contracts=bases)
        while not self.at("}") and self.peek().kind != "eof":
            member_pos = self.pos
            try:
                self.parse_member(decl)
            except ParseError as e:
                self.error(e.span, e.message, e.code)
                self.skip_member(member_pos)
                if self.pos == member_pos:
                    self.advance()
            except Unsupported as u:
                self.warn(u.span, f"{u.construct} is outside the supported subset", "unsupported-construct")
                self.skip_member(member_pos)
        self.expect("}")
        decl.span = self.span_from(start)
        return decl

    def parse_dotted_name(self) -> str:
        parts = [self.expect_ident().value]
        while self.at(".") and self.at_ident(1):
            self.advance()
            parts.append(self.advance().value)
        return ".".join(parts)

    def skip_parens(self) -> None:
        depth = 0
        while self.peek().kind != "eof":
            t = self.advance()
            if t.value == "(" and t.kind == "punct":
                depth += 1
            elif t.value == ")" and t.kind == "punct":
                depth -= 1
                if depth == 0:
                    return

    # --- contract members --------------------------------------------------

    def parse_member(self, decl: ContractDecl) -> None:
        t = self.peek()
        if t.kind == "keyword":
            if t.value in ("function", "constructor", "receive", "fallback"):
                decl.functions.append(self.parse_function())
                return
            if t.value == "modifier":
                decl.modifiers.append(self.parse_modifier())
                return
            if t.value == "event":
                decl.events.append(self.parse_event())
                return
            if t.value == "error":
                self.skip_member(self.pos)
                return
            if t.value == "struct":
                decl.structs.append(self.parse_struct())
                return
            if t.value == "enum":
                decl.enums.append(self.parse_enum())
                return
            if t.value == "using":
                raise Unsupported(Span(t.start, t.end), "using-for directive")
        decl.state_vars.append(self.parse_state_var())

    def parse_state_var(self) -> StateVarDecl:
        start = self.peek().start
        type_name = self.parse_type_name()
        visibility = None
        constant = immutable = False
        while True:
            t = self.peek()
            if t.value in VISIBILITIES and t.kind == "keyword":
                visibility = self.advance().value
            elif self.at("constant"):
                self.advance()
                constant = True
            elif self.at("immutable"):
                self.advance()
                immutable = True
            elif self.at("override"):
                self.advance()
                if self.at("("):
                    self.skip_parens()
            elif t.kind == "ident" and t.value == "transient":
                self.advance()
            else:
                break
        name = self.expect_ident().value
        init = None
        if self.accept("="):
            init = self.parse_expression()
        self.expect(";")
        return StateVarDecl(name=name, type_name=type_name, visibility=visibility,
                            constant=constant, immutable=immutable, init=init,
                            span=self.span_from(start))

    def parse_params(self, allow_indexed: bool = False) -> list[Param]:
        self.expect("(")
        params: list[Param] = []
        if self.accept(")"):
            return params
        while True:
            start = self.peek().start
            type_name = self.parse_type_name()
            location = None
            while True:
                if self.peek().value in LOCATIONS and self.peek().kind == "keyword":
                    location = self.advance().value
                elif allow_indexed and self.at("indexed"):
                    self.advance()
                else:
                    break
            name = None
            if self.at_ident():
                name = self.advance().value
            params.append(Param(type_name=type_name, name=name, location=location, span=self.span_from(start)))
            if self.accept(")"):
                return params
            self.expect(",")

    def parse_function(self) -> FunctionDecl:
        start_tok = self.peek()
        head = self.advance().value
        if head == "function":
            name_tok = self.peek()
            if name_tok.kind == "ident" or name_tok.value in ("receive", "fallback"):
                name = self.advance().value
            else:
                raise ParseError(Span(name_tok.start, max(name_tok.end, name_tok.start + 1)), "expected function name")
            kind = "function"
        else:
            name = head
            kind = head
        params = self.parse_params()
        visibility: Optional[str] = None
        mutability = "default"
        modifiers: list[ModifierInvocation] = []
        returns: list[Param] = []
        while True:
            t = self.peek()
            if t.kind == "keyword" and t.value in VISIBILITIES:
                visibility = self.advance().value
            elif t.kind == "keyword" and t.value in MUTABILITIES:
                mutability = self.advance().value
            elif self.at("constant"):
                self.advance()
                mutability = "view"
            elif self.at("virtual"):
                self.advance()
            elif self.at("override"):
                self.advance()
                if self.at("("):
                    self.skip_parens()
            elif self.at("returns"):
                self.advance()
                returns = self.parse_params()
            elif t.kind == "ident":
                mstart = t.start
                mname = self.parse_dotted_name()
                margs = None
                if self.at("("):
                    margs = self.parse_call_args()[0]
                modifiers.append(ModifierInvocation(name=mname, args=margs, span=self.span_from(mstart)))
            else:
                break
        if visibility is None:
            visibility = "external" if kind in ("receive", "fallback") else "public"
        fn = FunctionDecl(name=name, params=params, returns=returns, visibility=visibility,
                          mutability=mutability, modifiers=modifiers, kind=kind)
        if self.accept(";"):
            fn.span = self.span_from(start_tok.start)
            return fn
        if not self.at("{"):
            t = self.peek()
            raise ParseError(Span(t.start, max(t.end, t.start + 1)), f"expected function body, found {t.value!r}")
        brace_pos = self.pos
        try:
            fn.body = self.parse_block()
        except Unsupported as u:
            self.warn(u.span, f"{u.construct} is outside the supported subset; function {name!r} excluded", "unsupported-construct")
            self._exclude(fn, brace_pos, start_tok.start)
        except ParseError as e:
            self.error(e.span, e.message, e.code)
            self._exclude(fn, brace_pos, start_tok.start)
        except RecursionError:
            self.error(Span(start_tok.start, start_tok.end), "nesting too deep", "nesting-too-deep")
            self.depth = 0
            self._exclude(fn, brace_pos, start_tok.start)
        fn.span = self.span_from(start_tok.start)
        return fn

    def _exclude(self, fn: FunctionDecl, brace_pos: int, start: int) -> None:
        self.skip_block(brace_pos)
        fn.body = None
        fn.excluded = True
        fn.raw = self.text[start:self.prev_end]

    def parse_modifier(self) -> ModifierDecl:
        start = self.peek().start
        self.expect("modifier")
        name = self.expect_ident().value
        params: list[Param] = []
        if self.at("("):
            params = self.parse_params()
        while self.at("virtual") or self.at("override"):
            self.advance()
            if self.at("("):
                self.skip_parens()
        body = None
        if not self.accept(";"):
            body = self.parse_block()
        return ModifierDecl(name=name, params=params, body=body, span=self.span_from(start))

    def parse_event(self) -> EventDecl:
        start = self.peek().start
        self.expect("event")
        name = self.expect_ident().value
        params = self.parse_params(allow_indexed=True)
        self.accept("anonymous")
        self.expect(";")
        return EventDecl(name=name, params=params, span=self.span_from(start))

    def parse_struct(self) -> StructDecl:
        start = self.peek().start
        self.expect("struct")
        name = self.expect_ident().value
        self.expect("{")
        members: list[Param] = []
        while not self.accept("}"):
            mstart = self.peek().start
            type_name = self.parse_type_name()
            mname = self.expect_ident().value
            self.expect(";")
            members.append(Param(type_name=type_name, name=mname, span=self.span_from(mstart)))
        return StructDecl(name=name, members=members, span=self.span_from(start))

    def parse_enum(self) -> EnumDecl:
        start = self.peek().start
        self.expect("enum")
        name = self.expect_ident().value
        self.expect("{")
        values: list[str] = []
        while not self.accept("}"):
            values.append(self.expect_ident().value)
            if not self.at("}"):
                self.expect(",")
        return EnumDecl(name=name, values=values, span=self.span_from(start))

    # --- types -------------------------------------------------------------

    def parse_type_name(self) -> TypeName:
        start = self.peek().start
        t = self.peek()
        base: TypeName
        if self.at("mapping"):
            self.advance()
            self.expect("(")
            key = self.parse_type_name()
            if self.at_ident():
                self.advance()
            self.expect("=>")
            value = self.parse_type_name()
            if self.at_ident():
                self.advance()
            self.expect(")")
            base = MappingType(key=key, value=value, span=self.span_from(start))
        elif t.kind == "ident" and is_elementary(t.value):
            self.advance()
            name = t.value
            if name == "address" and self.at("payable"):
                self.advance()
                name = "address payable"
            base = ElementaryType(name=name, span=self.span_from(start))
        elif t.kind == "ident":
            base = UserType(name=self.parse_dotted_name(), span=self.span_from(start))
        elif self.at("function"):
            raise Unsupported(Span(t.start, t.end), "function type")
        else:
            raise ParseError(Span(t.start, max(t.end, t.start + 1)), f"expected type name, found {t.value or 'end of input'!r}")
        while self.at("["):
            self.advance()
            length = None
            if not self.at("]"):
                length = self.parse_expression()
            self.expect("]")
            base = ArrayType(base=base, length=length, span=self.span_from(start))
        return base

    # --- statements --------------------------------------------------------

    def parse_block(self) -> Block:
        start = self.peek().start
        unchecked = bool(self.accept("unchecked"))
        self.expect("{")
        stmts: list[Stmt] = []
        while not self.at("}"):
            if self.peek().kind == "eof":
                t = self.peek()
                raise ParseError(Span(max(t.start - 1, 0), t.start + 1), "unterminated block")
            stmts.append(self.parse_statement())
        self.expect("}")
        return Block(statements=stmts, unchecked=unchecked, span=self.span_from(start))

    def parse_statement(self) -> Stmt:
        self.enter()
        try:
            return self._parse_statement()
        finally:
            self.leave()

    def _parse_statement(self) -> Stmt:
        t = self.peek()
        start = t.start
        if self.at("{") or (self.at("unchecked") and self.at("{", 1)):
            return self.parse_block()
        if self.at("assembly"):
            raise Unsupported(Span(t.start, t.end), "inline assembly")
        if self.at("try"):
            raise Unsupported(Span(t.start, t.end), "try/catch")
        if self.at("if"):
            self.advance()
            self.expect("(")
            cond = self.parse_expression()
            self.expect(")")
            then = self.parse_statement()
            otherwise = None
            if self.accept("else"):
                otherwise = self.parse_statement()
            return If(cond=cond, then=then, otherwise=otherwise, span=self.span_from(start))
        if self.at("for"):
            self.advance()
            self.expect("(")
            init: Optional[Stmt] = None
            if not self.accept(";"):
                init = self.parse_simple_statement()
            cond = None
            if not self.at(";"):
                cond = self.parse_expression()
            self.expect(";")
            post = None
            if not self.at(")"):
                post = self.parse_expression()
            self.expect(")")
            body = self.parse_statement()
            return For(init=init, cond=cond, post=post, body=body, span=self.span_from(start))
        if self.at("while"):
            self.advance()
            self.expect("(")
            cond = self.parse_expression()
            self.expect(")")
            body = self.parse_statement()
            return While(cond=cond, body=body, span=self.span_from(start))
        if self.at("do"):
            self.advance()
            body = self.parse_statement()
            self.expect("while")
            self.expect("(")
            cond = self.parse_expression()
            self.expect(")")
            self.expect(";")
            return DoWhile(body=body, cond=cond, span=self.span_from(start))
        if self.at("return"):
            self.advance()
            value = None
            if not self.at(";"):
                value = self.parse_expression()
            self.expect(";")
            return Return(value=value, span=self.span_from(start))
        if self.at("emit"):
            self.advance()
            call = self.parse_expression()
            self.expect(";")
            return Emit(call=call, span=self.span_from(start))
        if self.at("break"):
            self.advance()
            self.expect(";")
            return Break(span=self.span_from(start))
        if self.at("continue"):
            self.advance()
            self.expect(";")
            return Continue(span=self.span_from(start))
        if self.at("revert") and self.at_ident(1):
            self.advance()
            call = self.parse_expression()
            self.expect(";")
            return RevertStmt(call=call, span=self.span_from(start))
        if t.kind == "ident" and t.value == "_" and self.at(";", 1):
            self.advance()
            self.advance()
            return Placeholder(span=self.span_from(start))
        return self.parse_simple_statement()

    def parse_simple_statement(self) -> Stmt:
        """Variable declaration or expression statement, terminated by ';'."""
        start = self.peek().start
        if self.at("("):
            decl = self.attempt(self.parse_tuple_decl)
            if decl is not None:
                return decl
        if self.looks_like_declaration():
            type_name = self.parse_type_name()
            location = None
            if self.peek().kind == "keyword" and self.peek().value in LOCATIONS:
                location = self.advance().value
            name = self.expect_ident().value
            init = None
            if self.accept("="):
                init = self.parse_expression()
            self.expect(";")
            return VarDecl(type_name=type_name, name=name, location=location, init=init, span=self.span_from(start))
        expr = self.parse_expression()
        self.expect(";")
        return ExprStmt(expr=expr, span=self.span_from(start))

    def looks_like_declaration(self) -> bool:
        if self.at("mapping"):
            return True
        if not self.at_ident():
            return False
        saved = (self.pos, self.prev_end, len(self.diags))
        try:
            self.parse_type_name()
            nxt = self.peek()
            return nxt.kind == "ident" or (nxt.kind == "keyword" and nxt.value in LOCATIONS)
        except (ParseError, Unsupported):
            return False
        finally:
            self.pos, self.prev_end = saved[0], saved[1]
            del self.diags[saved[2]:]

    def parse_tuple_decl(self) -> TupleVarDecl:
        start = self.peek().start
        self.expect("(")
        decls: list[Optional[Param]] = []
        while True:
            if self.at(",") or self.at(")"):
                decls.append(None)
            else:
                pstart = self.peek().start
                type_name = self.parse_type_name()
                location = None
                if self.peek().kind == "keyword" and self.peek().value in LOCATIONS:
                    location = self.advance().value
                name = self.expect_ident().value
                decls.append(Param(type_name=type_name, name=name, location=location, span=self.span_from(pstart)))
            if self.accept(")"):
                break
            self.expect(",")
        if all(d is None for d in decls):
            raise ParseError(self.span_from(start), "not a tuple declaration")
        self.expect("=")
        init = self.parse_expression()
        self.expect(";")
        return TupleVarDecl(decls=decls, init=init, span=self.span_from(start))

    # --- expressions -------------------------------------------------------

    def parse_expression(self) -> Expr:
        self.enter()
        try:
            start = self.peek().start
            expr = self.parse_binary(1)
            if self.at("?"):
                self.advance()
                then = self.parse_expression()
                self.expect(":")
                otherwise = self.parse_expression()
                expr = Conditional(cond=expr, then=then, otherwise=otherwise, span=self.span_from(start))
            t = self.peek()
            if t.kind == "punct" and t.value in ASSIGN_OPS:
                self.advance()
                value = self.parse_expression()
                expr = Assignment(op=t.value, target=expr, value=value, span=self.span_from(start))
            return expr
        finally:
            self.leave()

    def parse_binary(self, min_prec: int) -> Expr:
        start = self.peek().start
        left = self.parse_unary()
        while True:
            t = self.peek()
            prec = BINARY_PRECEDENCE.get(t.value) if t.kind == "punct" else None
            if prec is None or prec < min_prec:
                return left
            self.advance()
            # ** is right associative
            next_min = prec if t.value == "**" else prec + 1
            right = self.parse_binary(next_min)
            left = BinaryOp(op=t.value, left=left, right=right, span=self.span_from(start))

    def parse_unary(self) -> Expr:
        t = self.peek()
        if (t.kind == "punct" and t.value in ("!", "-", "~", "++", "--", "+")) or self.at("delete"):
            self.enter()
            try:
                self.advance()
                operand = self.parse_unary()
            finally:
                self.leave()
            return UnaryOp(op=t.value, operand=operand, prefix=True, span=self.span_from(t.start))
        return self.parse_postfix()

    def parse_call_args(self) -> tuple[list[Expr], Optional[list[str]]]:
        self.expect("(")
        args: list[Expr] = []
        names: Optional[list[str]] = None
        if self.at("{"):
            self.advance()
            names = []
            while not self.accept("}"):
                names.append(self.expect_ident(allow_keywords=True).value)
                self.expect(":")
                args.append(self.parse_expression())
                if not self.at("}"):
                    self.expect(",")
            self.expect(")")
            return args, names
        if self.accept(")"):
            return args, None
        while True:
            args.append(self.parse_expression())
            if self.accept(")"):
                return args, None
            self.expect(",")

    def parse_postfix(self) -> Expr:
        start = self.peek().start
        expr = self.parse_primary()
        while True:
            if self.at("("):
                args, names = self.parse_call_args()
                expr = FunctionCall(callee=expr, args=args, arg_names=names, span=self.span_from(start))
            elif self.at("{") and self.peek(1).kind in ("ident", "keyword") and self.at(":", 2):
                options = self.parse_call_options()
                if not self.at("("):
                    t = self.peek()
                    raise ParseError(Span(t.start, max(t.end, t.start + 1)), "call options must be followed by arguments")
                args, names = self.parse_call_args()
                expr = FunctionCall(callee=expr, args=args, arg_names=names, options=options, span=self.span_from(start))
            elif self.at("["):
                self.advance()
                index = None
                if not self.at("]"):
                    index = self.parse_expression()
                if self.at(":"):
                    t = self.peek()
                    raise Unsupported(Span(t.start, t.end), "array slice")
                self.expect("]")
                expr = IndexAccess(base=expr, index=index, span=self.span_from(start))
            elif self.at("."):
                self.advance()
                member = self.expect_ident(allow_keywords=True).value
                expr = MemberAccess(expr=expr, member=member, span=self.span_from(start))
            elif self.at("++") or self.at("--"):
                op = self.advance().value
                expr = UnaryOp(op=op, operand=expr, prefix=False, span=self.span_from(start))
            else:
                return expr

    def parse_call_options(self) -> list[CallOption]:
        self.expect("{")
        options: list[CallOption] = []
        while not self.accept("}"):
            ostart = self.peek().start
            name = self.expect_ident(allow_keywords=True).value
            self.expect(":")
            value = self.parse_expression()
            options.append(CallOption(name=name, value=value, span=self.span_from(ostart)))
            if not self.at("}"):
                self.expect(",")
        return options

    def parse_primary(self) -> Expr:
        t = self.peek()
        start = t.start
        if t.kind == "number":
            self.advance()
            unit = None
            if self.at_ident() and self.peek().value in ETHER_UNITS:
                unit = self.advance().value
            return NumberLit(value=t.value, unit=unit, span=self.span_from(start))
        if t.kind == "string":
            self.advance()
            value = t.value
            while self.peek().kind == "string":
                value += self.advance().value
            return StringLit(value=value, span=self.span_from(start))
        if self.at("true") or self.at("false"):
            self.advance()
            return BoolLit(value=t.value == "true", span=self.span_from(start))
        if t.kind == "ident":
            if is_elementary(t.value):
                type_name = self.parse_type_name()
                return TypeExpr(type_name=type_name, span=self.span_from(start))
            self.advance()
            return Identifier(name=t.value, span=self.span_from(start))
        if self.at("payable"):
            self.advance()
            return TypeExpr(type_name=ElementaryType(name="payable", span=self.span_from(start)), span=self.span_from(start))
        if self.at("revert"):
            self.advance()
            return Identifier(name="revert", span=self.span_from(start))
        if self.at("new"):
            self.advance()
            type_name = self.parse_type_name()
            return NewExpr(type_name=type_name, span=self.span_from(start))
        if self.at("("):
            self.advance()
            items: list[Optional[Expr]] = []
            saw_comma = False
            if self.accept(")"):
                return TupleExpr(items=[], span=self.span_from(start))
            while True:
                if self.at(",") or self.at(")"):
                    items.append(None)
                else:
                    items.append(self.parse_expression())
                if self.accept(")"):
                    break
                self.expect(",")
                saw_comma = True
            if not saw_comma and items[0] is not None:
                return items[0]
            return TupleExpr(items=items, span=self.span_from(start))
        if self.at("["):
            raise Unsupported(Span(t.start, t.end), "inline array literal")
        raise ParseError(Span(t.start, max(t.end, t.start + 1)), f"unexpected {t.value or 'end of input'!r} in expression")


def _assigned_roots(expr: Expr) -> list[str]:
    if isinstance(expr, Identifier):
        return [expr.name]
    if isinstance(expr, IndexAccess):
        return _assigned_roots(expr.base)
    if isinstance(expr, MemberAccess):
        return _assigned_roots(expr.expr)
    if isinstance(expr, TupleExpr):
        out: list[str] = []
        for item in expr.items:
            if item is not None:
                out.extend(_assigned_roots(item))
        return out
    return []


def _check_view_writes(text: str, decl: ContractDecl, diags: list[Diagnostic]) -> None:
    state_names = {v.name for v in decl.state_vars}
    for fn in decl.functions:
        if fn.excluded or fn.body is None or fn.mutability not in ("view", "pure"):
            continue
        shadowed = {p.name for p in fn.params + fn.returns if p.name}
        for node in fn.body.walk():
            if isinstance(node, VarDecl):
                shadowed.add(node.name)
            elif isinstance(node, TupleVarDecl):
                shadowed.update(d.name for d in node.decls if d is not None and d.name)
        for node in fn.body.walk():
            target = None
            if isinstance(node, Assignment):
                target = node.target
            elif isinstance(node, UnaryOp) and node.op in ("++", "--", "delete"):
                target = node.operand
            if target is None:
                continue
            hits = [r for r in _assigned_roots(target) if r in state_names and r not in shadowed]
            if hits:
                diags.append(Diagnostic("error", node.span,
                                        f"{fn.mutability} function {fn.name!r} writes state variable {hits[0]!r}",
                                        "state-write-in-view"))
                fn.excluded = True
                fn.raw = text[fn.span.start:fn.span.end]
                fn.body = None
                break


def parse_source(text: str | bytes, path: str = "<input>") -> SourceUnit:
    """Parse Solidity source text into a SourceUnit. Never raises."""
    diagnostics: list[Diagnostic] = []
    if isinstance(text, bytes):
        try:
            text = text.decode("utf-8")
        except UnicodeDecodeError as e:
            diagnostics.append(Diagnostic("error", Span(e.start, e.end), "input is not valid UTF-8", "invalid-encoding"))
            text = text.decode("utf-8", errors="replace")
    unit = SourceUnit(path=path, span=Span(0, len(text)))
    try:
        tokens, lex_errors = tokenize(text)
        for le in lex_errors:
            diagnostics.append(Diagnostic("error", Span(le.start, le.end), le.message, "lexical-error"))
        parser = Parser(text, tokens, diagnostics)
        parser.parse_unit(unit)
        for decl in unit.contracts:
            _check_view_writes(text, decl, diagnostics)
    except RecursionError:
        diagnostics.append(Diagnostic("error", Span(0, max(len(text), 1)), "nesting too deep", "nesting-too-deep"))
    except Exception as e:  # totality guard: the parser must never abort
        diagnostics.append(Diagnostic("error", Span(0, max(len(text), 1)), f"internal parser failure: {e}", "internal-error"))
    unit.diagnostics = sorted(diagnostics, key=lambda d: (d.span.start, d.span.end, d.code))
    return unit


def _standalone(text: str, fn: Callable[[Parser], T]) -> T:
    tokens, lex_errors = tokenize(text)
    if lex_errors:
        le = lex_errors[0]
        raise ParseError(Span(le.start, le.end), le.message, "lexical-error")
    p = Parser(text, tokens, [])
    node = fn(p)
    if p.peek().kind != "eof":
        t = p.peek()
        raise ParseError(Span(t.start, t.end), f"trailing input {t.value!r}")
    return node


def parse_expression(text: str) -> Expr:
    """Parse a standalone expression. Raises ParseError/Unsupported."""
    return _standalone(text, Parser.parse_expression)


def parse_statement(text: str) -> Stmt:
    """Parse a standalone statement. Raises ParseError/Unsupported."""
    return _standalone(text, Parser.parse_statement)


def parse_type(text: str) -> TypeName:
    return _standalone(text, Parser.parse_type_name)
