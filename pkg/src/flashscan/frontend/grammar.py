"""Machine-readable description of the supported Solidity subset."""

from __future__ import annotations

from dataclasses import asdict, dataclass


@dataclass(frozen=True)
class Construct:
    name: str
    category: str
    supported: bool
    note: str = ""


_CONSTRUCTS = [
    Construct("contract declaration", "declaration", True),
    Construct("interface declaration", "declaration", True),
    Construct("abstract contract declaration", "declaration", True),
    Construct("library declaration", "declaration", True, "parsed; calls into it are opaque"),
    Construct("inheritance list", "declaration", True, "base names recorded, bodies not merged"),
    Construct("version pragma", "declaration", True, "recorded, not enforced"),
    Construct("import directive", "declaration", False, "ignored with a warning; flatten first"),
    Construct("state variable of elementary type", "declaration", True),
    Construct("mapping declaration", "declaration", True, "nested mappings included"),
    Construct("dynamic array", "declaration", True),
    Construct("struct declaration", "declaration", True),
    Construct("enum declaration", "declaration", True),
    Construct("event declaration", "declaration", True),
    Construct("custom error declaration", "declaration", True, "skipped"),
    Construct("function declaration", "declaration", True),
    Construct("function visibility", "declaration", True, "public, external, internal, private"),
    Construct("function mutability", "declaration", True, "view, pure, payable"),
    Construct("constructor", "declaration", True),
    Construct("receive/fallback function", "declaration", True),
    Construct("modifier declaration", "declaration", True),
    Construct("modifier invocation", "declaration", True),
    Construct("modifier with arguments", "declaration", True),
    Construct("local variable declaration", "statement", True),
    Construct("tuple destructuring declaration", "statement", True),
    Construct("assignment", "statement", True),
    Construct("compound assignment", "statement", True),
    Construct("if/else", "statement", True),
    Construct("for loop", "statement", True),
    Construct("while loop", "statement", True),
    Construct("do-while loop", "statement", True),
    Construct("require", "statement", True),
    Construct("assert", "statement", True),
    Construct("revert", "statement", True),
    Construct("return", "statement", True),
    Construct("expression statement", "statement", True),
    Construct("emit", "statement", True, "ignored semantically"),
    Construct("unchecked block", "statement", True),
    Construct("arithmetic operators", "expression", True, "+ - * / %"),
    Construct("comparison operators", "expression", True),
    Construct("logical operators", "expression", True),
    Construct("member access", "expression", True),
    Construct("index access", "expression", True),
    Construct("internal function call", "expression", True),
    Construct("external function call", "expression", True, "member call on a contract- or address-typed expression"),
    Construct("call options", "expression", True, "e.g. call{value: v}"),
    Construct("new array expression", "expression", True, "new T[](n)"),
    Construct("transaction properties", "expression", True, "msg.sender, msg.value, msg.data, block.timestamp"),
    Construct("address balance", "expression", True, "address(x).balance"),
    Construct("payable conversion", "expression", True),
    Construct("inline assembly", "statement", False, "excludes the enclosing function"),
    Construct("try/catch", "statement", False, "excludes the enclosing function"),
    Construct("user-defined operators", "expression", False),
    Construct("using-for directive", "declaration", False, "skipped with a warning"),
    Construct("inline array literal", "expression", False, "excludes the enclosing function"),
    Construct("array slice", "expression", False, "excludes the enclosing function"),
    Construct("function type", "declaration", False),
    Construct("file-level function or struct", "declaration", False, "skipped with a warning"),
]


def subset_grammar() -> list[dict]:
    """Every construct with its support status, in a stable order."""
    return [asdict(c) for c in _CONSTRUCTS]


def is_supported(construct: str) -> bool:
    """Look up a construct by name. Unknown names raise KeyError."""
    key = construct.strip().lower()
    for c in _CONSTRUCTS:
        if c.name == key:
            return c.supported
    raise KeyError(construct)
