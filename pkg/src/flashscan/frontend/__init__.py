"""Solidity-subset frontend: tokenizer, parser, printer, grammar table."""

from .grammar import is_supported, subset_grammar
from .nodes import ContractDecl, Diagnostic, FunctionDecl, SourceUnit, Span, to_json
from .parser import ParseError, Unsupported, parse_expression, parse_source, parse_statement
from .printer import print_source

__all__ = [
    "ContractDecl", "Diagnostic", "FunctionDecl", "ParseError", "SourceUnit",
    "Span", "Unsupported", "is_supported", "parse_expression", "parse_source",
    "parse_statement", "print_source", "subset_grammar", "to_json",
]
