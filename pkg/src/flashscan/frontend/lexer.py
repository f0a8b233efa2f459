"""Tokenizer for the supported Solidity subset.

Offsets are character offsets into the decoded source string.
"""

from __future__ import annotations

from dataclasses import dataclass

KEYWORDS = frozenset({
    "pragma", "import", "contract", "interface", "library", "abstract", "is",
    "function", "modifier", "constructor", "receive", "fallback", "event",
    "error", "struct", "enum", "using", "for", "returns", "return", "if",
    "else", "while", "do", "break", "continue", "emit", "new", "delete",
    "mapping", "memory", "storage", "calldata", "public", "external",
    "internal", "private", "view", "pure", "payable", "constant",
    "immutable", "virtual", "override", "true", "false", "assembly", "try",
    "catch", "unchecked", "indexed", "anonymous", "revert",
})

# longest first so that maximal munch works with a simple prefix scan
PUNCTUATION = sorted([
    "**=", ">>=", "<<=", "=>", "==", "!=", "<=", ">=", "&&", "||", "++", "--",
    "+=", "-=", "*=", "/=", "%=", "|=", "&=", "^=", "<<", ">>", "**",
    "+", "-", "*", "/", "%", "<", ">", "=", "!", "~", "&", "|", "^", "?",
    ":", ";", ",", ".", "(", ")", "[", "]", "{", "}",
], key=len, reverse=True)

ETHER_UNITS = frozenset({
    "wei", "gwei", "szabo", "finney", "ether",
    "seconds", "minutes", "hours", "days", "weeks", "years",
})


@dataclass(frozen=True)
class Token:
    kind: str  # ident | keyword | number | string | punct | eof
    value: str
    start: int
    end: int


@dataclass(frozen=True)
class LexError:
    start: int
    end: int
    message: str


def _is_ident_start(ch: str) -> bool:
    return ch == "_" or ch == "$" or ("a" <= ch <= "z") or ("A" <= ch <= "Z")


def _is_ident_part(ch: str) -> bool:
    return _is_ident_start(ch) or ("0" <= ch <= "9")


def tokenize(text: str) -> tuple[list[Token], list[LexError]]:
    """Split ``text`` into tokens. Never raises; bad input becomes LexErrors."""
    tokens: list[Token] = []
    errors: list[LexError] = []
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch in " \t\r\n\f\v":
            i += 1
            continue
        if text.startswith("//", i):
            j = text.find("\n", i)
            i = n if j < 0 else j + 1
            continue
        if text.startswith("/*", i):
            j = text.find("*/", i + 2)
            if j < 0:
                errors.append(LexError(i, n, "unterminated block comment"))
                break
            i = j + 2
            continue
        if _is_ident_start(ch):
            j = i + 1
            while j < n and _is_ident_part(text[j]):
                j += 1
            word = text[i:j]
            # hex"..." / unicode"..." literals
            if word in ("hex", "unicode") and j < n and text[j] in "\"'":
                end = _scan_string(text, j)
                if end < 0:
                    errors.append(LexError(i, n, "unterminated string literal"))
                    break
                tokens.append(Token("string", text[j + 1:end - 1], i, end))
                i = end
                continue
            tokens.append(Token("keyword" if word in KEYWORDS else "ident", word, i, j))
            i = j
            continue
        if "0" <= ch <= "9" or (ch == "." and i + 1 < n and "0" <= text[i + 1] <= "9"):
            j = i
            if text.startswith(("0x", "0X"), i):
                j = i + 2
                while j < n and (text[j] in "0123456789abcdefABCDEF_"):
                    j += 1
            else:
                while j < n and (text[j].isdigit() or text[j] in "._"):
                    j += 1
                if j < n and text[j] in "eE":
                    k = j + 1
                    if k < n and text[k] == "-":
                        k += 1
                    if k < n and text[k].isdigit():
                        j = k
                        while j < n and text[j].isdigit():
                            j += 1
            if j < n and _is_ident_part(text[j]):
                errors.append(LexError(i, j + 1, "malformed number literal"))
                while j < n and _is_ident_part(text[j]):
                    j += 1
                i = j
                continue
            tokens.append(Token("number", text[i:j], i, j))
            i = j
            continue
        if ch in "\"'":
            end = _scan_string(text, i)
            if end < 0:
                errors.append(LexError(i, n, "unterminated string literal"))
                break
            tokens.append(Token("string", text[i + 1:end - 1], i, end))
            i = end
            continue
        for p in PUNCTUATION:
            if text.startswith(p, i):
                tokens.append(Token("punct", p, i, i + len(p)))
                i += len(p)
                break
        else:
            errors.append(LexError(i, i + 1, f"unexpected character {ch!r}"))
            i += 1
    tokens.append(Token("eof", "", n, n))
    return tokens, errors


def _scan_string(text: str, i: int) -> int:
    quote = text[i]
    j = i + 1
    n = len(text)
    while j < n:
        c = text[j]
        if c == "\\":
            j += 2
            continue
        if c == quote:
            return j + 1
        if c == "\n":
            return -1
        j += 1
    return -1
