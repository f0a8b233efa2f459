"""Error type carrying a short machine-readable code."""

from __future__ import annotations

CODES = (
    "schema-violation",
    "summary-incomplete",
    "not-filtered",
    "engine-unreachable",
    "unparseable-response",
    "label-missing",
    "file-not-found",
    "bad-config",
)


class FlashscanError(Exception):
    def __init__(self, code: str, message: str, path: str | None = None):
        super().__init__(f"{code}: {message}" + (f" (at {path})" if path else ""))
        self.code = code
        self.message = message
        self.path = path
