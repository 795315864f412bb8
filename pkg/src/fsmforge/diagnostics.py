"""Diagnostics shared by the parser, validator and CLI."""
from __future__ import annotations

import os
from dataclasses import dataclass
from typing import Optional

_COLORS = {"error": "\033[31m", "warning": "\033[33m"}
_RESET = "\033[0m"


@dataclass(frozen=True)
class SourceSpan:
    """Location of a lexeme in an input file (1-based line/column)."""

    file: str
    line: int
    column: int
    length: int = 0

    def __post_init__(self):
        if self.line < 1 or self.column < 1:
            raise ValueError("line and column are 1-based")


@dataclass(frozen=True)
class Diagnostic:
    code: str
    severity: str  # "error" | "warning"
    message: str
    path: str = ""
    span: Optional[SourceSpan] = None

    def render(self, color: Optional[bool] = None) -> str:
        if color is None:
            color = os.environ.get("FSMFORGE_COLOR", "0") == "1"
        parts = [f"{self.severity} {self.code}"]
        if self.span is not None:
            parts.append(f"at {self.span.file}:{self.span.line}:{self.span.column}")
        if self.path:
            parts.append(f"({self.path})")
        text = " ".join(parts) + f": {self.message}"
        if color:
            return _COLORS.get(self.severity, "") + text + _RESET
        return text


def has_errors(diagnostics) -> bool:
    return any(d.severity == "error" for d in diagnostics)
