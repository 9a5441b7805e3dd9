"""Source locations and parse failures."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional


@dataclass(frozen=True)
class SourceSpan:
    file: str
    start_line: int
    start_col: int
    end_line: int
    end_col: int

    def __post_init__(self):
        if (self.end_line, self.end_col) < (self.start_line, self.start_col):
            raise ValueError("span end precedes start")

    def __str__(self):
        return f"{self.start_line}:{self.start_col}"


class ParseError(Exception):
    def __init__(self, message: str, span: SourceSpan, hint: Optional[str] = None):
        self.message = message
        self.span = span
        self.hint = hint
        text = f"{message} at {span}"
        if hint:
            text += f" ({hint})"
        super().__init__(text)
