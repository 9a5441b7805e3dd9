"""Tokenizer shared by the theory and ceremony parsers.

Strips // line and /* */ block comments, accepts LF or CRLF input, and
rejects non-ASCII identifiers. Every token carries a SourceSpan.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import ParseError, SourceSpan

IDENT = "ident"
NUM = "num"
QCONST = "qconst"
PUBVAR = "pubvar"
FRESHVAR = "freshvar"
TEMPORAL = "temporal"
PUNCT = "punct"
EOF = "eof"

# longest-match first
_PUNCTS = (
    "--[",
    "]->",
    "-->",
    "==>",
    "<-",
    "->",
    "[",
    "]",
    "(",
    ")",
    "<",
    ">",
    ",",
    ".",
    ":",
    ";",
    "=",
    "&",
    "|",
    "@",
    "/",
    "{",
    "}",
    '"',
    "!",
    "-",
)

_IDENT_START = frozenset("abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ_")
_IDENT_CONT = _IDENT_START | frozenset("0123456789")
_DIGITS = frozenset("0123456789")


@dataclass(frozen=True)
class Token:
    kind: str
    value: str
    span: SourceSpan


class Lexer:
    def __init__(self, text: str, filename: str = "<input>"):
        self.text = text.replace("\r\n", "\n")
        self.filename = filename
        self.pos = 0
        self.line = 1
        self.col = 1

    def _span(self, start_line, start_col) -> SourceSpan:
        return SourceSpan(self.filename, start_line, start_col, self.line, max(self.col - 1, start_col))

    def _advance(self, n: int) -> None:
        for _ in range(n):
            if self.text[self.pos] == "\n":
                self.line += 1
                self.col = 1
            else:
                self.col += 1
            self.pos += 1

    def _skip_trivia(self) -> None:
        text = self.text
        while self.pos < len(text):
            ch = text[self.pos]
            if ch in " \t\n":
                self._advance(1)
            elif text.startswith("//", self.pos):
                while self.pos < len(text) and text[self.pos] != "\n":
                    self._advance(1)
            elif text.startswith("/*", self.pos):
                start_line, start_col = self.line, self.col
                self._advance(2)
                while self.pos < len(text) and not text.startswith("*/", self.pos):
                    self._advance(1)
                if self.pos >= len(text):
                    raise ParseError(
                        "unterminated block comment",
                        SourceSpan(self.filename, start_line, start_col, self.line, self.col),
                    )
                self._advance(2)
            else:
                return

    def _ident(self) -> str:
        text = self.text
        start = self.pos
        if self.pos >= len(text) or text[self.pos] not in _IDENT_START:
            ch = text[self.pos] if self.pos < len(text) else "<end of input>"
            if self.pos < len(text) and ord(text[self.pos]) > 127:
                raise ParseError(
                    f"non-ASCII character {ch!r} (identifiers are ASCII-only)",
                    SourceSpan(self.filename, self.line, self.col, self.line, self.col),
                )
            raise ParseError(
                f"expected identifier, found {ch!r}",
                SourceSpan(self.filename, self.line, self.col, self.line, self.col),
            )
        while self.pos < len(text) and text[self.pos] in _IDENT_CONT:
            self._advance(1)
        return text[start : self.pos]

    def tokens(self) -> list:
        out = []
        text = self.text
        while True:
            self._skip_trivia()
            if self.pos >= len(text):
                out.append(
                    Token(EOF, "", SourceSpan(self.filename, self.line, self.col, self.line, self.col))
                )
                return out
            line, col = self.line, self.col
            ch = text[self.pos]
            if ord(ch) > 127:
                raise ParseError(
                    f"non-ASCII character {ch!r} (identifiers are ASCII-only)",
                    SourceSpan(self.filename, line, col, line, col),
                )
            if ch == "'":
                self._advance(1)
                start = self.pos
                while self.pos < len(text) and text[self.pos] != "'":
                    if text[self.pos] == "\n":
                        raise ParseError(
                            "unterminated quoted constant",
                            SourceSpan(self.filename, line, col, self.line, self.col),
                        )
                    self._advance(1)
                if self.pos >= len(text):
                    raise ParseError(
                        "unterminated quoted constant",
                        SourceSpan(self.filename, line, col, self.line, self.col),
                    )
                value = text[start : self.pos]
                self._advance(1)
                out.append(Token(QCONST, value, self._span(line, col)))
                continue
            if ch == "$":
                self._advance(1)
                name = self._ident()
                out.append(Token(PUBVAR, name, self._span(line, col)))
                continue
            if ch == "~":
                self._advance(1)
                name = self._ident()
                out.append(Token(FRESHVAR, name, self._span(line, col)))
                continue
            if ch == "#":
                self._advance(1)
                name = self._ident()
                out.append(Token(TEMPORAL, name, self._span(line, col)))
                continue
            if ch in _IDENT_START:
                name = self._ident()
                out.append(Token(IDENT, name, self._span(line, col)))
                continue
            if ch in _DIGITS:
                start = self.pos
                while self.pos < len(text) and text[self.pos] in _DIGITS:
                    self._advance(1)
                out.append(Token(NUM, text[start : self.pos], self._span(line, col)))
                continue
            for p in _PUNCTS:
                if text.startswith(p, self.pos):
                    self._advance(len(p))
                    out.append(Token(PUNCT, p, self._span(line, col)))
                    break
            else:
                raise ParseError(
                    f"unexpected character {ch!r}",
                    SourceSpan(self.filename, line, col, line, col),
                )


def tokenize(text: str, filename: str = "<input>") -> list:
    return Lexer(text, filename).tokens()
