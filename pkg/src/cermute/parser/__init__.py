"""Parsers and pretty-printer for theory and ceremony documents."""

from .cer import parse_ceremony, parse_role_scripts
from .errors import ParseError, SourceSpan
from .printer import print_ceremony, print_lemma, print_rule, print_theory
from .spthy import TheoryDocument, parse_lemma, parse_theory

__all__ = [
    "ParseError",
    "SourceSpan",
    "TheoryDocument",
    "parse_ceremony",
    "parse_lemma",
    "parse_role_scripts",
    "parse_theory",
    "print_ceremony",
    "print_lemma",
    "print_rule",
    "print_theory",
]
