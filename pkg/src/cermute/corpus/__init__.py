"""Bundled kiosk check-in corpus: ceremony, theory, goals, reference marks."""

from __future__ import annotations

import json
from importlib import resources

from ..parser import parse_ceremony, parse_theory

CEREMONY_FILE = "ui_ceremony.cer"
THEORY_FILE = "ui_theory.spthy"
GOALS_FILE = "ui_goals.spthy"
EXPECTED_MATRIX_FILE = "expected_matrix.json"

GOAL_ORDER = ("Complete_Verification", "Valid_Code", "Transaction_Clash")
FUNCTIONAL = "functional"


def read_text(name: str) -> str:
    return resources.files(__package__).joinpath(name).read_text(encoding="utf-8")


def load_ceremony():
    return parse_ceremony(read_text(CEREMONY_FILE), CEREMONY_FILE)


def load_theory():
    return parse_theory(read_text(THEORY_FILE), THEORY_FILE)


def load_goals():
    return parse_theory(read_text(GOALS_FILE), GOALS_FILE)


def load_expected_matrix() -> dict:
    return json.loads(read_text(EXPECTED_MATRIX_FILE))


def goal_lemmas():
    doc = load_goals()
    by_name = {l.name: l for l in doc.lemmas}
    return [by_name[n] for n in GOAL_ORDER]


def functional_lemma():
    doc = load_goals()
    return next(l for l in doc.lemmas if l.name == FUNCTIONAL)
