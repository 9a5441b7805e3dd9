"""Verdicts over bounded trace spaces and the attack matrix.

All verdicts are bounded-semantics verdicts: violated means a legal
trace of at most the step bound falsifies the property (and carries a
replayable counterexample); holds means no such trace exists within the
bound; vacuous means no trace within the bound even instantiates the
property's antecedent. An exists-trace property whose witness search
exhausts a truncated space is inconclusive-at-bound rather than violated.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from . import evaluate
from . import formulas as fm
from .engine.run import analyze
from .rules import Trace

HOLDS = "holds"
VIOLATED = "violated"
VACUOUS = "vacuous"
INCONCLUSIVE = "inconclusive-at-bound"

ATTACK = "attack-found"
NO_ATTACK = "no-attack"


@dataclass
class Verdict:
    lemma: str
    result: str
    witness: Optional[Trace] = None
    bindings: Optional[dict] = None
    truncated: bool = False
    warnings: tuple = ()

    def to_json(self, witness_id=None):
        from . import terms

        rendered = None
        if self.bindings:
            rendered = {
                k: (v if isinstance(v, int) else terms.render(v))
                for k, v in self.bindings.items()
            }
        return {
            "lemma": self.lemma,
            "result": self.result,
            "witnessId": witness_id,
            "bindings": rendered,
            "truncated": self.truncated,
            "warnings": list(self.warnings),
        }


def _emitted_action_names(rules) -> frozenset:
    names = set()
    for r in rules:
        for f in r.actions:
            names.add(f[0])
    return frozenset(names)


def _unknown_atom_warnings(rules, formula) -> tuple:
    emitted = _emitted_action_names(rules)
    missing = sorted(formula.action_names() - emitted)
    return tuple(
        f"action fact {name} is not emitted by any rule; its atoms are unsatisfiable"
        for name in missing
    )


def _verdict_from_report(formula, report, truncated, warnings) -> Verdict:
    if formula.kind == fm.EXISTS_TRACE:
        if report.witness is not None:
            _, bindings = evaluate.eval_on_trace(formula, report.witness)
            return Verdict(
                formula.name, HOLDS, witness=report.witness, bindings=bindings,
                truncated=truncated, warnings=warnings,
            )
        result = INCONCLUSIVE if truncated else VIOLATED
        return Verdict(formula.name, result, truncated=truncated, warnings=warnings)
    if report.violation is not None:
        _, bindings = evaluate.eval_on_trace(formula, report.violation)
        return Verdict(
            formula.name, VIOLATED, witness=report.violation, bindings=bindings,
            truncated=truncated, warnings=warnings,
        )
    if not report.antecedent_seen and fm.implication_parts(formula.body) is not None:
        return Verdict(formula.name, VACUOUS, truncated=truncated, warnings=warnings)
    return Verdict(formula.name, HOLDS, truncated=truncated, warnings=warnings)


def check_lemma(rules, restrictions, formula: fm.LemmaFormula, bound: int) -> Verdict:
    """Bounded verdict for one lemma."""
    warnings = _unknown_atom_warnings(rules, formula)
    outcome = analyze(rules, restrictions, [formula], bound)
    report = outcome.goals[formula.name]
    return _verdict_from_report(formula, report, outcome.truncated, warnings)


def check_model(rules, restrictions, formulas, bound: int) -> dict:
    """Verdicts for several lemmas over one shared exploration."""
    outcome = analyze(rules, restrictions, list(formulas), bound)
    verdicts = {}
    for f in formulas:
        warnings = _unknown_atom_warnings(rules, f)
        verdicts[f.name] = _verdict_from_report(
            f, outcome.goals[f.name], outcome.truncated, warnings
        )
    return verdicts


@dataclass
class MatrixCell:
    lemma: str
    verdict: Verdict

    @property
    def outcome(self) -> str:
        if self.verdict.result == VIOLATED:
            return ATTACK
        if self.verdict.result == VACUOUS:
            return VACUOUS
        if self.verdict.result == INCONCLUSIVE:
            return "inconclusive"
        return NO_ATTACK


@dataclass
class MatrixRow:
    label: str
    description: str
    cells: list  # of MatrixCell


@dataclass
class AttackMatrix:
    rows: list  # of MatrixRow
    lemmas: tuple  # column order
    bound: int

    def cell(self, label: str, lemma: str) -> Optional[MatrixCell]:
        for row in self.rows:
            if row.label == label:
                for c in row.cells:
                    if c.lemma == lemma:
                        return c
        return None


def build_matrix(catalog, lemmas, restrictions, bound: int) -> AttackMatrix:
    """One verdict per (mutant, goal): attack-found iff violated in bound."""
    rows = []
    names = tuple(f.name for f in lemmas)
    for mutant in catalog:
        verdicts = check_model(mutant.rules, restrictions, lemmas, bound)
        cells = [MatrixCell(n, verdicts[n]) for n in names]
        rows.append(
            MatrixRow(label=str(mutant.label), description=mutant.description, cells=cells)
        )
    return AttackMatrix(rows=rows, lemmas=names, bound=bound)
