"""Quantified trace formulas (lemmas and restrictions).

The AST mirrors the guarded first-order fragment the theory files use:
action-fact atoms timestamped with @, timestamp ordering/equality, term
equality, the usual connectives, and All/Ex quantifier blocks over
message and temporal variables.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from . import terms
from .terms import Term

ALL_TRACES = "all-traces"
EXISTS_TRACE = "exists-trace"
RESTRICTION = "restriction"

SORT_MSG = "msg"
SORT_TEMPORAL = "temporal"


@dataclass(frozen=True)
class ActionAtom:
    name: str
    args: tuple  # of Term (message variables appear as VAR_MSG)
    timestamp: str  # temporal variable name


@dataclass(frozen=True)
class TemporalLess:
    left: str
    right: str


@dataclass(frozen=True)
class TemporalEq:
    left: str
    right: str


@dataclass(frozen=True)
class TermEq:
    left: Term
    right: Term


@dataclass(frozen=True)
class Not:
    body: object


@dataclass(frozen=True)
class And:
    items: tuple


@dataclass(frozen=True)
class Or:
    items: tuple


@dataclass(frozen=True)
class Implies:
    antecedent: object
    consequent: object


@dataclass(frozen=True)
class Quantifier:
    kind: str  # "All" | "Ex"
    variables: tuple  # of (name, sort)
    body: object


@dataclass(frozen=True)
class LemmaFormula:
    name: str
    kind: str  # ALL_TRACES | EXISTS_TRACE | RESTRICTION
    body: object  # closed formula (quantifiers included in the body)

    def action_names(self) -> frozenset:
        return frozenset(a.name for a in iter_atoms(self.body) if isinstance(a, ActionAtom))


def iter_atoms(node):
    if isinstance(node, (ActionAtom, TemporalLess, TemporalEq, TermEq)):
        yield node
    elif isinstance(node, Not):
        yield from iter_atoms(node.body)
    elif isinstance(node, (And, Or)):
        for item in node.items:
            yield from iter_atoms(item)
    elif isinstance(node, Implies):
        yield from iter_atoms(node.antecedent)
        yield from iter_atoms(node.consequent)
    elif isinstance(node, Quantifier):
        yield from iter_atoms(node.body)
    else:
        raise TypeError(f"not a formula node: {node!r}")


def negate(node):
    """Syntactic negation (used for the all-traces/exists-trace duality)."""
    return node.body if isinstance(node, Not) else Not(node)


def implication_parts(body):
    """(antecedent, consequent) after stripping leading quantifiers, or None.

    Vacuity is defined for all-traces lemmas of this shape: the lemma is
    vacuous when the antecedent never instantiates in any trace.
    """
    node = body
    prefix = []
    while isinstance(node, Quantifier):
        prefix.append(node)
        node = node.body
    if isinstance(node, Implies):
        return prefix, node.antecedent, node.consequent
    return None


def is_prefix_monotone(formula: LemmaFormula) -> bool:
    """True for prenex-universal formulas with quantifier-free matrix.

    A violation of such a formula on a trace prefix can never be repaired
    by extending the trace, so exploration may prune at the violation.
    """
    node = formula.body
    while isinstance(node, Quantifier):
        if node.kind != "All":
            return False
        node = node.body

    def qfree(n):
        if isinstance(n, (ActionAtom, TemporalLess, TemporalEq, TermEq)):
            return True
        if isinstance(n, Not):
            return qfree(n.body)
        if isinstance(n, (And, Or)):
            return all(qfree(i) for i in n.items)
        if isinstance(n, Implies):
            return qfree(n.antecedent) and qfree(n.consequent)
        return False

    return qfree(node)


def render(node, parent_prec=0) -> str:
    """Surface syntax; parenthesizes per the parser's precedence."""
    if isinstance(node, ActionAtom):
        args = ", ".join(terms.render(a) for a in node.args)
        return f"{node.name}({args}) @ #{node.timestamp}"
    if isinstance(node, TemporalLess):
        return f"#{node.left} < #{node.right}"
    if isinstance(node, TemporalEq):
        return f"#{node.left} = #{node.right}"
    if isinstance(node, TermEq):
        return f"{terms.render(node.left)} = {terms.render(node.right)}"
    if isinstance(node, Not):
        return f"not ({render(node.body)})"
    if isinstance(node, And):
        s = " & ".join(render(i, 3) for i in node.items)
        return f"({s})" if parent_prec > 2 else s
    if isinstance(node, Or):
        s = " | ".join(render(i, 2) for i in node.items)
        return f"({s})" if parent_prec > 1 else s
    if isinstance(node, Implies):
        s = f"{render(node.antecedent, 1)} ==> {render(node.consequent)}"
        return f"({s})" if parent_prec > 0 else s
    if isinstance(node, Quantifier):
        vs = " ".join(f"#{n}" if s == SORT_TEMPORAL else n for n, s in node.variables)
        s = f"{node.kind} {vs}. {render(node.body)}"
        return f"({s})" if parent_prec > 0 else s
    raise TypeError(f"not a formula node: {node!r}")
