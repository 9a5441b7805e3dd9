"""Extension-stability analysis of trace formulas.

Appending events to a trace never removes action instances and only adds
timestamps larger than every existing one. Many formulas are therefore
stable in one direction: once an all-traces implication is falsified on
a prefix, no extension can repair it (the antecedent instance persists
and the consequent, whose existential timestamps are bounded above by
antecedent timestamps, can never become true). For such formulas a
violating prefix witnesses a violating maximal trace, so existence can
be decided on a breadth-first state search instead of an enumeration of
every interleaving.

The analysis is conservative: when it cannot prove stability it says so,
and callers fall back to exact leaf evaluation.
"""

from __future__ import annotations

from .. import formulas as fm


def _conjuncts(node):
    if isinstance(node, fm.And):
        for item in node.items:
            yield from _conjuncts(item)
    else:
        yield node


def _upper_bounds(matrix, variables, fixed) -> bool:
    """Every listed temporal variable is bounded above by a fixed one via
    a top-level conjunct i < u or #i = #u."""
    temporal = [n for n, s in variables if s == fm.SORT_TEMPORAL]
    if not temporal:
        return True
    bounded = set()
    for c in _conjuncts(matrix):
        if isinstance(c, fm.TemporalLess) and c.right in fixed:
            bounded.add(c.left)
        if isinstance(c, fm.TemporalEq):
            if c.right in fixed:
                bounded.add(c.left)
            if c.left in fixed:
                bounded.add(c.right)
    return all(v in bounded for v in temporal)


def _msg_anchored(node, names) -> bool:
    """Every listed message variable occurs in some action atom below."""
    from .. import terms

    found = set()
    for atom in fm.iter_atoms(node):
        if isinstance(atom, fm.ActionAtom):
            for a in atom.args:
                for v in terms.variables(a):
                    found.add(v[1])
    return set(names) <= found


def stable_true(node, fixed) -> bool:
    """Truth under the current assignment survives event appends."""
    if isinstance(node, (fm.ActionAtom, fm.TemporalLess, fm.TemporalEq, fm.TermEq)):
        return True  # refers to fixed timestamps/values only
    if isinstance(node, fm.Not):
        return stable_false(node.body, fixed)
    if isinstance(node, (fm.And, fm.Or)):
        return all(stable_true(i, fixed) for i in node.items)
    if isinstance(node, fm.Implies):
        return stable_false(node.antecedent, fixed) and stable_true(node.consequent, fixed)
    if isinstance(node, fm.Quantifier):
        if node.kind == "Ex":
            # a witness assignment persists
            inner = fixed | {n for n, s in node.variables if s == fm.SORT_TEMPORAL}
            return stable_true(node.body, inner)
        return False  # new steps create new universal instances
    return False


def stable_false(node, fixed) -> bool:
    """Falsity under the current assignment survives event appends."""
    if isinstance(node, (fm.ActionAtom, fm.TemporalLess, fm.TemporalEq, fm.TermEq)):
        return True
    if isinstance(node, fm.Not):
        return stable_true(node.body, fixed)
    if isinstance(node, (fm.And, fm.Or)):
        return all(stable_false(i, fixed) for i in node.items)
    if isinstance(node, fm.Implies):
        return stable_true(node.antecedent, fixed) and stable_false(node.consequent, fixed)
    if isinstance(node, fm.Quantifier):
        if node.kind == "All":
            # the existing counter-assignment persists
            inner = fixed | {n for n, s in node.variables if s == fm.SORT_TEMPORAL}
            return stable_false(node.body, inner)
        # an existential stays false only if new steps and new values are
        # excluded from its range: temporal variables need upper bounds,
        # message variables an anchoring action atom
        inner = fixed | {n for n, s in node.variables if s == fm.SORT_TEMPORAL}
        msg_names = [n for n, s in node.variables if s == fm.SORT_MSG]
        return (
            _upper_bounds(node.body, node.variables, fixed)
            and _msg_anchored(node.body, msg_names)
            and stable_false(node.body, inner)
        )
    return False


def _strip_universals(body):
    fixed = set()
    node = body
    while isinstance(node, fm.Quantifier) and node.kind == "All":
        fixed.update(n for n, s in node.variables if s == fm.SORT_TEMPORAL)
        node = node.body
    return node, fixed


def _positive_guard(node) -> bool:
    """Quantifier-free conjunction of atoms and comparisons."""
    for c in _conjuncts(node):
        if not isinstance(c, (fm.ActionAtom, fm.TemporalLess, fm.TemporalEq, fm.TermEq)):
            return False
    return True


def violation_monotone(formula: fm.LemmaFormula) -> bool:
    """A falsified prefix stays falsified under every extension."""
    if formula.kind == fm.EXISTS_TRACE:
        return False
    matrix, fixed = _strip_universals(formula.body)
    if isinstance(matrix, fm.Implies):
        return _positive_guard(matrix.antecedent) and stable_false(
            matrix.consequent, fixed
        )
    # no implication: a falsifying assignment must simply persist
    return stable_false(matrix, fixed)


def satisfaction_monotone(formula: fm.LemmaFormula) -> bool:
    """A satisfied prefix stays satisfied under every extension."""
    return stable_true(formula.body, set())
