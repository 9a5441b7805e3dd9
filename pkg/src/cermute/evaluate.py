"""First-order evaluation of trace formulas.

A history is a tuple of (timestamp, facts) pairs, facts being the ground
action facts recorded at that timestamp. Quantifiers range over the
history: temporal variables over its timestamps, message variables over
ground terms appearing as action-fact arguments. Candidate values are
driven from the atoms a variable occurs in, which keeps the search close
to the number of matching fact instances rather than the full domain
product.
"""

from __future__ import annotations

from typing import Optional

from . import formulas as fm
from . import terms
from .rules import Trace


def history_of(trace: Trace) -> tuple:
    return tuple((s.timestamp, s.actions) for s in trace.steps)


def _match_args(pattern_args, ground_args, env):
    """Match atom argument patterns; message variables read/extend env."""
    if len(pattern_args) != len(ground_args):
        return None
    binding = env
    for p, g in zip(pattern_args, ground_args):
        binding = _match_term(p, g, binding)
        if binding is None:
            return None
    return binding


def _match_term(p, g, env):
    if p[0] == terms.VAR_MSG:
        bound = env.get(p[1])
        if bound is not None:
            return env if bound == g else None
        out = dict(env)
        out[p[1]] = g
        return out
    if p[0] != g[0]:
        return None
    if p[0] == terms.FUNC:
        if p[1] != g[1] or len(p[2]) != len(g[2]):
            return None
        for pa, ga in zip(p[2], g[2]):
            env = _match_term(pa, ga, env)
            if env is None:
                return None
        return env
    if p[0] == terms.TUPLE:
        if len(p[1]) != len(g[1]):
            return None
        for pa, ga in zip(p[1], g[1]):
            env = _match_term(pa, ga, env)
            if env is None:
                return None
        return env
    return env if p == g else None


def _ground(term, env):
    if term[0] == terms.VAR_MSG:
        return env.get(term[1])
    if term[0] == terms.FUNC:
        args = tuple(_ground(a, env) for a in term[2])
        return None if any(a is None for a in args) else (terms.FUNC, term[1], args)
    if term[0] == terms.TUPLE:
        items = tuple(_ground(a, env) for a in term[1])
        return None if any(i is None for i in items) else (terms.TUPLE, items)
    return term


class _Evaluator:
    def __init__(self, history):
        self.history = history
        self.timestamps = tuple(ts for ts, _ in history)
        by_name = {}
        domain = {}
        for ts, facts in history:
            for f in facts:
                by_name.setdefault(f[0], []).append((ts, f))
                for a in f[1]:
                    domain[a] = True
        self.by_name = by_name
        self.msg_domain = tuple(domain)

    # --- candidate generation -------------------------------------------

    def _candidates(self, name, sort, body, env):
        """Values worth trying for a quantified variable.

        Driven from the atoms the variable occurs in; when a variable
        occurs in no atom (equality-only uses), the full domain is used.
        """
        if sort == fm.SORT_TEMPORAL:
            out = []
            seen = set()
            anchored = False
            for atom in fm.iter_atoms(body):
                if isinstance(atom, fm.ActionAtom) and atom.timestamp == name:
                    anchored = True
                    for ts, f in self.by_name.get(atom.name, ()):
                        if ts not in seen and _match_args(atom.args, f[1], env) is not None:
                            seen.add(ts)
                            out.append(ts)
            if not anchored:
                return self.timestamps
            out.sort()
            return tuple(out)
        out = []
        seen = set()
        anchored = False
        for atom in fm.iter_atoms(body):
            if not isinstance(atom, fm.ActionAtom):
                continue
            positions = [i for i, a in enumerate(atom.args) if _mentions(a, name)]
            if not positions:
                continue
            anchored = True
            for _, f in self.by_name.get(atom.name, ()):
                b = _match_args(atom.args, f[1], env)
                if b is not None:
                    val = b.get(name)
                    if val is not None and val not in seen:
                        seen.add(val)
                        out.append(val)
        if not anchored:
            return self.msg_domain
        out.sort(key=terms.order_key)
        return tuple(out)

    # --- evaluation ------------------------------------------------------

    def holds(self, node, env) -> bool:
        if isinstance(node, fm.ActionAtom):
            ts = env.get(("#", node.timestamp))
            for fts, f in self.by_name.get(node.name, ()):
                if fts == ts and _match_args(node.args, f[1], env) is not None:
                    return True
            return False
        if isinstance(node, fm.TemporalLess):
            return env[("#", node.left)] < env[("#", node.right)]
        if isinstance(node, fm.TemporalEq):
            return env[("#", node.left)] == env[("#", node.right)]
        if isinstance(node, fm.TermEq):
            return _ground(node.left, env) == _ground(node.right, env)
        if isinstance(node, fm.Not):
            return not self.holds(node.body, env)
        if isinstance(node, fm.And):
            return all(self.holds(i, env) for i in node.items)
        if isinstance(node, fm.Or):
            return any(self.holds(i, env) for i in node.items)
        if isinstance(node, fm.Implies):
            return not self.holds(node.antecedent, env) or self.holds(node.consequent, env)
        if isinstance(node, fm.Quantifier):
            return self._quantified(node, env, 0)
        raise TypeError(node)

    def _quantified(self, node, env, k) -> bool:
        if k == len(node.variables):
            return self.holds(node.body, env)
        name, sort = node.variables[k]
        exists = node.kind == "Ex"
        for value in self._candidates(name, sort, node.body, env):
            child = dict(env)
            child[("#", name) if sort == fm.SORT_TEMPORAL else name] = value
            if self._quantified(node, child, k + 1) == exists:
                return exists
        return not exists

    def find_assignment(self, node, env, negate=False):
        """An assignment of node's outer quantifier block deciding it.

        For a universal block: an assignment falsifying the body (when
        negate=True the caller wants the block to fail). Returns env or
        None. Used for counterexample bindings.
        """
        if not isinstance(node, fm.Quantifier):
            return env if self.holds(node, env) != negate else None

        def search(k, env):
            if k == len(node.variables):
                inner = node.body
                if self.holds(inner, env) != (node.kind == "All"):
                    return env
                return None
            name, sort = node.variables[k]
            for value in self._candidates(name, sort, node.body, env):
                child = dict(env)
                child[("#", name) if sort == fm.SORT_TEMPORAL else name] = value
                hit = search(k + 1, child)
                if hit is not None:
                    return hit
            return None

        # for All-blocks a deciding assignment falsifies the body; for Ex
        # blocks it satisfies it
        if node.kind == "All":
            return search(0, env)
        return search(0, env)


def _mentions(term, name) -> bool:
    if term[0] == terms.VAR_MSG:
        return term[1] == name
    if term[0] == terms.FUNC:
        return any(_mentions(a, name) for a in term[2])
    if term[0] == terms.TUPLE:
        return any(_mentions(a, name) for a in term[1])
    return False


def holds_on_history(body, history) -> bool:
    return _Evaluator(history).holds(body, {})


def eval_on_trace(formula: fm.LemmaFormula, trace: Trace):
    """Evaluate a formula body on a complete trace.

    Returns (satisfied: bool, bindings: dict or None); for a falsified
    leading universal block the bindings name a falsifying assignment,
    for a satisfied leading existential block a witnessing one.
    """
    ev = _Evaluator(history_of(trace))
    satisfied = ev.holds(formula.body, {})
    bindings = None
    body = formula.body
    if isinstance(body, fm.Quantifier):
        if (body.kind == "All" and not satisfied) or (body.kind == "Ex" and satisfied):
            raw = ev.find_assignment(body, {})
            if raw is not None:
                bindings = {
                    (f"#{k[1]}" if isinstance(k, tuple) else k): v for k, v in raw.items()
                }
    return satisfied, bindings


def antecedent_instantiated(formula: fm.LemmaFormula, history) -> bool:
    """Whether any assignment of the leading universals satisfies the
    antecedent of an implication-shaped body; non-implications count as
    instantiated whenever the history is non-empty."""
    parts = fm.implication_parts(formula.body)
    if parts is None:
        return bool(history)
    prefix, antecedent, _ = parts
    ev = _Evaluator(history)

    def search(quants, env):
        if not quants:
            return ev.holds(antecedent, env)
        q = quants[0]

        def assign(k, env):
            if k == len(q.variables):
                return search(quants[1:], env)
            name, sort = q.variables[k]
            for value in ev._candidates(name, sort, antecedent, env):
                child = dict(env)
                child[("#", name) if sort == fm.SORT_TEMPORAL else name] = value
                if assign(k + 1, child):
                    return True
            return False

        return assign(0, env)

    return search(list(prefix), {})
