"""Facts, rewrite rules, states, and traces.

A fact is a (name, args) pair; persistence is encoded in the name's
leading '!'. States are multisets of ground facts with persistent facts
deduplicated. A trace is the sequence of (timestamp, action facts, rule)
triples produced by applying rules from the empty state.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional

from . import terms
from .terms import Term

Fact = tuple  # (name: str, args: tuple[Term, ...])

FR = "Fr"  # freshness source; premises of this shape bind fresh names


def fact(name: str, *args: Term) -> Fact:
    return (name, tuple(args))


def is_persistent(f: Fact) -> bool:
    return f[0].startswith("!")


def fact_ground(f: Fact) -> bool:
    return all(terms.is_ground(a) for a in f[1])


def render_fact(f: Fact) -> str:
    return f"{f[0]}({', '.join(terms.render(a) for a in f[1])})"


_FACT_KEYS = {}


def fact_key(f: Fact):
    key = _FACT_KEYS.get(f)
    if key is None:
        key = (f[0], tuple(terms.order_key(a) for a in f[1]))
        _FACT_KEYS[f] = key
    return key


@dataclass(frozen=True)
class RewriteRule:
    """A labeled transition rule: premise --[ actions ]-> conclusion.

    Conclusion/action variables must occur in the premise, be bound by a
    Fr premise, or be public variables (instantiated as the public
    constant of the same name: the self-naming convention used throughout
    the bundled models).
    """

    name: str
    premise: tuple  # of Fact patterns
    actions: tuple  # of Fact patterns
    conclusion: tuple  # of Fact patterns

    def fr_vars(self) -> tuple:
        out = []
        for f in self.premise:
            if f[0] == FR:
                for a in f[1]:
                    if a[0] == terms.VAR_FRESH:
                        out.append(a)
        return tuple(out)

    def premise_vars(self) -> frozenset:
        vs = set()
        for f in self.premise:
            for a in f[1]:
                vs.update(terms.variables(a))
        return frozenset(vs)

    def free_output_vars(self) -> tuple:
        """Variables used in actions/conclusion but bound by no premise."""
        bound = self.premise_vars()
        seen, out = set(), []
        for f in self.actions + self.conclusion:
            for a in f[1]:
                for v in terms.variables(a):
                    if v not in bound and v not in seen:
                        seen.add(v)
                        out.append(v)
        return tuple(out)


class RuleValidityError(Exception):
    pass


def check_rule(rule: RewriteRule) -> None:
    """Reject rules whose outputs cannot be grounded deterministically."""
    for v in rule.free_output_vars():
        if v[0] == terms.VAR_MSG:
            raise RuleValidityError(
                f"rule {rule.name}: message variable {terms.render(v)} "
                "appears only in actions/conclusion"
            )


class State:
    """Multiset of ground facts; persistent facts capped at one copy."""

    __slots__ = ("linear", "persistent", "_frozen")

    def __init__(self, linear=None, persistent=None):
        self.linear = dict(linear) if linear else {}  # Fact -> count >= 1
        self.persistent = set(persistent) if persistent else set()
        self._frozen = None

    def copy(self) -> "State":
        s = State.__new__(State)
        s.linear = dict(self.linear)
        s.persistent = set(self.persistent)
        s._frozen = None
        return s

    def add(self, f: Fact) -> None:
        self._frozen = None
        if is_persistent(f):
            self.persistent.add(f)
        else:
            self.linear[f] = self.linear.get(f, 0) + 1

    def remove_linear(self, f: Fact) -> None:
        n = self.linear.get(f, 0)
        if n <= 0:
            raise KeyError(f)
        self._frozen = None
        if n == 1:
            del self.linear[f]
        else:
            self.linear[f] = n - 1

    def count(self, f: Fact) -> int:
        if is_persistent(f):
            return 1 if f in self.persistent else 0
        return self.linear.get(f, 0)

    def facts(self) -> Iterable[Fact]:
        yield from self.linear
        yield from self.persistent

    def frozen(self):
        """Canonical hashable snapshot (cached; treat states as frozen
        once they have been handed to the search)."""
        if self._frozen is None:
            lin = tuple(sorted(self.linear.items(), key=lambda kv: fact_key(kv[0])))
            per = tuple(sorted(self.persistent, key=fact_key))
            self._frozen = (lin, per)
        return self._frozen

    def __len__(self):
        return sum(self.linear.values()) + len(self.persistent)

    def __repr__(self):
        parts = []
        for f, n in sorted(self.linear.items(), key=lambda kv: fact_key(kv[0])):
            parts.extend([render_fact(f)] * n)
        parts.extend(render_fact(f) for f in sorted(self.persistent, key=fact_key))
        return "{" + ", ".join(parts) + "}"


@dataclass(frozen=True)
class TraceStep:
    timestamp: int  # 1-based, strictly increasing by 1
    rule: str
    actions: tuple  # of ground Fact


@dataclass(frozen=True)
class Trace:
    steps: tuple  # of TraceStep
    maximal: bool = True  # False when cut short by the step bound

    def __len__(self):
        return len(self.steps)

    def action_instances(self):
        """All (timestamp, fact) pairs in order."""
        for step in self.steps:
            for f in step.actions:
                yield step.timestamp, f


def trace_to_json(trace: Trace, trace_id: str) -> dict:
    return {
        "id": trace_id,
        "steps": [
            {
                "t": s.timestamp,
                "rule": s.rule,
                "actions": [
                    {"name": f[0], "args": [terms.render(a) for a in f[1]]} for f in s.actions
                ],
            }
            for s in trace.steps
        ],
        "maximal": trace.maximal,
    }
