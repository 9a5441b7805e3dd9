"""Ceremony domain model: typed messages, events, role-scripts, threat chart.

A ceremony couples per-role event scripts with an agent classification
(human vs. technical), a function-symbol signature, and a type
environment binding quoted type tags to representative value terms.
Values are immutable after construction and safe to share.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product
from typing import Optional

from . import terms
from .terms import Term

UNTYPED = None  # infer_type result for terms with no binding

HUMAN = "human"
TECHNICAL = "technical"

CHANNEL_TYPES = ("insec", "conf", "auth", "sec")

START = "start"
SND = "snd"
RCV = "rcv"


class AmbiguousTypeError(Exception):
    """A term is bound to two different type tags for the same role."""

    def __init__(self, term: Term, tags):
        self.term = term
        self.tags = tuple(sorted(tags))
        super().__init__(
            f"term {terms.render(term)} is bound to multiple type tags: "
            + ", ".join(f"'{t}'" for t in self.tags)
        )


@dataclass(frozen=True)
class TypedMessage:
    """Parallel lists of quoted type tags and value terms."""

    tags: tuple  # of tag strings (the quoted identifiers, unquoted here)
    values: tuple  # of Term

    def __post_init__(self):
        if len(self.tags) != len(self.values) or not self.tags:
            raise ValueError("tags and values must be equal-length and non-empty")

    def term(self) -> Term:
        """Wire shape: <'t', v> for singletons, <<'t1', ...>, <v1, ...>> otherwise."""
        if len(self.tags) == 1:
            return terms.tup(terms.const(self.tags[0]), self.values[0])
        return terms.tup(
            terms.tup(*(terms.const(t) for t in self.tags)),
            terms.tup(*self.values),
        )


@dataclass(frozen=True)
class Event:
    """One role-script step: exactly one of start / snd / rcv.

    Annotations are extra action facts the compiled rule records for this
    event (e.g. a commitment or completion marker); each is a
    (fact name, argument terms) pair.
    """

    action: str  # START | SND | RCV
    role: str
    message: TypedMessage
    channel: Optional[str] = None  # SND/RCV only
    peer: Optional[str] = None  # SND/RCV only
    annotations: tuple = ()  # of (name, tuple of Term)

    def is_start(self) -> bool:
        return self.action == START


@dataclass(frozen=True)
class RoleScript:
    role: str
    events: tuple  # of Event


@dataclass(frozen=True)
class Ceremony:
    name: str
    scripts: tuple  # of RoleScript
    agent_kind: dict  # role -> HUMAN | TECHNICAL
    signature: dict  # function symbol -> arity
    type_env: tuple  # of (role, tag, Term) bindings, ordered
    channel_replay: dict = field(default_factory=dict)  # channel -> bool
    publics: tuple = ()  # declared public names: (name, type tag or None)

    def script_for(self, role: str) -> Optional[RoleScript]:
        for s in self.scripts:
            if s.role == role:
                return s
        return None

    def humans(self):
        return [r for r, k in self.agent_kind.items() if k == HUMAN]

    def technicals(self):
        return [r for r, k in self.agent_kind.items() if k == TECHNICAL]


@dataclass(frozen=True)
class Violation:
    """One validation finding, with script/event coordinates."""

    message: str
    role: Optional[str] = None
    event_index: Optional[int] = None

    def __str__(self):
        where = ""
        if self.role is not None:
            where = f" [role {self.role}"
            if self.event_index is not None:
                where += f", event {self.event_index}"
            where += "]"
        return self.message + where


def infer_type(term: Term, env, role: str):
    """Type tag bound to a term for a role, or UNTYPED.

    Names resolve by exact structural lookup. Function applications
    resolve by their head symbol: any binding of the same role whose value
    applies the same function yields that binding's tag (the application
    pattern, e.g. every location(x) shares the tag bound to location(_)).
    Raises AmbiguousTypeError when distinct tags apply.
    """
    tags = set()
    for brole, tag, value in env:
        if brole != role:
            continue
        if value == term:
            tags.add(tag)
        elif term[0] == terms.FUNC and value[0] == terms.FUNC and value[1] == term[1]:
            tags.add(tag)
    if not tags:
        return UNTYPED
    if len(tags) > 1:
        raise AmbiguousTypeError(term, tags)
    return tags.pop()


def validate_ceremony(c: Ceremony) -> list:
    """Every invariant violation, as a list of Violation (empty = valid)."""
    report = []
    env_tags = {(role, tag) for role, tag, _ in c.type_env}

    seen_roles = set()
    for script in c.scripts:
        if script.role in seen_roles:
            report.append(Violation("duplicate script", role=script.role))
        seen_roles.add(script.role)

        if not script.events or not script.events[0].is_start():
            report.append(Violation("missing Start", role=script.role))
        for i, ev in enumerate(script.events):
            if ev.is_start() and i != 0:
                report.append(
                    Violation(f"duplicate Start at index {i}", role=script.role, event_index=i)
                )
            if ev.role != script.role:
                report.append(
                    Violation(
                        f"event role {ev.role} differs from script role",
                        role=script.role,
                        event_index=i,
                    )
                )
            if ev.action in (SND, RCV):
                if ev.peer == ev.role:
                    report.append(
                        Violation("role and peer coincide", role=script.role, event_index=i)
                    )
                if ev.channel not in CHANNEL_TYPES:
                    report.append(
                        Violation(
                            f"unknown channel {ev.channel!r}", role=script.role, event_index=i
                        )
                    )
                if ev.peer is not None and c.script_for(ev.peer) is None:
                    report.append(
                        Violation(f"peer {ev.peer} has no script", role=script.role, event_index=i)
                    )
            msg = ev.message
            for tag, value in zip(msg.tags, msg.values):
                if (script.role, tag) not in env_tags:
                    report.append(
                        Violation(
                            f"tag '{tag}' not declared in type environment",
                            role=script.role,
                            event_index=i,
                        )
                    )
                    continue
                try:
                    inferred = infer_type(value, c.type_env, script.role)
                except AmbiguousTypeError as exc:
                    report.append(Violation(str(exc), role=script.role, event_index=i))
                    continue
                if inferred is not UNTYPED and inferred != tag:
                    report.append(
                        Violation(
                            f"value {terms.render(value)} has type '{inferred}', tagged '{tag}'",
                            role=script.role,
                            event_index=i,
                        )
                    )
            for _, args in ev.annotations:
                for a in args:
                    for sub in terms.subterms(a):
                        if sub[0] == terms.FUNC and sub[1] not in c.signature:
                            report.append(
                                Violation(
                                    f"undeclared function symbol {sub[1]}",
                                    role=script.role,
                                    event_index=i,
                                )
                            )
            for value in msg.values:
                for sub in terms.subterms(value):
                    if sub[0] == terms.FUNC:
                        arity = c.signature.get(sub[1])
                        if arity is None:
                            report.append(
                                Violation(
                                    f"undeclared function symbol {sub[1]}",
                                    role=script.role,
                                    event_index=i,
                                )
                            )
                        elif arity != len(sub[2]):
                            report.append(
                                Violation(
                                    f"function {sub[1]} used with arity {len(sub[2])}, "
                                    f"declared {arity}",
                                    role=script.role,
                                    event_index=i,
                                )
                            )

    for role in c.agent_kind:
        if c.agent_kind[role] not in (HUMAN, TECHNICAL):
            report.append(Violation(f"unknown agent kind {c.agent_kind[role]!r}", role=role))
    for script in c.scripts:
        if script.role not in c.agent_kind:
            report.append(Violation("role has no agent kind", role=script.role))

    return report


# Threat-model chart: label vocabularies per agent kind.
LABELS = {TECHNICAL: ("normal", "bug"), HUMAN: ("normal", "error")}


@dataclass(frozen=True)
class ThreatChart:
    agents: tuple  # role names, technical agents first
    kinds: tuple  # parallel agent kinds
    rows: tuple  # of per-agent label tuples

    @property
    def width(self) -> int:
        return len(self.agents)

    @property
    def depth(self) -> int:
        return len(self.rows)


def build_threat_chart(c: Ceremony) -> ThreatChart:
    """Enumerate all label assignments over the ceremony's agents.

    Agents are ordered technical-first (chart column convention), and rows
    enumerate label combinations with the first column varying fastest,
    normal before bug/error.
    """
    agents = tuple(c.technicals() + c.humans())
    kinds = tuple(c.agent_kind[a] for a in agents)
    pools = [LABELS[k] for k in kinds]
    # itertools.product varies the last factor fastest; reverse to vary
    # the first column fastest, then restore column order per row.
    rows = tuple(tuple(reversed(combo)) for combo in product(*reversed(pools)))
    return ThreatChart(agents=agents, kinds=kinds, rows=rows)
