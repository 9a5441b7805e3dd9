"""Deterministic mutant catalog generation.

Enumerates the standard human-error catalog over a theory's human agent:
single and chained skips (send, send+receive, receive, receive+send,
receive+send+receive), parallel additions, type-preserving replacements,
and send reordering. Order and labels are fixed so the catalog serializes
byte-identically across runs: skip sub-types S, SR, R, RS, RSR in that
order, then add, replace, disorder, numbered M0, M1, ... within each
sub-type.
"""

from __future__ import annotations

import difflib
from dataclasses import dataclass, field
from typing import Optional

from .. import terms
from ..model import TypedMessage
from ..parser.printer import print_rule
from .apply import (
    ADD,
    DISORDER,
    FRESH_DRAW,
    REPLACE,
    SKIP,
    CatalogLabel,
    MutatedModel,
    MutationDescriptor,
    mutate_add,
    mutate_disorder,
    mutate_replace,
    mutate_skip,
    type_environment,
)
from .binding import RCV, SND, human_chain

ALL_KINDS = (SKIP, ADD, REPLACE, DISORDER)


@dataclass(frozen=True)
class MutationConfig:
    kinds: tuple = ALL_KINDS
    limits: dict = field(default_factory=dict)  # kind -> max mutants


def _event_kinds(chain) -> dict:
    return {i: kind for i, _, kind in chain.events()}


def _skip_descriptors(chain):
    """(subtype, target indices) in catalog order."""
    kinds = _event_kinds(chain)
    indices = sorted(kinds)
    out = []
    snds = [i for i in indices if kinds[i] == SND]
    rcvs = [i for i in indices if kinds[i] == RCV]
    out.extend(("S", (i,)) for i in snds)
    out.extend(("SR", (i, i + 1)) for i in snds if kinds.get(i + 1) == RCV)
    out.extend(("R", (i,)) for i in rcvs)
    out.extend(("RS", (i, i + 1)) for i in rcvs if kinds.get(i + 1) == SND)
    out.extend(
        ("RSR", (i, i + 1, i + 2))
        for i in rcvs
        if kinds.get(i + 1) == SND and kinds.get(i + 2) == RCV
    )
    order = {"S": 0, "SR": 1, "R": 2, "RS": 3, "RSR": 4}
    out.sort(key=lambda pair: (order[pair[0]], pair[1]))
    return out


def _alternative_publics(doc, tag: str, used) -> list:
    """Declared public constants of the given type, excluding used values."""
    out = []
    for name, ptag in doc.publics:
        if ptag == tag and terms.const(name) not in used:
            out.append(terms.const(name))
    return out


def _replace_sites(doc, chain):
    """(event index, component tag, payload) for each mutable send slot."""
    env = type_environment(doc)
    sites = []
    for i, pos, kind in chain.events():
        if kind != SND:
            continue
        stage = chain.stages[pos]
        part = stage.send
        tags = part.tags()
        values = part.values()
        for tag, value in zip(tags, values):
            if tag is None:
                continue
            alts = _alternative_publics(doc, tag, set(values))
            if alts:
                sites.append((i, tag if len(tags) > 1 else None, alts[0]))
                break
            if value[0] == terms.VAR_FRESH:
                sites.append((i, tag if len(tags) > 1 else None, FRESH_DRAW))
                break
    return sites


def _add_sites(doc, chain):
    """(event index, payload message) for sends with a same-type alternative."""
    sites = []
    for i, pos, kind in chain.events():
        if kind != SND:
            continue
        part = chain.stages[pos].send
        tags = part.tags()
        values = part.values()
        if len(tags) != 1 or tags[0] is None:
            continue
        alts = _alternative_publics(doc, tags[0], set(values))
        if alts:
            sites.append((i, TypedMessage((tags[0],), (alts[0],))))
    return sites


def _disorder_sites(chain):
    """(deferred send index, duplicated earlier send index) pairs."""
    kinds = _event_kinds(chain)
    snds = sorted(i for i, k in kinds.items() if k == SND)
    sites = []
    for i in snds[1:]:
        stage, _ = chain.event_part(i)
        for j in snds:
            if j >= i:
                break
            src_stage, src = chain.event_part(j)
            known = set(stage.premise_kn)
            if all(
                any(v in terms.variables(k) for k in known)
                for value in src.values()
                for v in terms.variables(value)
            ):
                sites.append((i, j))
                break
    return sites


def _describe(kind, subtype, events, chain) -> str:
    kinds = _event_kinds(chain)
    human = chain.agent
    what = ", ".join(f"{kinds[i]} {i}" for i in events)
    if kind == SKIP:
        return f"{human} skips {what}"
    if kind == ADD:
        return f"{human} performs an extra send beside {what}"
    if kind == REPLACE:
        return f"{human} substitutes the value sent at {what}"
    return f"{human} repeats an earlier send in place of {what}, deferring it"


def enumerate_mutants(doc, config: Optional[MutationConfig] = None) -> list:
    """The catalog of MutatedModel for the theory's human agent."""
    config = config or MutationConfig()
    chain = human_chain(doc.rules)
    human = chain.agent
    catalog = []
    counters = {}

    def next_id(kind, subtype):
        n = counters.get((kind, subtype), 0)
        counters[(kind, subtype)] = n + 1
        return f"M{n}"

    def admitted(kind):
        if kind not in config.kinds:
            return False
        limit = config.limits.get(kind)
        made = sum(1 for m in catalog if m.label.kind == kind)
        return limit is None or made < limit

    for subtype, events in _skip_descriptors(chain):
        if not admitted(SKIP):
            break
        label = CatalogLabel(SKIP, subtype, next_id(SKIP, subtype))
        descriptor = MutationDescriptor(SKIP, human, events)
        mutant = mutate_skip(doc, descriptor, label=label)
        mutant.description = _describe(SKIP, subtype, events, chain)
        catalog.append(mutant)

    for i, payload in _add_sites(doc, chain):
        if not admitted(ADD):
            break
        label = CatalogLabel(ADD, "-", next_id(ADD, "-"))
        descriptor = MutationDescriptor(ADD, human, (i,), payload=payload)
        mutant = mutate_add(doc, descriptor, label=label)
        mutant.description = _describe(ADD, "-", (i,), chain)
        catalog.append(mutant)

    for i, component, payload in _replace_sites(doc, chain):
        if not admitted(REPLACE):
            break
        label = CatalogLabel(REPLACE, "-", next_id(REPLACE, "-"))
        descriptor = MutationDescriptor(
            REPLACE, human, (i,), payload=payload, component=component
        )
        mutant = mutate_replace(doc, descriptor, label=label)
        mutant.description = _describe(REPLACE, "-", (i,), chain)
        catalog.append(mutant)

    for i, j in _disorder_sites(chain):
        if not admitted(DISORDER):
            break
        label = CatalogLabel(DISORDER, "-", next_id(DISORDER, "-"))
        descriptor = MutationDescriptor(DISORDER, human, (i,), payload=j)
        mutant = mutate_disorder(doc, descriptor, label=label)
        mutant.description = _describe(DISORDER, "-", (i,), chain)
        catalog.append(mutant)

    return catalog


def rule_diff(base_rules, mutant_rules) -> str:
    """Unified diff of the pretty-printed rule sets."""
    before = "\n\n".join(print_rule(r) for r in base_rules).splitlines(keepends=True)
    after = "\n\n".join(print_rule(r) for r in mutant_rules).splitlines(keepends=True)
    return "".join(
        difflib.unified_diff(before, after, fromfile="base", tofile="mutant")
    )


def _payload_json(payload):
    if payload is None:
        return None
    if payload == FRESH_DRAW:
        return {"draw": "fresh"}
    if isinstance(payload, TypedMessage):
        return {
            "tags": list(payload.tags),
            "values": [terms.render(v) for v in payload.values],
        }
    if isinstance(payload, int):
        return {"duplicateOfEvent": payload}
    return terms.render(payload)


def catalog_json(base_rules, catalog) -> list:
    out = []
    for m in catalog:
        out.append(
            {
                "label": {
                    "kind": m.label.kind,
                    "subtype": m.label.subtype,
                    "modelId": m.label.model_id,
                },
                "descriptor": {
                    "kind": m.descriptor.kind,
                    "humanRole": m.descriptor.human_role,
                    "targetEvents": list(m.descriptor.target_events),
                    "payload": _payload_json(m.descriptor.payload),
                    "component": m.descriptor.component,
                },
                "description": m.description,
                "matchingEdits": [
                    {
                        "affectedRole": e.affected_role,
                        "ruleEdits": [list(pair) for pair in e.rule_edits],
                    }
                    for e in m.matching
                ],
                "unreachable": list(m.unreachable),
                "ruleDiff": rule_diff(base_rules, m.rules),
            }
        )
    return out
