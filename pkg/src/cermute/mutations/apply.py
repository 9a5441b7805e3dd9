"""Human-error mutations over a parsed theory.

Each mutation rewrites the human agent's rule chain (skip, replace,
disorder) or adds a parallel rule beside it (add), then attaches matching
mutations: bare variants of the technical agents' rules that let the
deviated flow propagate. Two principles, recorded once here and relied
on throughout:

* Generated or altered rule parts lose their certification action facts
  (send/receive certificates, commitment and completion markers): the
  deviated action is not the prescribed one, so nothing may certify it.
  The human marker is structural and is always kept. Unaltered parts of
  rewritten rules keep their certificates, as does pure step renumbering.

* Matching variants are uninstrumented duplicates of the partner's rules
  (suffix _match), pattern-adjusted at exactly the mutated positions:
  the slot a replaced value arrives in is generalized to a like-sorted
  variable, and state correlations on that slot's variable are released
  in downstream receive patterns. The originals stay: a run may follow
  the prescribed path, the deviated one, or any interleaving.
"""

from __future__ import annotations

import copy
from dataclasses import dataclass
from typing import Optional

from .. import terms
from ..model import TypedMessage
from ..rules import RewriteRule
from .binding import (
    HUMAN_MARKER,
    RCV,
    RECV_FACT,
    SEND_FACT,
    SND,
    STATE_FACT,
    AgentChain,
    Part,
    Stage,
    extract_chains,
    human_chain,
)

SKIP = "skip"
ADD = "add"
REPLACE = "replace"
DISORDER = "disorder"

FRESH_DRAW = ("draw", "fresh")  # replace payload sentinel: a new fresh value


class MutationError(Exception):
    pass


@dataclass(frozen=True)
class MutationDescriptor:
    kind: str
    human_role: str
    target_events: tuple  # ordered event indices in the human's script
    payload: object = None  # Term (replace), TypedMessage (add), int (disorder)
    component: Optional[str] = None  # tag selecting a slot in multi-part messages


@dataclass(frozen=True)
class CatalogLabel:
    kind: str
    subtype: str  # S | SR | R | RS | RSR | "-"
    model_id: str  # M0, M1, ...

    def __str__(self):
        if self.subtype == "-":
            return f"{self.kind}-{self.model_id}"
        return f"{self.kind}-{self.subtype}-{self.model_id}"


@dataclass(frozen=True)
class MatchingMutation:
    affected_role: str
    rule_edits: tuple  # of (rule name, edit kind)


@dataclass
class MutatedModel:
    label: CatalogLabel
    descriptor: MutationDescriptor
    matching: tuple  # of MatchingMutation
    rules: list  # full post-mutation rule list
    description: str = ""
    unreachable: tuple = ()  # names of rules whose inputs are not producible


# --- type environment from the theory ----------------------------------


def type_environment(doc) -> list:
    """(agent var, tag, value pattern) triples from !Type conclusions."""
    env = []
    for rule in doc.rules:
        for f in rule.conclusion:
            if f[0] == "!Type" and len(f[1]) == 3:
                agent, tag, value = f[1]
                if tag[0] == terms.CONST:
                    env.append((agent, tag[1], value))
    return env


def infer_slot_type(value, env, publics) -> Optional[str]:
    """Type tag for a candidate value: exact or head-symbol environment
    match, else the declared tag of a public constant."""
    tags = set()
    for _, tag, pattern in env:
        if pattern == value:
            tags.add(tag)
        elif value[0] == terms.FUNC and pattern[0] == terms.FUNC and pattern[1] == value[1]:
            tags.add(tag)
        elif value[0] in (terms.VAR_FRESH, terms.FRESH) and pattern[0] == terms.VAR_FRESH:
            tags.add(tag)
    if len(tags) == 1:
        return tags.pop()
    if value[0] == terms.CONST:
        for pname, ptag in publics:
            if pname == value[1] and ptag is not None:
                return ptag
    return None


# --- chain regeneration -------------------------------------------------


def _substitute_part(part: Part, mapping) -> Part:
    if not mapping:
        return part
    fact = (part.fact[0], tuple(terms.substitute(a, mapping) for a in part.fact[1]))
    mutated = part.mutated or fact != part.fact
    acts = tuple(
        (f[0], tuple(terms.substitute(a, mapping) for a in f[1])) for f in part.actions
    )
    return Part(part.kind, fact, acts, mutated=mutated, dropped=part.dropped)


def rebuild_chain(chain: AgentChain, lost_terms=()) -> list:
    """Regenerate the human chain as rules, renumbering steps and
    recomputing knowledge tuples. Terms introduced by skipped receives are
    replaced by fresh-sorted holes backed by a freshness premise."""
    hole_map = {}
    for t in lost_terms:
        if t[0] == terms.VAR_FRESH:
            hole_map[t] = terms.fvar(t[1] + "_skip")
        elif t[0] == terms.VAR_PUB:
            hole_map[t] = terms.pvar(t[1] + "_skip")
        elif t[0] == terms.FUNC:
            continue  # derived values drop with their base name
        else:
            hole_map[t] = terms.fvar("hole_skip")

    agent = chain.agent
    survivors = [
        s
        for s in chain.stages
        if (s.recv and not s.recv.dropped) or (s.send and not s.send.dropped)
    ]
    if not survivors:
        return []
    kn = chain.stages[0].premise_kn  # the setup handoff shape is fixed
    step = chain.stages[0].premise_step
    rules = []
    for pos, stage in enumerate(survivors):
        last = pos == len(survivors) - 1
        recv = stage.recv if stage.recv and not stage.recv.dropped else None
        send = stage.send if stage.send and not stage.send.dropped else None
        extra = list(stage.extra_premise)
        if recv:
            recv = _substitute_part(recv, hole_map)
        if send:
            send = _substitute_part(send, hole_map)
            for hole in set(hole_map.values()):
                if hole[0] == terms.VAR_FRESH and _part_mentions(send, hole):
                    extra.append(("Fr", (hole,)))

        premise = [(STATE_FACT, (terms.pvar(agent), terms.const(str(step)), terms.tup(*kn)))]
        premise.extend(extra)
        if recv:
            premise.append(recv.fact)

        actions = []
        if stage.human:
            actions.append((HUMAN_MARKER, ()))
        if recv and not recv.mutated:
            actions.extend(recv.actions)
        if send and not send.mutated:
            actions.extend(send.actions)

        intro = stage.introductions() if recv and not recv.mutated else ()
        kn2 = kn + tuple(t for t in intro if t not in kn)

        conclusion = []
        if stage.concl_step is None and last:
            pass  # originally terminal: the agent retains no state
        else:
            conclusion.append(
                (STATE_FACT, (terms.pvar(agent), terms.const(str(step + 1)), terms.tup(*kn2)))
            )
        if send:
            conclusion.append(send.fact)

        rules.append(
            RewriteRule(stage.rule_name, tuple(premise), tuple(actions), tuple(conclusion))
        )
        kn = kn2
        step += 1
    return rules


def _part_mentions(part: Part, var) -> bool:
    return any(var in terms.variables(a) for a in part.fact[1])


# --- matching variants ---------------------------------------------------


def _release_correlations(fact, renames):
    """Rename variables inside the message args of a wire receive fact."""
    name, args = fact
    if name != RECV_FACT:
        return fact
    new_args = list(args)
    for i in (2, 3):
        if i < len(new_args):
            new_args[i] = terms.substitute(new_args[i], renames)
    return (name, tuple(new_args))


def matching_variants(rules, human_role, affected_vars) -> tuple:
    """Bare, pattern-released duplicates of the technical agents' rules.

    affected_vars are the premise variables standing for mutated message
    slots; their occurrences inside receive patterns are renamed so the
    variant accepts any like-sorted value, while values that can only be
    bound by the receive keep flowing into the conclusion.
    """
    chains = extract_chains(rules)
    renames = {}
    for v in affected_vars:
        renames[v] = (v[0], v[1] + "_any")
    variants = []
    edits = []
    for agent, chain in sorted(chains.items()):
        if chain.human or agent == human_role:
            continue
        agent_edits = []
        for stage in chain.stages:
            rule = next(r for r in rules if r.name == stage.rule_name)
            premise = []
            released = {}
            for f in rule.premise:
                if f[0] == RECV_FACT and renames:
                    nf = _release_correlations(f, renames)
                    if nf != f:
                        for v, nv in renames.items():
                            released[v] = nv
                    premise.append(nf)
                else:
                    premise.append(f)
            # variables bound only by the released receive keep flowing
            still_bound = set()
            for f in premise:
                for a in f[1]:
                    still_bound.update(terms.variables(a))
            flow = {v: nv for v, nv in released.items() if v not in still_bound}
            conclusion = tuple(
                (f[0], tuple(terms.substitute(a, flow) for a in f[1]))
                for f in rule.conclusion
            )
            variants.append(
                RewriteRule(rule.name + "_match", tuple(premise), (), conclusion)
            )
            agent_edits.append((rule.name, "retarget-input"))
        if agent_edits:
            edits.append(MatchingMutation(agent, tuple(agent_edits)))
    return tuple(variants), tuple(edits)


# --- reachability ---------------------------------------------------------


def unreachable_rules(rules) -> tuple:
    """Rules whose premise fact names can never all be produced."""
    producible = {"Fr"}
    changed = True
    while changed:
        changed = False
        for r in rules:
            if all(f[0] in producible or f[0] == "Fr" for f in r.premise):
                for f in r.conclusion:
                    if f[0] not in producible:
                        producible.add(f[0])
                        changed = True
    out = []
    for r in rules:
        if any(f[0] not in producible and f[0] != "Fr" for f in r.premise):
            out.append(r.name)
    return tuple(out)


# --- the four mutations ---------------------------------------------------


def _chain_copy(chain: AgentChain) -> AgentChain:
    return copy.deepcopy(chain)


def _assemble(doc, human, new_human_rules, variants):
    """Full rule list: base rules with the human chain replaced, then
    matching variants, preserving declaration order elsewhere."""
    human_rule_names = {s.rule_name for s in human.stages}
    out = []
    replaced = False
    for r in doc.rules:
        if r.name in human_rule_names:
            if not replaced:
                out.extend(new_human_rules)
                replaced = True
            continue
        out.append(r)
    if not replaced:
        out.extend(new_human_rules)
    out.extend(variants)
    return out


def _slot(part: Part, component: Optional[str]):
    """(index, tag, value pattern) of the addressed message component."""
    tags = part.tags()
    values = part.values()
    if component is None:
        if len(values) != 1:
            raise MutationError(
                "component tag required for multi-part message "
                f"(tags: {', '.join(t or '?' for t in tags)})"
            )
        return 0, tags[0], values[0]
    for i, t in enumerate(tags):
        if t == component:
            return i, t, values[i]
    raise MutationError(f"message has no component tagged '{component}'")


def _with_slot_value(part: Part, index: int, value) -> Part:
    name, args = part.fact
    values = list(terms.tuple_items(args[3]))
    values[index] = value
    payload = values[0] if args[3][0] != terms.TUPLE else terms.tup(*values)
    fact = (name, (args[0], args[1], args[2], payload))
    return Part(part.kind, fact, part.actions, mutated=True)


def mutate_skip(doc, descriptor: MutationDescriptor, label=None) -> MutatedModel:
    """Remove the targeted events and re-chain the survivors."""
    if not descriptor.target_events:
        raise MutationError("skip requires at least one target event")
    idx = list(descriptor.target_events)
    if idx != sorted(idx) or any(b - a != 1 for a, b in zip(idx, idx[1:])):
        raise MutationError("skip targets must be contiguous ascending indices")
    human = _chain_copy(human_chain(doc.rules, descriptor.human_role))
    lost = []
    for i in idx:
        try:
            stage, part = human.event_part(i)
        except Exception as exc:
            raise MutationError(
                f"event {i}: only send/receive events can be skipped ({exc})"
            )
        part.dropped = True
        if part.kind == RCV:
            lost.extend(stage.introductions())
    new_rules = rebuild_chain(human, lost_terms=tuple(lost))
    rules = _assemble(doc, human, new_rules, ())
    return MutatedModel(
        label=label or CatalogLabel(SKIP, "-", "M0"),
        descriptor=descriptor,
        matching=(),
        rules=rules,
        unreachable=unreachable_rules(rules),
    )


def mutate_add(doc, descriptor: MutationDescriptor, label=None) -> MutatedModel:
    """Insert an extra send beside the targeted event; the new rule reads
    the agent state without consuming it, so the prescribed behavior and
    the extra send may both fire in one trace."""
    (target,) = descriptor.target_events
    human = human_chain(doc.rules, descriptor.human_role)
    stage, part = human.event_part(target)
    if part is None:
        raise MutationError("add targets a send or receive event, not start")
    payload = descriptor.payload
    if not isinstance(payload, TypedMessage):
        raise MutationError("add payload must be a typed message")

    env = type_environment(doc)
    knowledge_pool = set(stage.premise_kn)
    for tag, value in zip(payload.tags, payload.values):
        if value in knowledge_pool:
            continue
        if value[0] != terms.CONST:
            # only public constants are ambient; anything else must come
            # from what the agent knows at the insertion point
            raise MutationError(
                f"added value {terms.render(value)} is neither in the agent's "
                "knowledge at the insertion point nor a declared public name"
            )
        vtype = infer_slot_type(value, env, doc.publics)
        if vtype is None:
            raise MutationError(
                f"added value {terms.render(value)} is neither in the agent's "
                "knowledge at the insertion point nor a declared public name"
            )
        if vtype != tag:
            raise MutationError(
                f"added value {terms.render(value)} has type '{vtype}', "
                f"slot expects '{tag}'"
            )

    wire = part.fact
    state = (STATE_FACT, (terms.pvar(human.agent), terms.const(str(stage.premise_step)),
                          terms.tup(*stage.premise_kn)))
    if part.kind == SND:
        sender, receiver = wire[1][0], wire[1][1]
    else:
        sender, receiver = wire[1][1], wire[1][0]
    new_wire = (SEND_FACT, (sender, receiver) + _payload_args(payload))
    added = RewriteRule(
        stage.rule_name + "_add",
        (state,),
        ((HUMAN_MARKER, ()),),
        (state, new_wire),
    )
    rules = []
    for r in doc.rules:
        rules.append(r)
        if r.name == stage.rule_name:
            rules.append(added)
    return MutatedModel(
        label=label or CatalogLabel(ADD, "-", "M0"),
        descriptor=descriptor,
        matching=(),
        rules=rules,
        unreachable=unreachable_rules(rules),
    )


def _payload_args(message: TypedMessage) -> tuple:
    if len(message.tags) == 1:
        return (terms.const(message.tags[0]), message.values[0])
    return (
        terms.tup(*(terms.const(t) for t in message.tags)),
        terms.tup(*message.values),
    )


def with_rules(doc, rules):
    """A shallow document copy carrying a different rule list; lets
    mutations chain (the composition law tests build skip-then-add)."""
    out = copy.copy(doc)
    out.rules = list(rules)
    return out


def mutate_replace(
    doc, descriptor: MutationDescriptor, label=None, matching: bool = True
) -> MutatedModel:
    """Swap one sent value for another of the same type (skip plus add,
    collapsed into a single rewritten rule)."""
    (target,) = descriptor.target_events
    human = _chain_copy(human_chain(doc.rules, descriptor.human_role))
    stage, part = human.event_part(target)
    if part is None or part.kind != SND:
        raise MutationError("replace targets a send event")
    index, tag, old_value = _slot(part, descriptor.component)

    payload = descriptor.payload
    env = type_environment(doc)
    if payload == FRESH_DRAW:
        if old_value[0] != terms.VAR_FRESH:
            raise MutationError("a fresh draw can only replace a fresh-sorted slot")
        new_value = terms.fvar(old_value[1] + "_other")
        stage.extra_premise = stage.extra_premise + (("Fr", (new_value,)),)
    else:
        new_value = payload
        if new_value == old_value:
            # substituting a value by itself leaves the model as it was
            return MutatedModel(
                label=label or CatalogLabel(REPLACE, "-", "M0"),
                descriptor=descriptor,
                matching=(),
                rules=list(doc.rules),
                unreachable=unreachable_rules(doc.rules),
            )
        vtype = infer_slot_type(new_value, env, doc.publics)
        if vtype != tag:
            raise MutationError(
                f"replacement {terms.render(new_value)} has type "
                f"'{vtype}', slot expects '{tag}'"
            )

    new_part = _with_slot_value(part, index, new_value)
    if part.kind == SND:
        stage.send = new_part

    new_rules = rebuild_chain(human)
    variants, edits = (), ()
    if matching:
        affected = tuple(v for v in terms.variables(old_value))
        variants, edits = matching_variants(doc.rules, human.agent, affected)
    rules = _assemble(doc, human, new_rules, variants)
    return MutatedModel(
        label=label or CatalogLabel(REPLACE, "-", "M0"),
        descriptor=descriptor,
        matching=edits,
        rules=rules,
        unreachable=unreachable_rules(rules),
    )


def mutate_disorder(
    doc, descriptor: MutationDescriptor, label=None, matching: bool = True
) -> MutatedModel:
    """Send a duplicate of an earlier message in place of the due send,
    deferring the due send to a follow-up step."""
    (deferred,) = descriptor.target_events
    source = descriptor.payload
    if not isinstance(source, int):
        raise MutationError("disorder payload names the duplicated send event")
    if source == deferred:
        raise MutationError("disorder requires two distinct send events")
    human = _chain_copy(human_chain(doc.rules, descriptor.human_role))
    stage, part = human.event_part(deferred)
    src_stage, src_part = human.event_part(source)
    if part is None or part.kind != SND or src_part is None or src_part.kind != SND:
        raise MutationError("disorder swaps two send events")
    if src_stage.premise_step >= stage.premise_step:
        raise MutationError("the duplicated send must precede the deferred one")

    # the duplicated payload must already be known at the swap point
    known = set(stage.premise_kn)
    for v in src_part.values():
        for var in terms.variables(v):
            if not any(var in terms.variables(k) for k in known):
                raise MutationError(
                    f"duplicated payload mentions {terms.render(var)}, unknown "
                    "at the swap point"
                )

    deferred_part = Part(SND, part.fact, (), mutated=True)
    stage.send = Part(SND, src_part.fact, (), mutated=True)

    re_recv = None
    if stage.recv is not None:
        renames = {}
        for a in stage.recv.fact[1][2:]:
            for v in terms.variables(a):
                renames.setdefault(v, (v[0], v[1] + "_dup"))
        fact = _release_correlations(stage.recv.fact, renames)
        re_recv = Part(RCV, fact, (), mutated=True)

    follow = Stage(
        rule_name=stage.rule_name + "_defer",
        agent=human.agent,
        premise_step=stage.premise_step + 1,
        premise_kn=(),  # recomputed by rebuild_chain
        concl_step=stage.premise_step + 2,
        concl_kn=None,
        recv=re_recv,
        send=deferred_part,
        human=stage.human,
        synthetic=True,
    )
    pos = human.stages.index(stage)
    human.stages.insert(pos + 1, follow)

    new_rules = rebuild_chain(human)
    variants, edits = (), ()
    if matching:
        variants, edits = matching_variants(doc.rules, human.agent, ())
    rules = _assemble(doc, human, new_rules, variants)
    return MutatedModel(
        label=label or CatalogLabel(DISORDER, "-", "M0"),
        descriptor=descriptor,
        matching=edits,
        rules=rules,
        unreachable=unreachable_rules(rules),
    )
