"""Structural view of agent rules as event chains.

Mutations address ceremony events by index inside an agent's script, not
by rule name, so the same descriptor survives recompilation. This module
recovers that event structure from a parsed theory: agent rules are the
rules carrying a state fact in their premise; the chain orders them by
state step; within a rule the receive part (a wire receive fact in the
premise) precedes the send part (a wire send fact in the conclusion).
Human chains are recognized by the human marker action fact.

Action facts are partitioned by ownership: receive certificates belong
to the receive part, send certificates and routing facts to the send
part, and any other certification fact (commitment/completion markers)
to the rule's send part when present, else its receive part. Ownership
decides which action facts a mutation preserves: a mutated part loses
its certificates, because the deviated action is no longer the
prescribed one.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional

from .. import terms

STATE_FACT = "State"
SEND_FACT = "SndS"
RECV_FACT = "RcvS"
HUMAN_MARKER = "H"
RECV_CERT = "Receive"
SEND_CERT = "Send"
ROUTE_FACT = "To"

SND = "snd"
RCV = "rcv"


class BindingError(Exception):
    pass


@dataclass
class Part:
    """One send or receive event realized inside a rule."""

    kind: str  # SND | RCV
    fact: tuple  # the wire fact pattern
    actions: tuple  # certificates owned by this part
    mutated: bool = False  # content altered by a mutation
    dropped: bool = False

    def tags(self) -> tuple:
        """Type tags of the message components (wire arg 3)."""
        xn = self.fact[1][2]
        items = terms.tuple_items(xn)
        return tuple(t[1] if t[0] == terms.CONST else None for t in items)

    def values(self) -> tuple:
        return terms.tuple_items(self.fact[1][3])


@dataclass
class Stage:
    """One agent rule, decomposed."""

    rule_name: str
    agent: str  # state-fact first-argument variable name
    premise_step: int
    premise_kn: tuple
    concl_step: Optional[int]  # None when the rule concludes without state
    concl_kn: Optional[tuple]
    recv: Optional[Part]
    send: Optional[Part]
    human: bool
    extra_premise: tuple = ()  # non-state, non-wire premise facts
    synthetic: bool = False  # inserted by a mutation

    def introductions(self) -> tuple:
        if self.concl_kn is None:
            return ()
        return tuple(t for t in self.concl_kn if t not in self.premise_kn)


@dataclass
class AgentChain:
    agent: str
    human: bool
    stages: list

    def events(self) -> list:
        """(event index, stage position, part kind) in script order."""
        out = []
        i = 1
        for pos, stage in enumerate(self.stages):
            if stage.recv is not None:
                out.append((i, pos, RCV))
                i += 1
            if stage.send is not None:
                out.append((i, pos, SND))
                i += 1
        return out

    def event_part(self, index: int) -> tuple:
        for i, pos, kind in self.events():
            if i == index:
                stage = self.stages[pos]
                return stage, stage.recv if kind == RCV else stage.send
        raise BindingError(f"agent {self.agent} has no event {index}")


def _step_value(term) -> Optional[int]:
    if term[0] == terms.CONST:
        try:
            return int(term[1])
        except ValueError:
            return None
    return None


def _partition_actions(rule, has_send: bool):
    human = False
    recv_acts, send_acts, agnostic = [], [], []
    for f in rule.actions:
        if f[0] == HUMAN_MARKER:
            human = True
        elif f[0] == RECV_CERT:
            recv_acts.append(f)
        elif f[0] in (SEND_CERT, ROUTE_FACT):
            send_acts.append(f)
        else:
            agnostic.append(f)
    if has_send:
        send_acts.extend(agnostic)
    else:
        recv_acts.extend(agnostic)
    return human, tuple(recv_acts), tuple(send_acts)


def decompose_rule(rule) -> Optional[Stage]:
    """Stage view of an agent rule, or None for non-chain rules."""
    state_pre = [f for f in rule.premise if f[0] == STATE_FACT]
    if len(state_pre) != 1:
        return None
    pre = state_pre[0]
    if len(pre[1]) != 3 or pre[1][0][0] != terms.VAR_PUB:
        return None
    agent = pre[1][0][1]
    premise_step = _step_value(pre[1][1])
    if premise_step is None:
        return None

    state_post = [f for f in rule.conclusion if f[0] == STATE_FACT]
    if len(state_post) > 1:
        raise BindingError(f"rule {rule.name}: more than one state conclusion")
    concl_step = concl_kn = None
    if state_post:
        concl_step = _step_value(state_post[0][1][1])
        concl_kn = terms.tuple_items(state_post[0][1][2])

    recvs = [f for f in rule.premise if f[0] == RECV_FACT]
    sends = [f for f in rule.conclusion if f[0] == SEND_FACT]
    if len(recvs) > 1 or len(sends) > 1:
        raise BindingError(f"rule {rule.name}: more than one wire fact per direction")
    extra = tuple(
        f for f in rule.premise if f[0] not in (STATE_FACT, RECV_FACT)
    )
    human, recv_acts, send_acts = _partition_actions(rule, bool(sends))
    return Stage(
        rule_name=rule.name,
        agent=agent,
        premise_step=premise_step,
        premise_kn=terms.tuple_items(pre[1][2]),
        concl_step=concl_step,
        concl_kn=concl_kn,
        recv=Part(RCV, recvs[0], recv_acts) if recvs else None,
        send=Part(SND, sends[0], send_acts) if sends else None,
        human=human,
        extra_premise=extra,
    )


def extract_chains(rules) -> dict:
    """Agent chains keyed by agent variable name, stages in step order."""
    chains = {}
    for rule in rules:
        stage = decompose_rule(rule)
        if stage is None:
            continue
        chains.setdefault(stage.agent, []).append(stage)
    out = {}
    for agent, stages in chains.items():
        stages.sort(key=lambda s: s.premise_step)
        steps = [s.premise_step for s in stages]
        if len(set(steps)) != len(steps):
            raise BindingError(f"agent {agent}: duplicate state steps in chain")
        out[agent] = AgentChain(
            agent=agent, human=any(s.human for s in stages), stages=stages
        )
    return out


def human_chain(rules, human_role: Optional[str] = None) -> AgentChain:
    chains = extract_chains(rules)
    humans = [c for c in chains.values() if c.human]
    if human_role is not None:
        for c in humans:
            if c.agent == human_role:
                return c
        raise BindingError(f"no human agent chain named {human_role}")
    if len(humans) != 1:
        raise BindingError(
            f"expected exactly one human agent chain, found {len(humans)}"
        )
    return humans[0]
