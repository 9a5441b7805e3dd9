"""Trace replay and execution-property validation.

Replaying re-derives every state of a recorded trace from the empty
state, which checks linear-fact conservation for free: a step whose
premise cannot be satisfied (or whose recorded actions no binding can
reproduce) fails the replay. On top of the replayed states the module
checks persistent-fact permanence and agent-knowledge monotonicity.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .. import terms
from ..rules import State, Trace, render_fact
from .matching import apply_binding, compile_rules, find_applications, instantiate_fact


class ReplayError(Exception):
    pass


@dataclass
class ReplayResult:
    states: list  # state after each step; states[0] is the empty state
    bindings: list  # binding used at each step
    problems: list = field(default_factory=list)

    @property
    def ok(self):
        return not self.problems


def replay_trace(rules, trace: Trace, state_fact: str = "State") -> ReplayResult:
    """Re-derive a trace, validating every step against the rule set.

    state_fact names the agent-state fact family checked for knowledge
    monotonicity: its arguments must be (agent, step, knowledge tuple).
    """
    crules = {c.rule.name: c for c in compile_rules(rules)}
    state = State()
    states = [state]
    bindings = []
    problems = []
    fresh_counter = 0

    for step in trace.steps:
        crule = crules.get(step.rule)
        if crule is None:
            raise ReplayError(f"step {step.timestamp}: unknown rule {step.rule}")
        chosen = None
        for binding in find_applications(crule, state, None):
            binding = dict(binding)
            new_state, actions, counter2 = apply_binding(
                crule, state, binding, fresh_counter
            )
            if actions == step.actions:
                chosen = (new_state, binding, counter2)
                break
        if chosen is None:
            raise ReplayError(
                f"step {step.timestamp}: no application of {step.rule} reproduces "
                "the recorded actions (premise unsatisfied or actions differ)"
            )
        new_state, binding, fresh_counter = chosen

        # persistent-fact permanence
        lost = state.persistent - new_state.persistent
        for f in lost:
            problems.append(
                f"step {step.timestamp}: persistent fact {render_fact(f)} vanished"
            )
        # knowledge monotonicity over the agent-state fact family
        pre = [
            instantiate_fact(p, binding)
            for p in crule.rule.premise
            if p[0] == state_fact
        ]
        post = [
            instantiate_fact(p, binding)
            for p in crule.rule.conclusion
            if p[0] == state_fact
        ]
        for before in pre:
            agent = before[1][0] if before[1] else None
            for after in post:
                if after[1] and after[1][0] == agent:
                    problems.extend(
                        _monotonicity_problems(step.timestamp, before, after)
                    )
        state = new_state
        states.append(state)
        bindings.append(binding)

    return ReplayResult(states=states, bindings=bindings, problems=problems)


def _monotonicity_problems(timestamp, before, after):
    out = []
    try:
        step_b = int(before[1][1][1])
        step_a = int(after[1][1][1])
        if step_a < step_b:
            out.append(
                f"step {timestamp}: agent step went backwards "
                f"({step_b} -> {step_a})"
            )
    except (ValueError, IndexError):
        pass
    if len(before[1]) >= 3 and len(after[1]) >= 3:
        kn_b = set(terms.tuple_items(before[1][2]))
        kn_a = set(terms.tuple_items(after[1][2]))
        missing = kn_b - kn_a
        if missing:
            lost = ", ".join(sorted(terms.render(t) for t in missing))
            out.append(f"step {timestamp}: knowledge shrank (lost {lost})")
    return out
