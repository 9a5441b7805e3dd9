"""Compilation of role-scripts into agent rules.

Every event becomes one rule over agent-state facts AgSt(agent, step,
knowledge): the start event a setup rule concluding AgSt at step 1, a
send a rule that emits an outgoing wire fact, a receive a rule that
consumes an incoming wire fact and extends the knowledge tuple with the
newly learned values. Event annotations become extra action facts.

The final event of a human role concludes with an empty state (the human
walks away); technical roles retain their agent state.
"""

from __future__ import annotations

from .. import model, terms
from ..model import Ceremony, RoleScript
from ..rules import RewriteRule

AGENT_STATE = "AgSt"


class CompileError(Exception):
    pass


def _knowledge_after(kn: tuple, incoming) -> tuple:
    new = list(kn)
    for v in incoming:
        if v not in new:
            new.append(v)
    return tuple(new)


def _agst(role: str, step: int, kn: tuple):
    return (AGENT_STATE, (terms.pub(role), terms.const(str(step)), terms.tup(*kn)))


def compile_script(script: RoleScript, kind: str, channels) -> list:
    rules = []
    events = script.events
    if not events or not events[0].is_start():
        raise CompileError(f"role {script.role}: script must begin with start")
    role = script.role
    kn = tuple(events[0].message.values)
    start = events[0]
    start_actions = (("Start", (terms.pub(role), start.message.term())),) + tuple(
        (name, args) for name, args in start.annotations
    )
    rules.append(RewriteRule(f"{role}0", (), start_actions, (_agst(role, 1, kn),)))

    for i, ev in enumerate(events[1:], start=1):
        if ev.is_start():
            raise CompileError(f"role {role}: start occurs after index 0")
        if ev.channel not in channels:
            raise CompileError(
                f"role {role}: channel {ev.channel!r} has no channel rules configured"
            )
        last = i == len(events) - 1
        msg = ev.message.term()
        annots = tuple((name, args) for name, args in ev.annotations)
        if ev.action == model.SND:
            action = ("Snd", (terms.pub(role), terms.pub(ev.channel), terms.pub(ev.peer), msg))
            out_fact = (f"Out_{ev.channel}", (terms.pub(role), terms.pub(ev.peer), msg))
            conclusion = (out_fact,) if last and kind == model.HUMAN else (
                _agst(role, i + 1, kn),
                out_fact,
            )
            rules.append(
                RewriteRule(
                    f"{role}{i}", (_agst(role, i, kn),), (action,) + annots, conclusion
                )
            )
        else:
            action = ("Rcv", (terms.pub(role), terms.pub(ev.channel), terms.pub(ev.peer), msg))
            in_fact = (f"In_{ev.channel}", (terms.pub(ev.peer), terms.pub(role), msg))
            kn_next = _knowledge_after(kn, ev.message.values)
            conclusion = () if last and kind == model.HUMAN else (_agst(role, i + 1, kn_next),)
            rules.append(
                RewriteRule(
                    f"{role}{i}",
                    (_agst(role, i, kn), in_fact),
                    (action,) + annots,
                    conclusion,
                )
            )
            kn = kn_next
    return rules


def compile_role_scripts(c: Ceremony) -> list:
    """Agent rules for every script of the ceremony, in script order."""
    report = model.validate_ceremony(c)
    if report:
        raise CompileError(
            "ceremony does not validate: " + "; ".join(str(v) for v in report[:5])
        )
    channels = set(c.channel_replay) if c.channel_replay else set(model.CHANNEL_TYPES)
    out = []
    for script in c.scripts:
        out.extend(compile_script(script, c.agent_kind[script.role], channels))
    return out
