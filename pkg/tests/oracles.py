"""Independent oracles used to derive expected values.

The reference execution used across the engine tests is a hand-written
happy-path schedule: one registration, one session hand-off, and one
complete exchange. Its legality is established by replay (which checks
every premise against the re-derived states), not by the enumerator or
analyzer under test, so the engines can be checked against it rather
than against themselves.
"""

from __future__ import annotations

from cermute import evaluate
from cermute.engine import enumerate_traces, replay_trace
from cermute.engine.matching import apply_binding, compile_rules, find_applications
from cermute.rules import State, Trace, TraceStep

# one full check-in, transport steps included; derived by hand from the
# model's data flow (registration, hand-off, scan, link, data, access)
HAPPY_PATH_RULES = (
    "Guestsetup",
    "Setup",
    "Guest_1",
    "ChanSndS",
    "ChanRcvS",
    "RK_1",
    "ChanSndS",
    "ChanRcvS",
    "Guest_2",
    "ChanSndS",
    "ChanRcvS",
    "RK_2",
    "ChanSndS",
    "ChanRcvS",
    "Guest_3",
)
HAPPY_PATH_LENGTH = len(HAPPY_PATH_RULES)  # 15


def schedule_trace(rules, names) -> Trace:
    """Realize a rule-name schedule, backtracking over the applications
    available at each step; fails only if no choice sequence fits."""
    crules = {c.rule.name: c for c in compile_rules(rules)}

    def search(state, fresh, k):
        if k == len(names):
            return ()
        crule = crules[names[k]]
        for binding in find_applications(crule, state, None):
            new_state, actions, counter = apply_binding(
                crule, state, dict(binding), fresh
            )
            rest = search(new_state, counter, k + 1)
            if rest is not None:
                return (TraceStep(k + 1, names[k], actions),) + rest
        return None

    steps = search(State(), 0, 0)
    assert steps is not None, f"schedule {names} cannot be realized"
    return Trace(steps, maximal=False)


def happy_path(rules) -> Trace:
    trace = schedule_trace(rules, HAPPY_PATH_RULES)
    assert replay_trace(rules, trace).ok
    return trace


def brute_force_verdicts(rules, restrictions, lemmas, bound):
    """Spec-literal checking: enumerate every trace and evaluate each
    lemma on each; used to cross-check the analyzer's search reductions.

    Returns {name: (violated, antecedent_seen, satisfied)}.
    """
    out = {l.name: [False, False, False] for l in lemmas}
    for trace in enumerate_traces(rules, restrictions, bound):
        history = evaluate.history_of(trace)
        for l in lemmas:
            rec = out[l.name]
            holds = evaluate.holds_on_history(l.body, history)
            if not holds:
                rec[0] = True
            if evaluate.antecedent_instantiated(l, history):
                rec[1] = True
            if holds:
                rec[2] = True
    return {k: tuple(v) for k, v in out.items()}
