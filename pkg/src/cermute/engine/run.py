"""Bounded execution: exhaustive trace enumeration and goal analysis.

Enumeration is depth-first from the empty state, deterministic (rules in
declaration order, bindings in canonical term order), with fresh names
drawn from a per-trace counter. Restrictions whose violation on a prefix
can never be repaired (prenex-universal, quantifier-free matrix) prune
subtrees as soon as they fail; any others filter completed traces.

The analyzer answers existence questions about the bounded trace space
(is some trace falsifying a goal? does any trace instantiate its
antecedent? does some trace satisfy an exists-trace goal?) without
materializing every interleaving. Search nodes are memoized on the
multiset state, the order type of the goal-relevant action history, the
fresh counter, and the steps used: two nodes agreeing on that key have
identical reachable suffix behavior for every tracked question, since
rule applicability depends only on the state and the questions only on
the relative order of relevant actions. Witness traces are rebuilt from
memoized suffixes and are always legal, replayable traces; the first
witness reported is the canonically first one, because memoization skips
only subtrees that were already explored in canonical order.

The memoized path requires every temporal variable of a tracked formula
to occur in at least one action atom (all bundled goals and restrictions
qualify); formulas outside that fragment are rejected so callers can
fall back to plain enumeration.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Optional

from .. import evaluate
from .. import formulas as fm
from ..rules import State, Trace, TraceStep
from .matching import apply_binding, compile_rules, find_applications, state_index


def _split_restrictions(restrictions):
    monotone, filters = [], []
    for r in restrictions:
        (monotone if fm.is_prefix_monotone(r) else filters).append(r)
    return monotone, filters


def _relevant_names(formulas) -> frozenset:
    names = set()
    for f in formulas:
        names.update(f.action_names())
    return frozenset(names)


def _filter_group(actions, relevant):
    return tuple(f for f in actions if f[0] in relevant)


def _admissible(groups, filters):
    history = tuple((i + 1, g) for i, g in enumerate(groups))
    return all(evaluate.holds_on_history(r.body, history) for r in filters)


def enumerate_traces(
    rules, restrictions=(), bound: int = 24, prune_prefix=None
) -> Iterator[Trace]:
    """All maximal traces of length <= bound, canonically ordered.

    Traces cut short by the bound are yielded with maximal=False.
    prune_prefix, when given, sees the current step list after each
    extension and returns True to abandon that subtree; use it to focus
    enumeration on a prefix-closed subset of the trace universe.
    """
    if bound < 1:
        raise ValueError("bound must be >= 1")
    crules = compile_rules(rules)
    monotone, filters = _split_restrictions(restrictions)
    mono_names = _relevant_names(monotone)
    filter_names = _relevant_names(filters)

    steps = []
    mono_history = []

    def finish(maximal) -> Optional[Trace]:
        if filters:
            groups = tuple(_filter_group(s.actions, filter_names) for s in steps)
            if not _admissible(groups, filters):
                return None
        return Trace(tuple(steps), maximal=maximal)

    def walk(state, depth, fresh_counter):
        idx = state_index(state)
        if depth >= bound:
            for crule in crules:
                if find_applications(crule, state, idx):
                    t = finish(maximal=False)
                    if t is not None:
                        yield t
                    return
            t = finish(maximal=True)
            if t is not None:
                yield t
            return
        extended = False
        for crule in crules:
            for binding in find_applications(crule, state, idx):
                new_state, actions, counter2 = apply_binding(
                    crule, state, dict(binding), fresh_counter
                )
                mono_group = _filter_group(actions, mono_names)
                if mono_group:
                    mono_history.append((depth + 1, mono_group))
                    ok = all(
                        evaluate.holds_on_history(r.body, tuple(mono_history))
                        for r in monotone
                    )
                    if not ok:
                        mono_history.pop()
                        continue
                steps.append(TraceStep(depth + 1, crule.rule.name, actions))
                if prune_prefix is not None and prune_prefix(steps):
                    steps.pop()
                    if mono_group:
                        mono_history.pop()
                    continue
                extended = True
                yield from walk(new_state, depth + 1, counter2)
                steps.pop()
                if mono_group:
                    mono_history.pop()
        if not extended:
            t = finish(maximal=True)
            if t is not None:
                yield t

    yield from walk(State(), 0, 0)


# --- memoized analysis -------------------------------------------------


@dataclass
class GoalReport:
    formula: fm.LemmaFormula
    violation: Optional[Trace] = None  # all-traces: first falsifying trace
    witness: Optional[Trace] = None  # exists-trace: first satisfying trace
    antecedent_seen: bool = False


@dataclass
class AnalysisResult:
    goals: dict  # name -> GoalReport
    truncated: bool = False  # some trace hit the bound
    nodes: int = 0


def memo_eval_safe(formula: fm.LemmaFormula) -> bool:
    """Whether the analyzer's exactness argument covers the formula."""
    anchored = set()
    temporal = set()

    def walk(node):
        if isinstance(node, fm.Quantifier):
            for name, sort in node.variables:
                if sort == fm.SORT_TEMPORAL:
                    temporal.add(name)
            walk(node.body)
        elif isinstance(node, fm.ActionAtom):
            anchored.add(node.timestamp)
        elif isinstance(node, fm.Not):
            walk(node.body)
        elif isinstance(node, (fm.And, fm.Or)):
            for i in node.items:
                walk(i)
        elif isinstance(node, fm.Implies):
            walk(node.antecedent)
            walk(node.consequent)

    walk(formula.body)
    return temporal <= anchored


_VIOL = "violation"
_ANTE = "antecedent"
_SAT = "witness"


class _AllAnswered(Exception):
    pass


class _Analyzer:
    def __init__(self, rules, restrictions, goals, bound):
        self.crules = compile_rules(rules)
        self.monotone, self.filters = _split_restrictions(restrictions)
        self.goals = list(goals)
        self.bound = bound
        for f in list(goals) + list(restrictions):
            if not memo_eval_safe(f):
                raise ValueError(
                    f"formula {f.name} is outside the analyzer's fragment "
                    "(every temporal variable must occur in an action atom)"
                )
        self.relevant = _relevant_names(list(goals) + list(restrictions))
        self.queries = []  # (goal index, query kind)
        for gi, g in enumerate(self.goals):
            if g.kind == fm.EXISTS_TRACE:
                self.queries.append((gi, _SAT))
            else:
                self.queries.append((gi, _VIOL))
                self.queries.append((gi, _ANTE))
        self.answered = {}  # query index -> path from root
        self.memo = {}
        self.leaf_cache = {}
        self.nodes = 0
        self.truncation_known = True

    def _record(self, q, prefix, suffix):
        if q not in self.answered:
            self.answered[q] = tuple((p[0], p[1], p[2]) for p in prefix) + suffix
            if len(self.answered) == len(self.queries):
                raise _AllAnswered()

    def _leaf_bits(self, groups):
        bits = self.leaf_cache.get(groups)
        if bits is not None:
            return bits
        if self.filters and not _admissible(groups, self.filters):
            bits = tuple(False for _ in self.queries)
        else:
            history = tuple((i + 1, g) for i, g in enumerate(groups))
            out = []
            for gi, kind in self.queries:
                goal = self.goals[gi]
                if kind == _VIOL:
                    out.append(not evaluate.holds_on_history(goal.body, history))
                elif kind == _SAT:
                    out.append(evaluate.holds_on_history(goal.body, history))
                else:
                    out.append(evaluate.antecedent_instantiated(goal, history))
            bits = tuple(out)
        self.leaf_cache[groups] = bits
        return bits

    def _explore(self, state, depth, groups, fresh_counter, prefix):
        """Returns ({query -> canonical-first suffix}, truncated_below)."""
        self.nodes += 1
        key = (state.frozen(), groups, depth, fresh_counter)
        hit = self.memo.get(key)
        if hit is not None:
            found, truncated = hit
            for q, suffix in found.items():
                self._record(q, prefix, suffix)
            return hit

        idx = state_index(state)
        found = {}
        truncated = False
        extended = False

        if depth < self.bound:
            for crule in self.crules:
                for binding in find_applications(crule, state, idx):
                    binding = dict(binding)
                    new_state, actions, counter2 = apply_binding(
                        crule, state, binding, fresh_counter
                    )
                    group = _filter_group(actions, self.relevant)
                    new_groups = groups + (group,) if group else groups
                    if group and self.monotone:
                        history = tuple((i + 1, g) for i, g in enumerate(new_groups))
                        if not all(
                            evaluate.holds_on_history(r.body, history)
                            for r in self.monotone
                        ):
                            continue
                    extended = True
                    step = (crule.index, binding, actions)
                    prefix.append(step)
                    try:
                        sub, sub_trunc = self._explore(
                            new_state, depth + 1, new_groups, counter2, prefix
                        )
                    finally:
                        prefix.pop()
                    truncated = truncated or sub_trunc
                    for q, suffix in sub.items():
                        if q not in found:
                            found[q] = (step,) + suffix
        else:
            for crule in self.crules:
                if find_applications(crule, state, idx):
                    truncated = True
                    break

        if not extended:
            bits = self._leaf_bits(groups)
            for q in range(len(self.queries)):
                if bits[q]:
                    found[q] = ()

        for q, suffix in found.items():
            self._record(q, prefix, suffix)
        value = (found, truncated)
        self.memo[key] = value
        return value

    def run(self) -> AnalysisResult:
        truncated = False
        try:
            _, truncated = self._explore(State(), 0, (), 0, [])
        except _AllAnswered:
            # every question has a positive answer; truncation was not
            # fully determined but no verdict below depends on it
            self.truncation_known = False
            truncated = True
        result = AnalysisResult(goals={}, truncated=truncated, nodes=self.nodes)
        for q, (gi, kind) in enumerate(self.queries):
            goal = self.goals[gi]
            report = result.goals.setdefault(goal.name, GoalReport(formula=goal))
            answer = self.answered.get(q)
            if answer is None:
                continue
            if kind == _ANTE:
                report.antecedent_seen = True
            elif kind == _VIOL:
                report.violation = self._rebuild(answer)
            else:
                report.witness = self._rebuild(answer)
        return result

    def _rebuild(self, path) -> Trace:
        steps = []
        for t, (rule_index, _, actions) in enumerate(path, start=1):
            steps.append(TraceStep(t, self.crules[rule_index].rule.name, actions))
        return Trace(tuple(steps), maximal=len(path) < self.bound)


# --- breadth-first search for extension-stable questions ----------------


def _restriction_compactable(formula: fm.LemmaFormula) -> bool:
    """Restrictions whose admissibility check needs only the set of
    distinct relevant event groups: prenex-universal, quantifier-free
    matrix, and no strict temporal ordering (equality between distinct
    events is always false and within one event always true, so any
    synthetic ordering of the set is faithful)."""
    if not fm.is_prefix_monotone(formula):
        return False
    return not any(
        isinstance(a, fm.TemporalLess) for a in fm.iter_atoms(formula.body)
    )


class _MonotoneSearch:
    """Minimal-depth search over (state, relevant history) keys.

    Sound and complete for queries whose positive answer on a trace
    prefix persists under every extension (see engine.stability): every
    prefix extends to some trace of the bounded universe, and the answer
    survives the extension, so prefix detection decides existence. Keys
    drop the depth dimension entirely, which is what makes deep bounds
    tractable; breadth-first order makes the first witness the shortest
    one (ties broken canonically) and each key is expanded exactly once,
    at its minimal depth, where the remaining budget is largest.

    Two further exact reductions keep the key space small:

    * idle productions are skipped: an application that consumes no
      linear fact, records no goal-relevant action, adds no new
      restriction event group, and whose products are all already present
      can be postponed until just before its output is first consumed, at
      unchanged cost, so exploring it early adds nothing;

    * restriction history is compacted to the set of distinct relevant
      event groups (admissible only for equality-only universal
      restrictions; others force the exact engine).
    """

    def __init__(self, rules, restrictions, goals, bound):
        from . import stability

        self.crules = compile_rules(rules)
        self.restrictions = list(restrictions)
        self.goals = list(goals)
        self.bound = bound
        for f in list(goals) + list(restrictions):
            if not memo_eval_safe(f):
                raise ValueError(
                    f"formula {f.name} is outside the analyzer's fragment"
                )
        for f in restrictions:
            if not _restriction_compactable(f):
                raise ValueError(
                    f"restriction {f.name} needs exact enumeration"
                )
        for f in goals:
            if not stability.violation_monotone(f):
                raise ValueError(f"goal {f.name} is not extension-stable")
        self.goal_names = _relevant_names(goals)
        self.restr_names = _relevant_names(restrictions)
        self.queries = []
        for gi, g in enumerate(self.goals):
            self.queries.append((gi, _VIOL))
            if fm.implication_parts(g.body) is not None:
                self.queries.append((gi, _ANTE))
        self.answered = {}
        self.eval_cache = {}
        self._forwarders = self._forwarder_rules()

    def _forwarder_rules(self):
        """Rules of the shape [F] --[invisible]-> [!G] where F's name has
        no other consumer. A fact matched by such a rule whose persistent
        product already exists is dead weight: its only transition wastes
        a step and records nothing, so search states elide it."""
        relevant = self.goal_names | self.restr_names
        consumers = {}
        for c in self.crules:
            for p in c.patterns:
                consumers.setdefault(p[0], set()).add(c.rule.name)
        out = {}
        for c in self.crules:
            if len(c.patterns) != 1 or len(c.rule.conclusion) != 1:
                continue
            pat, concl = c.patterns[0], c.rule.conclusion[0]
            if pat[0].startswith("!") or not concl[0].startswith("!"):
                continue
            if any(f[0] in relevant for f in c.rule.actions):
                continue
            if consumers.get(pat[0]) != {c.rule.name}:
                continue
            out[pat[0]] = (pat, concl)
        return out

    def _normalize(self, state) -> None:
        """Drop dead forwarder inputs (see _forwarder_rules) in place."""
        if not self._forwarders:
            return
        dead = []
        for f in state.linear:
            hit = self._forwarders.get(f[0])
            if hit is None:
                continue
            pat, concl = hit
            binding = {}
            trail = []
            from .matching import _match_fact_into, instantiate_fact

            if _match_fact_into(pat, f, binding, trail):
                if instantiate_fact(concl, binding) in state.persistent:
                    dead.append(f)
        for f in dead:
            while state.count(f):
                state.remove_linear(f)

    def _bits(self, groups):
        bits = self.eval_cache.get(groups)
        if bits is None:
            history = tuple((i + 1, g) for i, g in enumerate(groups))
            out = []
            for gi, kind in self.queries:
                goal = self.goals[gi]
                if kind == _VIOL:
                    out.append(not evaluate.holds_on_history(goal.body, history))
                else:
                    out.append(evaluate.antecedent_instantiated(goal, history))
            bits = tuple(out)
            self.eval_cache[groups] = bits
        return bits

    def _admissible_event(self, restr_set, group) -> bool:
        """Would recording this event group violate a restriction,
        given the set of groups already recorded?"""
        history = tuple(
            (i + 1, g) for i, g in enumerate(tuple(sorted(restr_set)) + (group,))
        )
        return all(
            evaluate.holds_on_history(r.body, history) for r in self.restrictions
        )

    def run(self) -> AnalysisResult:
        from collections import deque

        root_state = State()
        root_key = (root_state.frozen(), (), frozenset(), 0)
        parents = {root_key: None}
        queue = deque([(root_key, root_state, (), frozenset(), 0, 0)])
        truncated = False
        nodes = 0

        def settle(key, groups):
            bits = self._bits(groups)
            for q in range(len(self.queries)):
                if bits[q] and q not in self.answered:
                    self.answered[q] = key
            return len(self.answered) == len(self.queries)

        done = settle(root_key, ())
        while queue and not done:
            key, state, groups, restr_set, fresh, depth = queue.popleft()
            nodes += 1
            idx = state_index(state)
            if depth >= self.bound:
                if not truncated:
                    for crule in self.crules:
                        if find_applications(crule, state, idx):
                            truncated = True
                            break
                continue
            for crule in self.crules:
                for binding in find_applications(crule, state, idx):
                    binding = dict(binding)
                    new_state, actions, counter2 = apply_binding(
                        crule, state, binding, fresh
                    )
                    self._normalize(new_state)
                    group = _filter_group(actions, self.goal_names)
                    rgroup = _filter_group(actions, self.restr_names)
                    if rgroup and not self._admissible_event(restr_set, rgroup):
                        continue
                    novel_restr = bool(rgroup) and rgroup not in restr_set
                    if (
                        not group
                        and not novel_restr
                        and self._idle_application(crule, state, new_state)
                    ):
                        continue
                    new_restr = restr_set | {rgroup} if novel_restr else restr_set
                    new_groups = groups + (group,) if group else groups
                    ck = (new_state.frozen(), new_groups, new_restr, counter2)
                    if ck in parents:
                        continue
                    parents[ck] = (key, crule.index, binding, actions)
                    if settle(ck, new_groups):
                        done = True
                        break
                    queue.append(
                        (ck, new_state, new_groups, new_restr, counter2, depth + 1)
                    )
                if done:
                    break

        result = AnalysisResult(goals={}, truncated=truncated, nodes=nodes)
        for q, (gi, kind) in enumerate(self.queries):
            goal = self.goals[gi]
            report = result.goals.setdefault(goal.name, GoalReport(formula=goal))
            key = self.answered.get(q)
            if key is None:
                continue
            if kind == _ANTE:
                report.antecedent_seen = True
            else:
                report.violation = self._rebuild(parents, key)
        return result

    def _idle_application(self, crule, state, new_state) -> bool:
        """True when the application only re-produces available facts:
        consumes no linear fact and every product is already in the
        pre-state. Such a step can always be deferred to just before its
        output is first needed, at identical cost."""
        for pat in crule.patterns:
            if not pat[0].startswith("!"):
                return False
        for f in new_state.linear:
            if state.count(f) < new_state.linear[f]:
                # a genuinely new linear copy appeared; it is new only if
                # the fact was absent before
                if state.count(f) == 0:
                    return False
        for f in new_state.persistent:
            if f not in state.persistent:
                return False
        return True

    def _rebuild(self, parents, key) -> Trace:
        path = []
        node = parents[key]
        while node is not None:
            parent_key, rule_index, binding, actions = node
            path.append((rule_index, binding, actions))
            node = parents[parent_key]
        path.reverse()
        state = State()
        fresh = 0
        steps = []
        for t, (ri, binding, actions) in enumerate(path, start=1):
            state, replayed, fresh = apply_binding(
                self.crules[ri], state, dict(binding), fresh
            )
            steps.append(TraceStep(t, self.crules[ri].rule.name, replayed))
        return Trace(tuple(steps), maximal=not self._any_application(state))

    def _any_application(self, state) -> bool:
        idx = state_index(state)
        return any(find_applications(c, state, idx) for c in self.crules)


def analyze(rules, restrictions, goals, bound: int) -> AnalysisResult:
    """Existence analysis of the bounded trace space for the given goals.

    Goals whose violation is extension-stable (and their vacuity checks)
    run on the minimal-depth search; the rest fall back to the exact
    depth-indexed exploration. Results are merged per goal.
    """
    from . import stability

    if bound < 1:
        raise ValueError("bound must be >= 1")
    goals = list(goals)
    monotone_ok = all(fm.is_prefix_monotone(r) for r in restrictions)
    fast, slow = [], []
    for g in goals:
        if (
            monotone_ok
            and g.kind == fm.ALL_TRACES
            and stability.violation_monotone(g)
            and memo_eval_safe(g)
        ):
            fast.append(g)
        else:
            slow.append(g)
    merged = AnalysisResult(goals={}, truncated=False, nodes=0)
    # one search per goal: a narrow relevant-action alphabet merges many
    # more states than one shared search over the union alphabet
    for g in fast:
        out = _MonotoneSearch(rules, restrictions, [g], bound).run()
        merged.goals.update(out.goals)
        merged.truncated = merged.truncated or out.truncated
        merged.nodes += out.nodes
    if slow:
        out = _Analyzer(rules, restrictions, slow, bound).run()
        merged.goals.update(out.goals)
        merged.truncated = merged.truncated or out.truncated
        merged.nodes += out.nodes
    return merged
