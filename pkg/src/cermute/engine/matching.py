"""Rule applicability and application.

Matching is one-way first-order matching of rule patterns against ground
states. Freshness: premises of the form Fr(~x) (and fresh variables that
occur only in outputs) bind engine-generated names fresh_1, fresh_2, ...
from a per-trace counter. Public variables not bound by the premise are
instantiated as the public constant carrying the variable's own name,
the convention the bundled models rely on.
"""

from __future__ import annotations

from dataclasses import dataclass

from .. import terms
from ..rules import FR, RewriteRule, State, fact_key, is_persistent


class ApplyError(Exception):
    def __init__(self, message, missing=()):
        self.missing = tuple(missing)
        super().__init__(message)


class CompiledRule:
    """Preprocessed rule: premise split, output instantiation plan."""

    __slots__ = ("rule", "index", "patterns", "fresh_outputs", "pub_outputs")

    def __init__(self, rule: RewriteRule, index: int):
        self.rule = rule
        self.index = index
        self.patterns = tuple(f for f in rule.premise if f[0] != FR)
        fr = list(rule.fr_vars())
        bound = rule.premise_vars()
        pubs = []
        for v in rule.free_output_vars():
            if v[0] == terms.VAR_FRESH and v not in fr:
                fr.append(v)
            elif v[0] == terms.VAR_PUB:
                pubs.append(v)
        self.fresh_outputs = tuple(fr)
        self.pub_outputs = tuple(pubs)


def compile_rules(rules) -> list:
    return [CompiledRule(r, i) for i, r in enumerate(rules)]


def state_index(state: State) -> dict:
    """Facts grouped by name, canonically sorted."""
    idx = {}
    for f in state.linear:
        idx.setdefault(f[0], []).append(f)
    for f in state.persistent:
        idx.setdefault(f[0], []).append(f)
    for lst in idx.values():
        lst.sort(key=fact_key)
    return idx


_VARS = (terms.VAR_PUB, terms.VAR_FRESH, terms.VAR_MSG)


def _match_into(pattern, ground, binding, trail) -> bool:
    """Destructive match; new bindings are recorded on the trail."""
    tag = pattern[0]
    if tag in _VARS:
        bound = binding.get(pattern)
        if bound is not None:
            return bound == ground
        gtag = ground[0]
        if tag == terms.VAR_PUB and gtag not in (terms.CONST, terms.PUB):
            return False
        if tag == terms.VAR_FRESH and gtag != terms.FRESH:
            return False
        binding[pattern] = ground
        trail.append(pattern)
        return True
    if tag != ground[0]:
        return False
    if tag == terms.FUNC:
        if pattern[1] != ground[1] or len(pattern[2]) != len(ground[2]):
            return False
        return all(
            _match_into(p, g, binding, trail) for p, g in zip(pattern[2], ground[2])
        )
    if tag == terms.TUPLE:
        if len(pattern[1]) != len(ground[1]):
            return False
        return all(
            _match_into(p, g, binding, trail) for p, g in zip(pattern[1], ground[1])
        )
    return pattern == ground


def _match_fact_into(pattern, ground, binding, trail) -> bool:
    pargs, gargs = pattern[1], ground[1]
    if len(pargs) != len(gargs):
        return False
    return all(_match_into(p, g, binding, trail) for p, g in zip(pargs, gargs))


def _binding_key(binding):
    return tuple(
        sorted((v[0], v[1], terms.order_key(val)) for v, val in binding.items())
    )


def find_applications(crule: CompiledRule, state: State, idx=None) -> list:
    """All distinct premise bindings, canonically ordered.

    Bindings include self-named public outputs but leave fresh outputs
    unbound; those are assigned at application time from the trace's
    fresh-name counter.
    """
    if idx is None:
        idx = state_index(state)
    patterns = crule.patterns
    for f in patterns:
        if f[0] not in idx:
            return []
    # match scarce facts first to cut backtracking
    order = sorted(range(len(patterns)), key=lambda i: (len(idx[patterns[i][0]]), i))
    results = {}
    consumed = {}
    binding = {}

    def backtrack(k):
        if k == len(order):
            full = dict(binding)
            for v in crule.pub_outputs:
                full.setdefault(v, terms.const(v[1]))
            results.setdefault(_binding_key(full), full)
            return
        pat = patterns[order[k]]
        persistent = is_persistent(pat)
        for cand in idx[pat[0]]:
            if not persistent:
                used = consumed.get(cand, 0)
                if used >= state.count(cand):
                    continue
            trail = []
            if _match_fact_into(pat, cand, binding, trail):
                if not persistent:
                    consumed[cand] = consumed.get(cand, 0) + 1
                backtrack(k + 1)
                if not persistent:
                    consumed[cand] -= 1
            for v in trail:
                del binding[v]

    backtrack(0)
    return [results[k] for k in sorted(results)]


def instantiate_fact(f, binding):
    return (f[0], tuple(terms.substitute(a, binding) for a in f[1]))


def apply_binding(crule: CompiledRule, state: State, binding: dict, fresh_counter: int):
    """Apply a rule under a complete premise binding.

    Returns (new state, ground action facts, next fresh counter). The
    binding is extended in place with generated fresh names.
    """
    for v in crule.fresh_outputs:
        if v not in binding:
            fresh_counter += 1
            binding[v] = terms.fresh(f"fresh_{fresh_counter}")
    new_state = state.copy()
    for pat in crule.patterns:
        if is_persistent(pat):
            continue
        new_state.remove_linear(instantiate_fact(pat, binding))
    for pat in crule.rule.conclusion:
        new_state.add(instantiate_fact(pat, binding))
    actions = tuple(instantiate_fact(pat, binding) for pat in crule.rule.actions)
    return new_state, actions, fresh_counter


def apply_rule(state: State, rule: RewriteRule, binding: dict):
    """Validated single application; the public counterpart of apply_binding.

    Raises ApplyError when the instantiated premise is not satisfied
    (listing the missing facts) or when the binding leaves any premise,
    action, or conclusion non-ground.
    """
    crule = CompiledRule(rule, 0)
    binding = dict(binding)
    for v in crule.pub_outputs:
        binding.setdefault(v, terms.const(v[1]))

    missing = []
    need = {}
    for pat in crule.patterns:
        inst = instantiate_fact(pat, binding)
        if any(not terms.is_ground(a) for a in inst[1]):
            raise ApplyError(
                f"rule {rule.name}: premise {inst[0]} not ground under binding"
            )
        if is_persistent(inst):
            if state.count(inst) == 0:
                missing.append(inst)
        else:
            need[inst] = need.get(inst, 0) + 1
    for inst, n in need.items():
        if state.count(inst) < n:
            missing.append(inst)
    if missing:
        raise ApplyError(
            f"rule {rule.name}: premise not satisfied; missing "
            + ", ".join(sorted(f"{m[0]}" for m in missing)),
            missing=missing,
        )

    counter = 0
    for v in crule.fresh_outputs:
        if v not in binding:
            counter += 1
            binding[v] = terms.fresh(f"fresh_{counter}")
    new_state = state.copy()
    for pat in crule.patterns:
        if not is_persistent(pat):
            new_state.remove_linear(instantiate_fact(pat, binding))
    for pat in crule.rule.conclusion:
        inst = instantiate_fact(pat, binding)
        if any(not terms.is_ground(a) for a in inst[1]):
            raise ApplyError(
                f"rule {rule.name}: conclusion {inst[0]} not ground under binding"
            )
        new_state.add(inst)
    actions = []
    for pat in crule.rule.actions:
        inst = instantiate_fact(pat, binding)
        if any(not terms.is_ground(a) for a in inst[1]):
            raise ApplyError(
                f"rule {rule.name}: action {inst[0]} not ground under binding"
            )
        actions.append(inst)
    return new_state, tuple(actions)
