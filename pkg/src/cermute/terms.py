"""Symbolic message terms.

Terms are represented as small tagged tuples rather than class instances:
they sit on the hot path of state-space exploration, where tuple hashing
and equality are markedly cheaper than dataclass dispatch.

Ground term variants:
    ('c', name)            quoted constant, e.g. 'qrcode'
    ('p', name)            public name, e.g. bookingqrcode
    ('n', name)            fresh name (a concrete nonce-like value)
    ('fn', sym, args)      function application, e.g. location(bookingqrcode)
    ('t', items)           non-empty tuple of terms

Pattern-only variants (never appear in states or traces):
    ('vp', name)           public variable, written $name
    ('vf', name)           fresh variable, written ~name
    ('vm', name)           message variable, written bare

A public variable matches constants and public names (both are public
data); a fresh variable matches only fresh names; a message variable
matches anything.
"""

from __future__ import annotations

from typing import Iterable, Iterator, Optional

Term = tuple  # tagged tuple, see module docstring

CONST = "c"
PUB = "p"
FRESH = "n"
FUNC = "fn"
TUPLE = "t"
VAR_PUB = "vp"
VAR_FRESH = "vf"
VAR_MSG = "vm"

_VAR_TAGS = frozenset((VAR_PUB, VAR_FRESH, VAR_MSG))


def const(name: str) -> Term:
    return (CONST, name)


def pub(name: str) -> Term:
    return (PUB, name)


def fresh(name: str) -> Term:
    return (FRESH, name)


def fapp(symbol: str, *args: Term) -> Term:
    return (FUNC, symbol, tuple(args))


def tup(*items: Term) -> Term:
    if not items:
        raise ValueError("tuples must be non-empty")
    return (TUPLE, tuple(items))


def pvar(name: str) -> Term:
    return (VAR_PUB, name)


def fvar(name: str) -> Term:
    return (VAR_FRESH, name)


def mvar(name: str) -> Term:
    return (VAR_MSG, name)


def is_var(t: Term) -> bool:
    return t[0] in _VAR_TAGS


def is_ground(t: Term) -> bool:
    tag = t[0]
    if tag in _VAR_TAGS:
        return False
    if tag == FUNC:
        return all(is_ground(a) for a in t[2])
    if tag == TUPLE:
        return all(is_ground(a) for a in t[1])
    return True


def variables(t: Term) -> Iterator[Term]:
    """Yield every variable occurrence in t (with repeats)."""
    tag = t[0]
    if tag in _VAR_TAGS:
        yield t
    elif tag == FUNC:
        for a in t[2]:
            yield from variables(a)
    elif tag == TUPLE:
        for a in t[1]:
            yield from variables(a)


def subterms(t: Term) -> Iterator[Term]:
    yield t
    tag = t[0]
    if tag == FUNC:
        for a in t[2]:
            yield from subterms(a)
    elif tag == TUPLE:
        for a in t[1]:
            yield from subterms(a)


def substitute(t: Term, binding: dict) -> Term:
    """Replace variables (and arbitrary subterms used as keys) per binding."""
    hit = binding.get(t)
    if hit is not None:
        return hit
    tag = t[0]
    if tag == FUNC:
        return (FUNC, t[1], tuple(substitute(a, binding) for a in t[2]))
    if tag == TUPLE:
        return (TUPLE, tuple(substitute(a, binding) for a in t[1]))
    return t


def match(pattern: Term, ground: Term, binding: dict) -> Optional[dict]:
    """First-order one-way matching of a pattern against a ground term.

    Extends binding (without mutating it) and returns the extended map,
    or None when the pattern does not match. States are always ground,
    so no unification of two open terms is ever needed.
    """
    tag = pattern[0]
    if tag in _VAR_TAGS:
        bound = binding.get(pattern)
        if bound is not None:
            return binding if bound == ground else None
        gtag = ground[0]
        if tag == VAR_PUB and gtag not in (CONST, PUB):
            return None
        if tag == VAR_FRESH and gtag != FRESH:
            return None
        out = dict(binding)
        out[pattern] = ground
        return out
    if tag != ground[0]:
        return None
    if tag == FUNC:
        if pattern[1] != ground[1] or len(pattern[2]) != len(ground[2]):
            return None
        for p, g in zip(pattern[2], ground[2]):
            binding = match(p, g, binding)
            if binding is None:
                return None
        return binding
    if tag == TUPLE:
        if len(pattern[1]) != len(ground[1]):
            return None
        for p, g in zip(pattern[1], ground[1]):
            binding = match(p, g, binding)
            if binding is None:
                return None
        return binding
    return binding if pattern == ground else None


_ORDER = {CONST: 0, PUB: 1, FRESH: 2, FUNC: 3, TUPLE: 4, VAR_PUB: 5, VAR_FRESH: 6, VAR_MSG: 7}

_ORDER_KEYS = {}


def order_key(t: Term):
    """Total order on terms; used wherever a canonical ordering is needed."""
    key = _ORDER_KEYS.get(t)
    if key is not None:
        return key
    tag = t[0]
    rank = _ORDER[tag]
    if tag == FUNC:
        key = (rank, t[1], tuple(order_key(a) for a in t[2]))
    elif tag == TUPLE:
        key = (rank, "", tuple(order_key(a) for a in t[1]))
    else:
        key = (rank, t[1], ())
    _ORDER_KEYS[t] = key
    return key


def render(t: Term) -> str:
    """Canonical surface syntax (the one the parsers accept)."""
    tag = t[0]
    if tag == CONST:
        return f"'{t[1]}'"
    if tag == PUB:
        return t[1]
    if tag == FRESH:
        return f"~{t[1]}"
    if tag == VAR_PUB:
        return f"${t[1]}"
    if tag == VAR_FRESH:
        return f"~{t[1]}"
    if tag == VAR_MSG:
        return t[1]
    if tag == FUNC:
        return f"{t[1]}({', '.join(render(a) for a in t[2])})"
    if tag == TUPLE:
        return f"<{', '.join(render(a) for a in t[1])}>"
    raise ValueError(f"unknown term tag {tag!r}")


def tuple_items(t: Term) -> tuple:
    """Items of a tuple term, or the term itself as a 1-tuple."""
    return t[1] if t[0] == TUPLE else (t,)
