"""Parser for theory documents: rewrite rules, restrictions, and lemmas.

The accepted grammar is a strict subset of the security-protocol-theory
(.spthy) surface syntax: facts with !-persistence, <...> tuples, quoted
constants, $-public and ~-fresh variable prefixes, quantified trace
formulas. Constructs outside the subset (let bindings, equational
builtins, diff terms, tactic annotations) are rejected explicitly.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .. import formulas as fm
from .. import terms
from ..rules import RewriteRule
from .errors import ParseError, SourceSpan
from .lexer import EOF, FRESHVAR, IDENT, NUM, PUBVAR, PUNCT, QCONST, TEMPORAL, tokenize

_UNSUPPORTED = {
    "builtins",
    "equations",
    "let",
    "diff",
    "tactic",
    "heuristic",
    "macros",
    "predicates",
    "options",
}

_TEMPORAL_SENTINEL = "#"  # marks temporal refs in parsed comparison operands


@dataclass
class TheoryDocument:
    name: Optional[str]
    functions: dict  # symbol -> arity
    publics: tuple  # of (name, optional type tag)
    rules: list  # of RewriteRule
    restrictions: list  # of LemmaFormula (kind=restriction)
    lemmas: list  # of LemmaFormula
    spans: dict = field(default_factory=dict)  # object id key -> SourceSpan

    def span_of(self, node) -> Optional[SourceSpan]:
        return self.spans.get(id(node))

    def rule_named(self, name: str) -> Optional[RewriteRule]:
        for r in self.rules:
            if r.name == name:
                return r
        return None


class _Stream:
    def __init__(self, tokens, filename):
        self.tokens = tokens
        self.i = 0
        self.filename = filename

    def peek(self, ahead=0):
        j = min(self.i + ahead, len(self.tokens) - 1)
        return self.tokens[j]

    def next(self):
        tok = self.tokens[self.i]
        if tok.kind != EOF:
            self.i += 1
        return tok

    def at_punct(self, value):
        t = self.peek()
        return t.kind == PUNCT and t.value == value

    def at_ident(self, value=None):
        t = self.peek()
        return t.kind == IDENT and (value is None or t.value == value)

    def expect_punct(self, value, what=None):
        t = self.next()
        if t.kind != PUNCT or t.value != value:
            raise ParseError(
                f"expected {what or value!r}, found {t.value or t.kind!r}", t.span
            )
        return t

    def expect_ident(self, what="identifier"):
        t = self.next()
        if t.kind != IDENT:
            raise ParseError(f"expected {what}, found {t.value or t.kind!r}", t.span)
        return t

    def error(self, message, hint=None):
        raise ParseError(message, self.peek().span, hint)


def _parse_term(s: _Stream):
    """Term in pattern syntax: vars by prefix, bare idents are message vars."""
    t = s.peek()
    if t.kind == QCONST:
        s.next()
        return terms.const(t.value)
    if t.kind == PUBVAR:
        s.next()
        return terms.pvar(t.value)
    if t.kind == FRESHVAR:
        s.next()
        return terms.fvar(t.value)
    if t.kind == NUM:
        s.next()
        return terms.const(t.value)
    if t.kind == IDENT:
        if t.value in _UNSUPPORTED:
            raise ParseError(f"unsupported construct '{t.value}'", t.span)
        s.next()
        if s.at_punct("("):
            s.next()
            args = []
            if not s.at_punct(")"):
                args.append(_parse_term(s))
                while s.at_punct(","):
                    s.next()
                    args.append(_parse_term(s))
            s.expect_punct(")")
            return terms.fapp(t.value, *args)
        return terms.mvar(t.value)
    if t.kind == PUNCT and t.value == "<":
        s.next()
        items = [_parse_term(s)]
        while s.at_punct(","):
            s.next()
            items.append(_parse_term(s))
        s.expect_punct(">", "'>' closing tuple")
        return terms.tup(*items)
    raise ParseError(f"expected term, found {t.value or t.kind!r}", t.span)


def _parse_fact(s: _Stream):
    bang = ""
    if s.at_punct("!"):
        s.next()
        bang = "!"
    name_tok = s.expect_ident("fact name")
    s.expect_punct("(", "'(' after fact name")
    args = []
    if not s.at_punct(")"):
        args.append(_parse_term(s))
        while s.at_punct(","):
            s.next()
            args.append(_parse_term(s))
    s.expect_punct(")")
    return (bang + name_tok.value, tuple(args)), name_tok.span


def _parse_fact_list(s: _Stream, arities, what):
    s.expect_punct("[", f"'[' opening {what}")
    facts = []
    if not s.at_punct("]"):
        while True:
            f, span = _parse_fact(s)
            _note_arity(arities, f, span)
            facts.append(f)
            if s.at_punct(","):
                s.next()
                continue
            break
    s.expect_punct("]", f"']' closing {what}")
    return tuple(facts)


def _note_arity(arities, f, span):
    name, args = f
    known = arities.get(name)
    if known is None:
        arities[name] = (len(args), span)
    elif known[0] != len(args):
        raise ParseError(
            f"fact {name} used with arity {len(args)}, previously {known[0]}",
            span,
            hint=f"first use at {known[1]}",
        )


def _parse_rule(s: _Stream, arities) -> RewriteRule:
    s.next()  # 'rule'
    name_tok = s.expect_ident("rule name")
    s.expect_punct(":", "':' after rule name")
    premise = _parse_fact_list(s, arities, "premise")
    actions = ()
    if s.at_punct("-->"):
        s.next()
    elif s.at_punct("--["):
        s.next()
        acts = []
        if not s.at_punct("]->"):
            while True:
                f, span = _parse_fact(s)
                _note_arity(arities, f, span)
                acts.append(f)
                if s.at_punct(","):
                    s.next()
                    continue
                break
        s.expect_punct("]->", "']->' closing action facts")
        actions = tuple(acts)
    else:
        s.error("expected '-->' or '--[' after premise")
    conclusion = _parse_fact_list(s, arities, "conclusion")
    return RewriteRule(name_tok.value, premise, actions, conclusion), name_tok.span


# --- formulas ---------------------------------------------------------------


def _parse_quantified(s: _Stream):
    kind_tok = s.next()  # All | Ex
    variables = []
    while True:
        t = s.peek()
        if t.kind == TEMPORAL:
            s.next()
            variables.append((t.value, fm.SORT_TEMPORAL))
        elif t.kind == IDENT and t.value not in ("All", "Ex", "not"):
            s.next()
            variables.append((t.value, fm.SORT_MSG))
        else:
            break
    if not variables:
        s.error(f"expected at least one variable after {kind_tok.value}")
    s.expect_punct(".", "'.' after quantifier variables")
    body = _parse_formula(s)
    return fm.Quantifier(kind_tok.value, tuple(variables), body)


def _parse_operand(s: _Stream):
    """One side of a comparison: a term, or a temporal reference."""
    t = s.peek()
    if t.kind == TEMPORAL:
        s.next()
        return (_TEMPORAL_SENTINEL, t.value), t.span
    term = _parse_term(s)
    return term, t.span


def _parse_atom(s: _Stream):
    operand, span = _parse_operand(s)
    if s.at_punct("@"):
        s.next()
        ts = s.peek()
        if ts.kind in (TEMPORAL, IDENT):
            s.next()
            if _is_temporal_ref(operand) or operand[0] != terms.FUNC:
                raise ParseError(
                    "malformed @ annotation: '@' must follow an action fact", span
                )
            return fm.ActionAtom(operand[1], operand[2], ts.value)
        raise ParseError("malformed @ annotation: expected temporal variable", ts.span)
    return _finish_comparison(s, operand, span)


def _is_temporal_ref(operand) -> bool:
    return isinstance(operand, tuple) and operand[0] == _TEMPORAL_SENTINEL


def _finish_comparison(s: _Stream, left, span):
    if s.at_punct("<"):
        s.next()
        right, rspan = _parse_operand(s)
        lname = _temporal_name(left, span)
        rname = _temporal_name(right, rspan)
        return fm.TemporalLess(lname, rname)
    if s.at_punct("="):
        s.next()
        right, rspan = _parse_operand(s)
        if _is_temporal_ref(left) or _is_temporal_ref(right):
            return fm.TemporalEq(_temporal_name(left, span), _temporal_name(right, rspan))
        return fm.TermEq(left, right)
    raise ParseError("expected '@', '<' or '=' to complete atom", s.peek().span)


def _temporal_name(operand, span) -> str:
    if _is_temporal_ref(operand):
        return operand[1]
    if operand[0] == terms.VAR_MSG:
        return operand[1]  # optional sort prefix on use sites
    raise ParseError("expected temporal variable", span)


def _parse_unary(s: _Stream):
    t = s.peek()
    if t.kind == IDENT and t.value == "not":
        s.next()
        return fm.Not(_parse_unary(s))
    if t.kind == IDENT and t.value in ("All", "Ex"):
        return _parse_quantified(s)
    if s.at_punct("("):
        s.next()
        body = _parse_formula(s)
        s.expect_punct(")")
        return body
    return _parse_atom(s)


def _parse_conjunction(s: _Stream):
    items = [_parse_unary(s)]
    while s.at_punct("&"):
        s.next()
        items.append(_parse_unary(s))
    return items[0] if len(items) == 1 else fm.And(tuple(items))


def _parse_disjunction(s: _Stream):
    items = [_parse_conjunction(s)]
    while s.at_punct("|"):
        s.next()
        items.append(_parse_conjunction(s))
    return items[0] if len(items) == 1 else fm.Or(tuple(items))


def _parse_formula(s: _Stream):
    left = _parse_disjunction(s)
    if s.at_punct("==>"):
        s.next()
        right = _parse_formula(s)
        return fm.Implies(left, right)
    return left


def _check_scoping(body, span: SourceSpan) -> None:
    """Reject unbound variables and sort-inconsistent uses."""

    def walk(node, env):
        if isinstance(node, fm.Quantifier):
            inner = dict(env)
            for name, sort in node.variables:
                inner[name] = sort
            walk(node.body, inner)
            return
        if isinstance(node, fm.ActionAtom):
            tsort = env.get(node.timestamp)
            if tsort is None:
                raise ParseError(f"unbound variable {node.timestamp}", span)
            for a in node.args:
                for v in terms.variables(a):
                    if v[0] != terms.VAR_MSG:
                        raise ParseError(f"unbound variable {terms.render(v)}", span)
                    sort = env.get(v[1])
                    if sort is None:
                        raise ParseError(f"unbound variable {v[1]}", span)
                    if sort == fm.SORT_TEMPORAL:
                        raise ParseError(
                            f"temporal variable {v[1]} used as message variable", span
                        )
            return
        if isinstance(node, (fm.TemporalLess, fm.TemporalEq)):
            for name in (node.left, node.right):
                if name not in env:
                    raise ParseError(f"unbound variable {name}", span)
            return
        if isinstance(node, fm.TermEq):
            for side in (node.left, node.right):
                for v in terms.variables(side):
                    if v[0] != terms.VAR_MSG:
                        raise ParseError(f"unbound variable {terms.render(v)}", span)
                    sort = env.get(v[1])
                    if sort is None:
                        raise ParseError(f"unbound variable {v[1]}", span)
                    if sort == fm.SORT_TEMPORAL:
                        raise ParseError(
                            f"temporal variable {v[1]} used as message variable", span
                        )
            return
        if isinstance(node, fm.Not):
            walk(node.body, env)
            return
        if isinstance(node, (fm.And, fm.Or)):
            for item in node.items:
                walk(item, env)
            return
        if isinstance(node, fm.Implies):
            walk(node.antecedent, env)
            walk(node.consequent, env)
            return
        raise TypeError(node)

    walk(body, {})

    # a temporal binder used only at @/</= positions is fine; binders used
    # both ways are caught above via their declared sort


def _parse_quoted_formula(s: _Stream):
    s.expect_punct('"', "opening '\"' of formula")
    span = s.peek().span
    body = _parse_formula(s)
    s.expect_punct('"', "closing '\"' of formula")
    return body, span


def parse_lemma_block(s: _Stream, kind_keyword: str):
    s.next()  # 'lemma' | 'restriction'
    name_tok = s.expect_ident("lemma name")
    if kind_keyword == "restriction":
        kind = fm.RESTRICTION
        s.expect_punct(":", "':' after restriction name")
    else:
        s.expect_punct(":", "':' after lemma name")
        kw = s.expect_ident("lemma kind ('all-traces' or 'exists-trace')")
        if kw.value == "all" and s.at_punct("-"):
            s.next()
            tail = s.expect_ident()
            if tail.value != "traces":
                raise ParseError("expected 'all-traces'", tail.span)
            kind = fm.ALL_TRACES
        elif kw.value == "exists" and s.at_punct("-"):
            s.next()
            tail = s.expect_ident()
            if tail.value != "trace":
                raise ParseError("expected 'exists-trace'", tail.span)
            kind = fm.EXISTS_TRACE
        else:
            raise ParseError(
                f"unknown lemma kind {kw.value!r}",
                kw.span,
                hint="expected 'all-traces' or 'exists-trace'",
            )
    body, span = _parse_quoted_formula(s)
    _check_scoping(body, span)
    return fm.LemmaFormula(name_tok.value, kind, body), name_tok.span


def parse_theory(text: str, filename: str = "<input>") -> TheoryDocument:
    """Parse a full document; raises ParseError with a span on failure."""
    s = _Stream(tokenize(text, filename), filename)
    doc = TheoryDocument(
        name=None, functions={}, publics=(), rules=[], restrictions=[], lemmas=[], spans={}
    )
    publics = []
    arities = {}
    wrapped = False

    if s.peek().kind == EOF:
        s.error("expected 'theory' or rule/lemma keyword")

    if s.at_ident("theory"):
        s.next()
        doc.name = s.expect_ident("theory name").value
        if not s.at_ident("begin"):
            s.error("expected 'begin' after theory name")
        s.next()
        wrapped = True

    while True:
        t = s.peek()
        if t.kind == EOF:
            if wrapped:
                s.error("expected 'end' before end of input")
            break
        if t.kind != IDENT:
            s.error(f"expected 'theory' or rule/lemma keyword, found {t.value!r}")
        kw = t.value
        if kw == "end" and wrapped:
            s.next()
            break
        if kw in _UNSUPPORTED:
            raise ParseError(f"unsupported construct '{kw}'", t.span)
        if kw == "functions":
            s.next()
            s.expect_punct(":", "':' after functions")
            while True:
                name = s.expect_ident("function symbol")
                s.expect_punct("/", "'/' before arity")
                arity = s.next()
                if arity.kind != NUM:
                    raise ParseError("expected numeric arity", arity.span)
                doc.functions[name.value] = int(arity.value)
                if s.at_punct(","):
                    s.next()
                    continue
                break
        elif kw == "public":
            s.next()
            while True:
                name = s.expect_ident("public name")
                tag = None
                if s.at_punct(":"):
                    s.next()
                    ttok = s.next()
                    if ttok.kind != QCONST:
                        raise ParseError("expected quoted type tag", ttok.span)
                    tag = ttok.value
                publics.append((name.value, tag))
                if s.at_punct(","):
                    s.next()
                    continue
                break
        elif kw == "rule":
            rule, span = _parse_rule(s, arities)
            if doc.rule_named(rule.name) is not None:
                raise ParseError(f"duplicate rule name {rule.name}", span)
            doc.rules.append(rule)
            doc.spans[id(rule)] = span
        elif kw == "restriction":
            lemma, span = parse_lemma_block(s, "restriction")
            if any(r.name == lemma.name for r in doc.restrictions):
                raise ParseError(f"duplicate restriction name {lemma.name}", span)
            doc.restrictions.append(lemma)
            doc.spans[id(lemma)] = span
        elif kw == "lemma":
            lemma, span = parse_lemma_block(s, "lemma")
            if any(l.name == lemma.name for l in doc.lemmas):
                raise ParseError(f"duplicate lemma name {lemma.name}", span)
            doc.lemmas.append(lemma)
            doc.spans[id(lemma)] = span
        else:
            s.error(f"expected 'theory' or rule/lemma keyword, found {kw!r}")

    if s.peek().kind != EOF:
        s.error(f"unexpected trailing input {s.peek().value!r}")
    doc.publics = tuple(publics)
    return doc


def parse_lemma(text: str, filename: str = "<input>") -> fm.LemmaFormula:
    """Parse a single standalone lemma or restriction."""
    s = _Stream(tokenize(text, filename), filename)
    t = s.peek()
    if t.kind != IDENT or t.value not in ("lemma", "restriction"):
        s.error("expected 'lemma' or 'restriction'")
    lemma, _ = parse_lemma_block(s, t.value)
    if s.peek().kind != EOF:
        s.error(f"unexpected trailing input {s.peek().value!r}")
    return lemma
