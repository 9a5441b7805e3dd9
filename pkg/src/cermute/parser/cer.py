"""Parser for ceremony (.cer) files: declarations plus role-script blocks.

Role scripts use a small block syntax:

    role G {
      start <<'RK', 'qrcode'>, <RK, bookingqrcode>>;
      snd sec -> RK : <'qrcode', bookingqrcode>;
      rcv sec <- RK : <'verificationlink', vlink>
        @ [ SomeAnnotation(G, vlink) ];
    }

Messages are tag/value pairs: <'tag', value> for a single component,
<<'t1', 't2'>, <v1, v2>> for several. Bare identifiers resolve to fresh
names when declared in the names block, otherwise to public names.
"""

from __future__ import annotations

import difflib

from .. import model, terms
from ..model import Ceremony, Event, RoleScript, TypedMessage
from .errors import ParseError
from .lexer import EOF, FRESHVAR, IDENT, NUM, PUBVAR, PUNCT, QCONST, tokenize
from .spthy import _Stream


def _resolve(term, fresh_names):
    """Rewrite message variables into public/fresh names per declarations."""
    tag = term[0]
    if tag == terms.VAR_MSG:
        return terms.fresh(term[1]) if term[1] in fresh_names else terms.pub(term[1])
    if tag == terms.VAR_FRESH:
        return terms.fresh(term[1])
    if tag == terms.VAR_PUB:
        return terms.pub(term[1])
    if tag == terms.FUNC:
        return terms.fapp(term[1], *(_resolve(a, fresh_names) for a in term[2]))
    if tag == terms.TUPLE:
        return terms.tup(*(_resolve(a, fresh_names) for a in term[1]))
    return term


def _parse_ground_term(s: _Stream, fresh_names):
    from .spthy import _parse_term

    return _resolve(_parse_term(s), fresh_names)


def _typed_message(term, span) -> TypedMessage:
    if term[0] != terms.TUPLE or len(term[1]) != 2:
        raise ParseError("expected a <tag, value> or <<tags>, <values>> payload", span)
    first, second = term[1]
    if first[0] == terms.CONST:
        return TypedMessage((first[1],), (second,))
    if first[0] == terms.TUPLE and second[0] == terms.TUPLE:
        tags = []
        for t in first[1]:
            if t[0] != terms.CONST:
                raise ParseError("payload tags must be quoted constants", span)
            tags.append(t[1])
        if len(first[1]) != len(second[1]):
            raise ParseError(
                f"payload tag/value arity mismatch: {len(first[1])} tags, "
                f"{len(second[1])} values",
                span,
            )
        return TypedMessage(tuple(tags), tuple(second[1]))
    raise ParseError("expected a <tag, value> or <<tags>, <values>> payload", span)


def _channel_keyword(s: _Stream) -> str:
    tok = s.expect_ident("channel keyword")
    if tok.value not in model.CHANNEL_TYPES:
        close = difflib.get_close_matches(tok.value, model.CHANNEL_TYPES, n=1)
        hint = f"did you mean '{close[0]}'?" if close else None
        raise ParseError(f"unknown channel keyword {tok.value!r}", tok.span, hint)
    return tok.value


def _parse_annotations(s: _Stream, fresh_names):
    s.expect_punct("[", "'[' opening annotation list")
    out = []
    while True:
        name = s.expect_ident("annotation fact name")
        s.expect_punct("(")
        args = []
        if not s.at_punct(")"):
            args.append(_parse_ground_term(s, fresh_names))
            while s.at_punct(","):
                s.next()
                args.append(_parse_ground_term(s, fresh_names))
        s.expect_punct(")")
        out.append((name.value, tuple(args)))
        if s.at_punct(","):
            s.next()
            continue
        break
    s.expect_punct("]", "']' closing annotation list")
    return tuple(out)


def _parse_role(s: _Stream, fresh_names) -> RoleScript:
    s.next()  # 'role'
    role = s.expect_ident("role name").value
    s.expect_punct("{", "'{' opening role block")
    events = []
    while not s.at_punct("}"):
        t = s.peek()
        if t.kind != IDENT or t.value not in ("start", "snd", "rcv"):
            s.error("expected 'start', 'snd' or 'rcv'")
        s.next()
        if t.value == "start":
            payload_span = s.peek().span
            message = _typed_message(_parse_ground_term(s, fresh_names), payload_span)
            annotations = ()
            if s.at_punct("@"):
                s.next()
                annotations = _parse_annotations(s, fresh_names)
            events.append(
                Event(model.START, role, message, annotations=annotations)
            )
        else:
            channel = _channel_keyword(s)
            arrow = "->" if t.value == "snd" else "<-"
            s.expect_punct(arrow, f"'{arrow}' after channel")
            peer = s.expect_ident("peer role").value
            s.expect_punct(":", "':' before payload")
            payload_span = s.peek().span
            message = _typed_message(_parse_ground_term(s, fresh_names), payload_span)
            annotations = ()
            if s.at_punct("@"):
                s.next()
                annotations = _parse_annotations(s, fresh_names)
            action = model.SND if t.value == "snd" else model.RCV
            events.append(
                Event(action, role, message, channel=channel, peer=peer, annotations=annotations)
            )
        s.expect_punct(";", "';' terminating event")
    s.next()  # '}'
    return RoleScript(role, tuple(events))


def parse_ceremony(text: str, filename: str = "<input>") -> Ceremony:
    s = _Stream(tokenize(text, filename), filename)
    if not s.at_ident("ceremony"):
        s.error("expected 'ceremony'")
    s.next()
    name = s.expect_ident("ceremony name").value

    functions = {}
    agent_kind = {}
    channel_replay = {}
    fresh_names = set()
    publics = []
    type_env = []
    scripts = []

    # names must be known before scripts parse, so collect declarations in
    # a first pass over blocks; role blocks are parsed in order of appearance
    while s.peek().kind != EOF:
        t = s.peek()
        if t.kind != IDENT:
            s.error(f"expected declaration block, found {t.value!r}")
        kw = t.value
        if kw == "functions":
            s.next()
            s.expect_punct("{")
            while not s.at_punct("}"):
                fname = s.expect_ident("function symbol")
                s.expect_punct("/")
                arity = s.next()
                if arity.kind != NUM:
                    raise ParseError("expected numeric arity", arity.span)
                functions[fname.value] = int(arity.value)
                s.expect_punct(";")
            s.next()
        elif kw == "agents":
            s.next()
            s.expect_punct("{")
            while not s.at_punct("}"):
                kind = s.expect_ident("'human' or 'technical'")
                if kind.value not in (model.HUMAN, model.TECHNICAL):
                    raise ParseError(
                        f"unknown agent kind {kind.value!r}",
                        kind.span,
                        hint="expected 'human' or 'technical'",
                    )
                role = s.expect_ident("role name")
                agent_kind[role.value] = kind.value
                s.expect_punct(";")
            s.next()
        elif kw == "channels":
            s.next()
            s.expect_punct("{")
            while not s.at_punct("}"):
                channel = _channel_keyword(s)
                mode = s.expect_ident("'replay' or 'noreplay'")
                if mode.value not in ("replay", "noreplay"):
                    raise ParseError(
                        f"unknown channel mode {mode.value!r}",
                        mode.span,
                        hint="expected 'replay' or 'noreplay'",
                    )
                channel_replay[channel] = mode.value == "replay"
                s.expect_punct(";")
            s.next()
        elif kw == "names":
            s.next()
            s.expect_punct("{")
            while not s.at_punct("}"):
                sort = s.expect_ident("'fresh' or 'public'")
                if sort.value == "fresh":
                    fresh_names.add(s.expect_ident("fresh name").value)
                elif sort.value == "public":
                    pname = s.expect_ident("public name").value
                    tag = None
                    if s.at_punct(":"):
                        s.next()
                        ttok = s.next()
                        if ttok.kind != QCONST:
                            raise ParseError("expected quoted type tag", ttok.span)
                        tag = ttok.value
                    publics.append((pname, tag))
                else:
                    raise ParseError(
                        f"unknown name sort {sort.value!r}",
                        sort.span,
                        hint="expected 'fresh' or 'public'",
                    )
                s.expect_punct(";")
            s.next()
        elif kw == "types":
            s.next()
            s.expect_punct("{")
            while not s.at_punct("}"):
                role = s.expect_ident("role name")
                s.expect_punct(":")
                ttok = s.next()
                if ttok.kind != QCONST:
                    raise ParseError("expected quoted type tag", ttok.span)
                s.expect_punct("=")
                value = _parse_ground_term(s, fresh_names)
                type_env.append((role.value, ttok.value, value))
                s.expect_punct(";")
            s.next()
        elif kw == "role":
            scripts.append(_parse_role(s, fresh_names))
        else:
            s.error(f"expected declaration block, found {kw!r}")

    return Ceremony(
        name=name,
        scripts=tuple(scripts),
        agent_kind=agent_kind,
        signature=functions,
        type_env=tuple(type_env),
        channel_replay=channel_replay,
        publics=tuple(publics),
    )


def parse_role_scripts(text: str, filename: str = "<input>") -> tuple:
    """Scripts from a full ceremony document or from bare role blocks.

    Bare fragments have no names block, so every bare identifier resolves
    to a public name; declare fresh names via a ceremony document when
    that matters.
    """
    s = _Stream(tokenize(text, filename), filename)
    if s.at_ident("ceremony"):
        return parse_ceremony(text, filename).scripts
    scripts = []
    while s.peek().kind != EOF:
        if not s.at_ident("role"):
            s.error("expected 'role'")
        scripts.append(_parse_role(s, frozenset()))
    return tuple(scripts)
