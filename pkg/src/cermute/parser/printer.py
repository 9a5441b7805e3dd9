"""Canonical pretty-printer.

Emits LF line endings, two-space indent, one fact per line inside
brackets. print(parse(print(parse(text)))) == print(parse(text)) for
every document the parsers accept.
"""

from __future__ import annotations

from .. import formulas as fm
from .. import model, terms
from ..rules import RewriteRule, render_fact
from .spthy import TheoryDocument


def _fact_block(facts, open_b: str, close_b: str, indent: str) -> str:
    if not facts:
        return f"{indent}{open_b}{close_b}"
    inner = f",\n{indent}  ".join(render_fact(f) for f in facts)
    return f"{indent}{open_b} {inner} {close_b}"


def print_rule(rule: RewriteRule) -> str:
    lines = [f"rule {rule.name}:"]
    lines.append(_fact_block(rule.premise, "[", "]", "  "))
    if rule.actions:
        lines.append(_fact_block(rule.actions, "--[", "]->", "  "))
    else:
        lines.append("  -->")
    lines.append(_fact_block(rule.conclusion, "[", "]", "  "))
    return "\n".join(lines)


def print_lemma(lemma: fm.LemmaFormula) -> str:
    if lemma.kind == fm.RESTRICTION:
        head = f"restriction {lemma.name}:"
    else:
        head = f"lemma {lemma.name}: {lemma.kind}"
    return f'{head}\n  "{fm.render(lemma.body)}"'


def print_theory(doc: TheoryDocument) -> str:
    parts = []
    if doc.name:
        parts.append(f"theory {doc.name}\nbegin")
    if doc.functions:
        decl = ", ".join(f"{n}/{a}" for n, a in doc.functions.items())
        parts.append(f"functions: {decl}")
    if doc.publics:
        decl = ", ".join(n if t is None else f"{n} : '{t}'" for n, t in doc.publics)
        parts.append(f"public {decl}")
    for rule in doc.rules:
        parts.append(print_rule(rule))
    for res in doc.restrictions:
        parts.append(print_lemma(res))
    for lemma in doc.lemmas:
        parts.append(print_lemma(lemma))
    if doc.name:
        parts.append("end")
    return "\n\n".join(parts) + "\n"


def _print_message(message) -> str:
    return terms.render(message.term())


def _print_annotations(annotations, indent: str) -> str:
    inner = ", ".join(
        f"{name}({', '.join(terms.render(a) for a in args)})" for name, args in annotations
    )
    return f"\n{indent}@ [ {inner} ]"


def print_ceremony(c: model.Ceremony) -> str:
    parts = [f"ceremony {c.name}"]
    if c.signature:
        inner = " ".join(f"{n}/{a};" for n, a in c.signature.items())
        parts.append(f"functions {{ {inner} }}")
    if c.agent_kind:
        inner = " ".join(f"{kind} {role};" for role, kind in c.agent_kind.items())
        parts.append(f"agents {{ {inner} }}")
    if c.channel_replay:
        inner = " ".join(
            f"{ch} {'replay' if rep else 'noreplay'};" for ch, rep in c.channel_replay.items()
        )
        parts.append(f"channels {{ {inner} }}")
    fresh_names = sorted(
        {
            sub[1]
            for script in c.scripts
            for ev in script.events
            for v in ev.message.values
            for sub in terms.subterms(v)
            if sub[0] == terms.FRESH
        }
        | {
            sub[1]
            for _, _, value in c.type_env
            for sub in terms.subterms(value)
            if sub[0] == terms.FRESH
        }
    )
    name_decls = [f"fresh {n};" for n in fresh_names]
    name_decls += [
        f"public {n};" if t is None else f"public {n} : '{t}';" for n, t in c.publics
    ]
    if name_decls:
        parts.append("names { " + " ".join(name_decls) + " }")
    if c.type_env:
        lines = ["types {"]
        for role, tag, value in c.type_env:
            lines.append(f"  {role} : '{tag}' = {terms.render(value)};")
        lines.append("}")
        parts.append("\n".join(lines))
    for script in c.scripts:
        lines = [f"role {script.role} {{"]
        for ev in script.events:
            if ev.action == model.START:
                line = f"  start {_print_message(ev.message)}"
            else:
                arrow = "->" if ev.action == model.SND else "<-"
                line = f"  {ev.action} {ev.channel} {arrow} {ev.peer} : {_print_message(ev.message)}"
            if ev.annotations:
                line += _print_annotations(ev.annotations, "    ")
            lines.append(line + ";")
        lines.append("}")
        parts.append("\n".join(lines))
    return "\n\n".join(parts) + "\n"
