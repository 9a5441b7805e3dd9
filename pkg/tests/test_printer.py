"""Round-trip stability of the canonical printer."""

from cermute import corpus
from cermute.parser import parse_ceremony, parse_theory
from cermute.parser.printer import print_ceremony, print_theory


def _roundtrip_theory(text, name):
    first = print_theory(parse_theory(text, name))
    second = print_theory(parse_theory(first, name + "#printed"))
    assert first == second


def test_theory_roundtrip_byte_stable():
    _roundtrip_theory(corpus.read_text(corpus.THEORY_FILE), corpus.THEORY_FILE)


def test_goals_roundtrip_byte_stable():
    _roundtrip_theory(corpus.read_text(corpus.GOALS_FILE), corpus.GOALS_FILE)


def test_ceremony_roundtrip_byte_stable():
    text = corpus.read_text(corpus.CEREMONY_FILE)
    first = print_ceremony(parse_ceremony(text, corpus.CEREMONY_FILE))
    second = print_ceremony(parse_ceremony(first, "printed"))
    assert first == second


def test_reparse_preserves_structure(theory):
    printed = print_theory(theory)
    again = parse_theory(printed)
    assert [r.name for r in again.rules] == [r.name for r in theory.rules]
    for a, b in zip(again.rules, theory.rules):
        assert a.premise == b.premise
        assert a.actions == b.actions
        assert a.conclusion == b.conclusion
    assert [r.name for r in again.restrictions] == [
        r.name for r in theory.restrictions
    ]


def test_reparse_preserves_lemmas(goals):
    from cermute.parser.printer import print_lemma
    from cermute.parser import parse_lemma

    for lemma in goals:
        printed = print_lemma(lemma)
        again = parse_lemma(printed)
        assert again.name == lemma.name
        assert again.kind == lemma.kind
        assert again.body == lemma.body


def test_printer_lf_only(theory):
    printed = print_theory(theory)
    assert "\r" not in printed
    assert printed.endswith("\n")


def test_mutant_theories_roundtrip(catalog):
    from cermute.parser.printer import print_rule

    for mutant in catalog:
        body = "\n\n".join(print_rule(r) for r in mutant.rules) + "\n"
        doc = parse_theory(body, str(mutant.label))
        assert [r.name for r in doc.rules] == [r.name for r in mutant.rules]
        assert print_theory(parse_theory(print_theory(doc))) == print_theory(doc)
