import pytest

from cermute import formulas as fm
from cermute import model
from cermute.parser import (
    ParseError,
    parse_ceremony,
    parse_lemma,
    parse_role_scripts,
    parse_theory,
)

CHANNEL_SNIPPET = """
rule ChanSndS:
  [ SndS($A, $B, xn, x) ]
  --[ ChanSndS($A, $B, xn, x) ]->
  [ !Sec($A, $B, xn, x) ]

rule ChanRcvS:
  [ !Sec($A, $B, xn, x) ]
  --[ ChanRcvS($A, $B, xn, x) ]->
  [ RcvS($A, $B, xn, x) ]
"""

SETUP_SNIPPET = """
rule Setup:
  [ !Email($bookingqrcode), !Link($RK, ~vlink) ]
  --[ Setup($Guest), Roles($Guest, $RK), RK($Guest, $RK) ]->
  [ State($RK, '1', <~vlink>),
    State($Guest, '1', <$bookingqrcode, location($bookingqrcode), time($bookingqrcode)>) ]
"""


def test_channel_rule_fact_counts():
    doc = parse_theory(CHANNEL_SNIPPET)
    assert [r.name for r in doc.rules] == ["ChanSndS", "ChanRcvS"]
    for rule in doc.rules:
        assert (len(rule.premise), len(rule.actions), len(rule.conclusion)) == (1, 1, 1)


def test_setup_rule_fact_counts():
    doc = parse_theory(SETUP_SNIPPET)
    (rule,) = doc.rules
    assert (len(rule.premise), len(rule.actions), len(rule.conclusion)) == (2, 3, 2)


def test_empty_input_error_message():
    with pytest.raises(ParseError) as exc:
        parse_theory("")
    assert "expected 'theory' or rule/lemma keyword at 1:1" in str(exc.value)


def test_duplicate_rule_name_rejected():
    text = CHANNEL_SNIPPET + CHANNEL_SNIPPET
    with pytest.raises(ParseError) as exc:
        parse_theory(text)
    assert "duplicate rule name" in str(exc.value)


def test_fact_arity_mismatch_rejected():
    text = """
rule A:
  [ F(x) ] --[ L(x) ]-> [ G(x) ]

rule B:
  [ F(x, y) ] --[ L(x) ]-> [ G(x) ]
"""
    with pytest.raises(ParseError) as exc:
        parse_theory(text)
    assert "arity" in str(exc.value)


def test_unsupported_construct_rejected():
    with pytest.raises(ParseError) as exc:
        parse_theory("builtins: diffie-hellman")
    assert "unsupported construct" in str(exc.value)


def test_non_ascii_identifier_rejected():
    with pytest.raises(ParseError) as exc:
        parse_theory("rule Chéck:\n [] --> []")
    assert "ASCII" in str(exc.value)


def test_parse_errors_carry_spans_inside_input():
    text = "rule Broken:\n  [ F(x) ] --[ ]-> oops"
    with pytest.raises(ParseError) as exc:
        parse_theory(text)
    span = exc.value.span
    lines = text.split("\n")
    assert 1 <= span.start_line <= len(lines)
    assert 1 <= span.start_col <= len(lines[span.start_line - 1]) + 1


def test_parse_is_deterministic():
    from cermute.parser.printer import print_theory

    a = print_theory(parse_theory(CHANNEL_SNIPPET))
    b = print_theory(parse_theory(CHANNEL_SNIPPET))
    assert a == b


# --- lemma parsing ------------------------------------------------------


def test_goal_lemma_structure(goals_by_name):
    lemma = goals_by_name["Complete_Verification"]
    assert lemma.kind == fm.ALL_TRACES
    body = lemma.body
    assert isinstance(body, fm.Quantifier) and body.kind == "All"
    assert len(body.variables) == 3
    implication = body.body
    assert isinstance(implication, fm.Implies)
    inner = implication.consequent
    assert isinstance(inner, fm.Quantifier) and inner.kind == "Ex"
    assert len(inner.variables) == 3
    less = [a for a in fm.iter_atoms(body) if isinstance(a, fm.TemporalLess)]
    assert len(less) == 1


def test_functional_lemma_structure(functional):
    assert functional.kind == fm.EXISTS_TRACE
    assert isinstance(functional.body, fm.And)
    first, second = functional.body.items
    assert isinstance(first, fm.Quantifier) and first.kind == "All"
    assert isinstance(second, fm.Quantifier) and second.kind == "Ex"


def test_unbound_variable_rejected():
    with pytest.raises(ParseError) as exc:
        parse_lemma('lemma L: all-traces "All #i. F(x) @ i"')
    assert "unbound variable x" in str(exc.value)


def test_temporal_variable_as_message_rejected():
    with pytest.raises(ParseError) as exc:
        parse_lemma('lemma L: all-traces "All #i #j. F(j) @ i"')
    assert "temporal variable j used as message variable" in str(exc.value)


def test_malformed_at_annotation_rejected():
    with pytest.raises(ParseError) as exc:
        parse_lemma('lemma L: all-traces "All x #i. x @ i"')
    assert "@" in str(exc.value)


def test_restriction_kind():
    lemma = parse_lemma(
        'restriction OnlyOnce: "All #i #j. O() @ #i & O() @ #j ==> #i = #j"'
    )
    assert lemma.kind == fm.RESTRICTION
    assert lemma.name == "OnlyOnce"


# --- role-script parsing ------------------------------------------------


def test_bundled_scripts_event_shapes(ceremony):
    shapes = {
        s.role: tuple(e.action for e in s.events) for s in ceremony.scripts
    }
    assert shapes["G"] == (model.START, model.SND, model.RCV, model.SND, model.RCV)
    assert shapes["RK"] == (model.START, model.RCV, model.SND, model.RCV, model.SND)


def test_bare_role_block_parses():
    scripts = parse_role_scripts(
        "role A { start <'x', v>; snd sec -> B : <'x', v>; }"
    )
    assert len(scripts) == 1
    assert len(scripts[0].events) == 2


def test_unknown_channel_keyword_suggests():
    with pytest.raises(ParseError) as exc:
        parse_role_scripts("role A { start <'x', v>; snd secure -> B : <'x', v>; }")
    assert "secure" in str(exc.value)
    assert "sec" in (exc.value.hint or "")


def test_payload_arity_mismatch_rejected():
    with pytest.raises(ParseError) as exc:
        parse_role_scripts(
            "role A { start <<'x', 'y'>, <v>>; }"
        )
    assert "arity mismatch" in str(exc.value)


def test_ceremony_declarations(ceremony):
    assert ceremony.agent_kind == {"G": model.HUMAN, "RK": model.TECHNICAL}
    assert ceremony.signature == {"location": 1, "time": 1}
    assert ceremony.channel_replay == {"sec": True}
    assert ("reservationqrcode", "qrcode") in ceremony.publics
