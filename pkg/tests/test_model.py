import pytest

from cermute import model, terms
from cermute.model import (
    Ceremony,
    Event,
    RoleScript,
    TypedMessage,
    build_threat_chart,
    infer_type,
    validate_ceremony,
)


def test_bundled_ceremony_is_valid(ceremony):
    assert validate_ceremony(ceremony) == []


def test_validation_is_idempotent(ceremony):
    assert validate_ceremony(ceremony) == []
    assert validate_ceremony(ceremony) == []


def _tiny(events):
    return Ceremony(
        name="T",
        scripts=(RoleScript("A", tuple(events)),),
        agent_kind={"A": model.HUMAN},
        signature={},
        type_env=(("A", "x", terms.pub("v")),),
    )


def _msg():
    return TypedMessage(("x",), (terms.pub("v"),))


def test_empty_script_reports_missing_start():
    report = validate_ceremony(_tiny([]))
    assert any(v.message == "missing Start" for v in report)


def test_duplicate_start_reports_index():
    events = [
        Event(model.START, "A", _msg()),
        Event(model.SND, "A", _msg(), channel="sec", peer="B"),
        Event(model.START, "A", _msg()),
    ]
    report = validate_ceremony(_tiny(events))
    assert any(v.message == "duplicate Start at index 2" for v in report)


def test_self_peer_rejected():
    events = [
        Event(model.START, "A", _msg()),
        Event(model.SND, "A", _msg(), channel="sec", peer="A"),
    ]
    report = validate_ceremony(_tiny(events))
    assert any("peer" in v.message for v in report)


def test_infer_type_examples(ceremony):
    env = ceremony.type_env
    assert infer_type(terms.pub("bookingqrcode"), env, "G") == "qrcode"
    assert (
        infer_type(terms.fapp("location", terms.pub("bookingqrcode")), env, "G")
        == "vdata_location"
    )
    # the application pattern types any argument under the same symbol
    assert (
        infer_type(terms.fapp("location", terms.pub("reservationqrcode")), env, "G")
        == "vdata_location"
    )
    assert infer_type(terms.pub("z"), env, "G") is model.UNTYPED


def test_infer_type_ambiguity_names_both_tags():
    env = (("A", "t1", terms.pub("v")), ("A", "t2", terms.pub("v")))
    with pytest.raises(model.AmbiguousTypeError) as exc:
        infer_type(terms.pub("v"), env, "A")
    assert "t1" in str(exc.value) and "t2" in str(exc.value)


def test_start_knowledge_tags_within_type_env(ceremony):
    env_tags = {(r, t) for r, t, _ in ceremony.type_env}
    for script in ceremony.scripts:
        start = script.events[0]
        for tag in start.message.tags:
            assert (script.role, tag) in env_tags


# --- threat chart -------------------------------------------------------


def test_threat_chart_reference_rows(ceremony):
    chart = build_threat_chart(ceremony)
    assert chart.width == 2
    assert chart.depth == 4
    assert chart.agents == ("RK", "G")
    assert chart.rows == (
        ("normal", "normal"),
        ("bug", "normal"),
        ("normal", "error"),
        ("bug", "error"),
    )


def test_threat_chart_single_technical_agent():
    c = Ceremony(
        name="T",
        scripts=(),
        agent_kind={"S": model.TECHNICAL},
        signature={},
        type_env=(),
    )
    chart = build_threat_chart(c)
    assert chart.width == 1
    assert chart.depth == 2


def test_threat_chart_three_agents():
    c = Ceremony(
        name="T",
        scripts=(),
        agent_kind={"H1": model.HUMAN, "H2": model.HUMAN, "S": model.TECHNICAL},
        signature={},
        type_env=(),
    )
    chart = build_threat_chart(c)
    assert chart.width == 3
    assert chart.depth == 8
    assert len(set(chart.rows)) == 8


def test_depth_is_two_to_the_width(ceremony):
    chart = build_threat_chart(ceremony)
    assert chart.depth == 2**chart.width
