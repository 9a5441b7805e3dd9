"""Mutation operators and catalog generation."""

import json

import pytest

from cermute import terms
from cermute.model import TypedMessage
from cermute.mutations import (
    FRESH_DRAW,
    MutationConfig,
    MutationDescriptor,
    MutationError,
    catalog_json,
    enumerate_mutants,
    human_chain,
    mutate_add,
    mutate_disorder,
    mutate_replace,
    mutate_skip,
    type_environment,
)

EXPECTED_LABELS = [
    "skip-S-M0",
    "skip-S-M1",
    "skip-SR-M0",
    "skip-SR-M1",
    "skip-R-M0",
    "skip-R-M1",
    "skip-RS-M0",
    "skip-RSR-M0",
    "add-M0",
    "replace-M0",
    "replace-M1",
    "disorder-M0",
]


def _human_rules(rules):
    chain = human_chain(rules)
    return [s.rule_name for s in chain.stages]


def test_catalog_covers_reference_rows(catalog):
    assert [str(m.label) for m in catalog] == EXPECTED_LABELS


def test_catalog_serialization_deterministic(theory):
    a = json.dumps(catalog_json(theory.rules, enumerate_mutants(theory)), sort_keys=True)
    b = json.dumps(catalog_json(theory.rules, enumerate_mutants(theory)), sort_keys=True)
    assert a == b


def test_kind_filter(theory):
    only_replace = enumerate_mutants(theory, MutationConfig(kinds=("replace",)))
    assert [str(m.label) for m in only_replace] == ["replace-M0", "replace-M1"]


def test_limits(theory):
    limited = enumerate_mutants(
        theory, MutationConfig(kinds=("skip",), limits={"skip": 3})
    )
    assert len(limited) == 3


def test_no_mutation_sites_for_sendless_human(theory):
    # removing every send leaves nothing to add, replace, or reorder
    base = enumerate_mutants(theory)
    skip_all_sends = next(m for m in base if str(m.label) == "skip-S-M0")
    from cermute.mutations import with_rules

    crippled = with_rules(theory, skip_all_sends.rules)
    crippled_again = mutate_skip(
        crippled, MutationDescriptor("skip", "Guest", (2,))
    )  # drop the remaining send too
    doc = with_rules(theory, crippled_again.rules)
    catalog = enumerate_mutants(
        doc, MutationConfig(kinds=("add", "replace", "disorder"))
    )
    assert catalog == []


def _count_guest_chain_rules(rules):
    n = 0
    for r in rules:
        if r.name.endswith("_match"):
            continue
        for f in r.premise:
            if f[0] == "State" and f[1][0] == terms.pvar("Guest"):
                n += 1
                break
    return n


def test_skip_shrinks_add_grows_replace_disorder_preserve(theory, catalog_by_label):
    base_count = _count_guest_chain_rules(theory.rules)
    assert _count_guest_chain_rules(catalog_by_label["skip-S-M0"].rules) < base_count
    assert _count_guest_chain_rules(catalog_by_label["add-M0"].rules) == base_count + 1
    for label in ("replace-M0", "replace-M1"):
        assert _count_guest_chain_rules(catalog_by_label[label].rules) == base_count
    # the deferred stage adds one rule to the human chain
    assert (
        _count_guest_chain_rules(catalog_by_label["disorder-M0"].rules)
        == base_count + 1
    )


def test_skip_rejects_empty_and_non_contiguous_and_start(theory):
    with pytest.raises(MutationError):
        mutate_skip(theory, MutationDescriptor("skip", "Guest", ()))
    with pytest.raises(MutationError):
        mutate_skip(theory, MutationDescriptor("skip", "Guest", (1, 3)))
    with pytest.raises(MutationError):
        mutate_skip(theory, MutationDescriptor("skip", "Guest", (0,)))


def test_skip_rechains_steps(theory, catalog_by_label):
    rules = {r.name: r for r in catalog_by_label["skip-RS-M0"].rules}
    # the guest script collapses to the first send plus the final receive
    human = _human_rules(catalog_by_label["skip-RS-M0"].rules)
    assert human == ["Guest_1", "Guest_3"]
    final = rules["Guest_3"]
    state = next(f for f in final.premise if f[0] == "State")
    assert state[1][1] == terms.const("2")


def test_add_duplicating_own_send(theory):
    # duplicating the first send verbatim lets it fire twice in one trace
    chain = human_chain(theory.rules)
    stage, part = chain.event_part(1)
    payload = TypedMessage(("qrcode",), (part.values()[0],))
    mutant = mutate_add(
        theory, MutationDescriptor("add", "Guest", (1,), payload=payload)
    )
    added = next(r for r in mutant.rules if r.name == "Guest_1_add")
    assert added.premise == added.conclusion[:1]  # state is read, not consumed


def test_add_rejects_unknown_value(theory):
    payload = TypedMessage(("verificationlink",), (terms.fresh("madeup"),))
    with pytest.raises(MutationError) as exc:
        mutate_add(theory, MutationDescriptor("add", "Guest", (1,), payload=payload))
    assert "knowledge" in str(exc.value)


def test_add_rejects_type_mismatch(theory):
    payload = TypedMessage(("verificationlink",), (terms.const("reservationqrcode"),))
    with pytest.raises(MutationError) as exc:
        mutate_add(theory, MutationDescriptor("add", "Guest", (1,), payload=payload))
    assert "type" in str(exc.value)


def test_replace_rejects_receive_target(theory):
    with pytest.raises(MutationError):
        mutate_replace(
            theory,
            MutationDescriptor(
                "replace", "Guest", (2,), payload=terms.const("reservationqrcode")
            ),
        )


def test_replace_rejects_type_mismatch(theory):
    bad = terms.fresh("somelink")
    with pytest.raises(MutationError):
        mutate_replace(
            theory, MutationDescriptor("replace", "Guest", (1,), payload=bad)
        )


def test_replace_value_with_itself_is_identity(theory):
    chain = human_chain(theory.rules)
    _, part = chain.event_part(1)
    same = part.values()[0]
    mutant = mutate_replace(
        theory, MutationDescriptor("replace", "Guest", (1,), payload=same)
    )
    assert mutant.rules == list(theory.rules)
    assert mutant.matching == ()


def test_replace_strips_certificates_from_rewritten_send(theory, catalog_by_label):
    rules = {r.name: r for r in catalog_by_label["replace-M0"].rules}
    mutated = rules["Guest_1"]
    names = [f[0] for f in mutated.actions]
    assert names == ["H"]  # the deviated send certifies nothing


def test_replace_fresh_draw_adds_freshness_premise(theory, catalog_by_label):
    rules = {r.name: r for r in catalog_by_label["replace-M1"].rules}
    mutated = rules["Guest_2"]
    assert any(f[0] == "Fr" for f in mutated.premise)
    # the receive side is untouched and keeps its certificate
    assert any(f[0] == "Receive" for f in mutated.actions)
    assert not any(f[0] == "Send" for f in mutated.actions)


def test_matching_variants_are_bare_and_recorded(theory, catalog_by_label):
    for label in ("replace-M0", "replace-M1", "disorder-M0"):
        mutant = catalog_by_label[label]
        variants = [r for r in mutant.rules if r.name.endswith("_match")]
        assert variants, label
        for v in variants:
            assert v.actions == ()
        (edit,) = mutant.matching
        assert edit.affected_role == "RK"
        assert {name for name, _ in edit.rule_edits} == {"RK_1", "RK_2"}


def test_replace_decorrelates_partner_state_link(theory, catalog_by_label):
    rules = {r.name: r for r in catalog_by_label["replace-M1"].rules}
    twin = rules["RK_2_match"]
    recv = next(f for f in twin.premise if f[0] == "RcvS")
    values = terms.tuple_items(recv[1][3])
    assert values[2] == terms.fvar("vlink_any")
    state = next(f for f in twin.premise if f[0] == "State")
    assert terms.fvar("vlink") in state[1][2][1]  # state correlation kept


def test_base_model_preserved_outside_recorded_edits(theory, catalog):
    base = {r.name: r for r in theory.rules}
    for mutant in catalog:
        edited = {
            name
            for m in mutant.matching
            for name, _ in m.rule_edits
        }
        for rule in mutant.rules:
            if rule.name.startswith("Guest") or rule.name.endswith("_match"):
                continue
            assert rule == base[rule.name], (str(mutant.label), rule.name)
        for name in edited:
            assert any(r.name == name + "_match" for r in mutant.rules)


def test_disorder_rejects_bad_targets(theory):
    with pytest.raises(MutationError):
        mutate_disorder(theory, MutationDescriptor("disorder", "Guest", (3,), payload=3))
    with pytest.raises(MutationError):
        mutate_disorder(theory, MutationDescriptor("disorder", "Guest", (2,), payload=1))
    with pytest.raises(MutationError):
        # the duplicated send must come earlier
        mutate_disorder(theory, MutationDescriptor("disorder", "Guest", (1,), payload=3))


def test_mutation_type_safety(theory, catalog):
    """Every substituted or added value carries the type of its slot."""
    env = type_environment(theory)
    publics = dict(theory.publics)
    from cermute.mutations.apply import infer_slot_type
    from cermute.mutations.binding import SEND_FACT

    for mutant in catalog:
        for rule in mutant.rules:
            for f in rule.conclusion:
                if f[0] != SEND_FACT:
                    continue
                tags = terms.tuple_items(f[1][2])
                values = terms.tuple_items(f[1][3])
                for tag, value in zip(tags, values):
                    if tag[0] != terms.CONST:
                        continue
                    inferred = infer_slot_type(value, env, theory.publics)
                    if inferred is not None:
                        assert inferred == tag[1], (str(mutant.label), rule.name)


def test_unreachable_marking_on_dead_skip(catalog_by_label):
    dead = catalog_by_label["skip-S-M0"]
    assert "RK_1" in dead.unreachable
    assert "Guest_3" in dead.unreachable


def test_descriptors_address_events_not_rules(catalog_by_label):
    # the same descriptor indices match the ceremony's script positions
    assert catalog_by_label["skip-S-M0"].descriptor.target_events == (1,)
    assert catalog_by_label["skip-RSR-M0"].descriptor.target_events == (2, 3, 4)
    assert catalog_by_label["disorder-M0"].descriptor.target_events == (3,)
    assert catalog_by_label["disorder-M0"].descriptor.payload == 1
