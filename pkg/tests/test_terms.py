import hypothesis.strategies as st
from hypothesis import given

from cermute import terms

names = st.sampled_from(["a", "b", "qrcode", "vlink", "x1"])
ground = st.deferred(
    lambda: st.one_of(
        names.map(terms.const),
        names.map(terms.pub),
        names.map(terms.fresh),
        st.tuples(names, st.lists(ground, min_size=0, max_size=3)).map(
            lambda p: terms.fapp(p[0], *p[1])
        ),
        st.lists(ground, min_size=1, max_size=3).map(lambda xs: terms.tup(*xs)),
    )
)


def test_constants_distinct_from_names():
    assert terms.const("qrcode") != terms.pub("qrcode")
    assert terms.const("qrcode") != terms.fresh("qrcode")


@given(ground)
def test_equality_is_structural(t):
    rebuilt = eval(repr(t))  # tuples round-trip through repr
    assert rebuilt == t
    assert terms.order_key(rebuilt) == terms.order_key(t)


@given(ground, ground)
def test_order_key_total(a, b):
    ka, kb = terms.order_key(a), terms.order_key(b)
    assert (a == b) == (ka == kb)
    assert ka < kb or kb < ka or ka == kb


@given(ground)
def test_ground_terms_have_no_variables(t):
    assert terms.is_ground(t)
    assert list(terms.variables(t)) == []


@given(ground)
def test_variable_patterns_match_by_sort(t):
    assert terms.match(terms.mvar("x"), t, {}) == {terms.mvar("x"): t}
    pub_ok = t[0] in (terms.CONST, terms.PUB)
    assert (terms.match(terms.pvar("x"), t, {}) is not None) == pub_ok
    fresh_ok = t[0] == terms.FRESH
    assert (terms.match(terms.fvar("x"), t, {}) is not None) == fresh_ok


def test_match_binds_consistently():
    pattern = terms.tup(terms.mvar("x"), terms.mvar("x"))
    assert terms.match(pattern, terms.tup(terms.pub("a"), terms.pub("a")), {})
    assert terms.match(pattern, terms.tup(terms.pub("a"), terms.pub("b")), {}) is None


def test_match_function_application():
    pattern = terms.fapp("location", terms.pvar("b"))
    g = terms.fapp("location", terms.const("bookingqrcode"))
    binding = terms.match(pattern, g, {})
    assert binding[terms.pvar("b")] == terms.const("bookingqrcode")
    assert terms.match(pattern, terms.fapp("time", terms.const("x")), {}) is None


def test_substitute_replaces_throughout():
    pattern = terms.fapp("location", terms.pvar("b"))
    out = terms.substitute(pattern, {terms.pvar("b"): terms.pub("z")})
    assert out == terms.fapp("location", terms.pub("z"))


@given(ground)
def test_render_is_injective_enough(t):
    # rendering distinguishes the sampled universe
    others = [terms.const("a"), terms.pub("a"), terms.fresh("a")]
    for o in others:
        if o != t:
            assert terms.render(o) != terms.render(t) or o == t


def test_tuple_nonempty():
    import pytest

    with pytest.raises(ValueError):
        terms.tup()
