from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from reducedtopos import interval as iv
from reducedtopos import laws
from reducedtopos.errors import MalformedStep
from reducedtopos.interval import Closed, Empty, Open, StepFunction

LEVELS = [0.0, 0.1, 0.25, 0.3, 0.5, 0.7, 0.75, 0.9, 1.0]
PROBE = sorted(set(LEVELS) | {(a + b) / 2 for a, b in zip(LEVELS, LEVELS[1:])})

downsets = st.one_of(
    st.just(Empty()),
    st.sampled_from(LEVELS).map(Closed),
    st.sampled_from(LEVELS).map(Open),
)


def points(d):
    """Set semantics on a probe grid containing every endpoint and midpoint."""
    return frozenset(x for x in PROBE if d.contains(x))


def test_downset_examples():
    assert iv.meet(Closed(0.3), Open(0.3)) == Open(0.3)
    assert iv.sup(Open(0.7)) == 0.7
    assert iv.sup(Empty()) == 0.0
    assert iv.restrict(Closed(0.9), 0.5) == Closed(0.5)
    assert Open(0) == Empty()


@settings(max_examples=200, deadline=None)
@given(downsets, downsets)
def test_downset_ops_match_set_semantics(a, b):
    assert points(iv.meet(a, b)) == points(a) & points(b)
    assert points(iv.join(a, b)) == points(a) | points(b)
    assert iv.leq(a, b) == (points(a) <= points(b))


@settings(max_examples=100, deadline=None)
@given(downsets, st.sampled_from(LEVELS))
def test_restrict_is_intersection(d, r):
    assert points(iv.restrict(d, r)) == frozenset(x for x in points(d) if x <= r)


def test_j_prob_examples():
    assert iv.j_prob(Open(0.5)) == Closed(0.5)
    assert iv.j_prob(Closed(0.5)) == Closed(0.5)
    assert iv.j_prob(Empty()) == Closed(0)


def test_covering_examples():
    assert iv.covering_J_prob(0.5, Open(0.5))
    assert not iv.covering_J_prob(0.5, Closed(0.4))
    assert iv.covering_J_prob(0, Empty())


def test_omega_prob_examples():
    assert iv.omega_prob_member(0.5, Closed(0.2))
    assert not iv.omega_prob_member(0.5, Open(0.2))
    assert not iv.omega_prob_member(0.5, Empty())
    assert iv.omega_prob_member(0, Closed(0))
    for d in [Empty()] + [f(t) for t in LEVELS for f in (Closed, Open)]:
        for r in LEVELS:
            if iv.leq(d, Closed(r)):
                assert iv.omega_prob_member(r, d) == (iv.j_prob(d) == d)


def test_prob_suite_exhaustive():
    r = laws.prob_suite(LEVELS)
    assert r["pass"], r["violations"]


def test_ell_prime_examples():
    assert all(iv.ell_prime(1).at(r) == Closed(r) for r in LEVELS)
    assert all(iv.ell_prime(0).at(r) == Closed(0) for r in LEVELS)
    half = iv.ell_prime(0.5)
    assert half.at(0.25) == Closed(0.25) and half.at(0.75) == Closed(0.5)
    # naturality and injectivity
    for p in LEVELS:
        f = iv.ell_prime(p)
        for r in LEVELS:
            for s in LEVELS:
                if s <= r:
                    assert iv.restrict(f.at(r), s) == f.at(s)
    assert len({tuple(iv.ell_prime(p).at(r) for r in LEVELS) for p in LEVELS}) == len(LEVELS)


def test_step_function_evaluation():
    f = StepFunction.left_continuous((0, 0.3, 0.5, 0.8), ["a", "b", "c"], "full")
    assert [f(x) for x in (0, 0.1, 0.3, 0.4, 0.5, 0.6, 0.8)] == \
        ["full", "a", "a", "b", "b", "c", "c"]
    assert f.is_left_continuous("full")
    assert f.left_limit(0.5) == "b"
    with pytest.raises(ValueError):
        f(0.9)


def test_step_function_rejects_bad_input():
    with pytest.raises(MalformedStep):
        StepFunction((0.1, 0.5), ("a",), ("a", "a"))
    with pytest.raises(MalformedStep):
        StepFunction((0.0, 0.5, 0.4), ("a", "b"), ("a", "a", "b"))
    with pytest.raises(MalformedStep):
        StepFunction((0.0, 0.5), ("a",), ("a",))


def test_a_prob_examples():
    const = StepFunction((0.0, 1.0), ("x",), ("y", "x"))
    reg = iv.a_prob_step(const, "full")
    assert reg(0) == "full" and reg(0.5) == "x" and reg(1.0) == "x"
    jump = StepFunction((0.0, 0.3, 0.5, 0.8), ("full", "A", "B"), ("full", "full", "B", "B"))
    assert iv.a_prob_step(jump, "full")(0.5) == "A"


step_functions = st.integers(1, 4).flatmap(lambda k: st.tuples(
    st.lists(st.sampled_from([Fraction(n, 20) for n in range(1, 20)]), min_size=k - 1,
             max_size=k - 1, unique=True).map(lambda xs: sorted(float(x) for x in xs)),
    st.lists(st.sampled_from("abc"), min_size=k, max_size=k),
    st.lists(st.sampled_from("abc"), min_size=k + 1, max_size=k + 1),
))


@settings(max_examples=100, deadline=None)
@given(step_functions)
def test_a_prob_idempotent_and_left_continuous(data):
    inner, pieces, pts = data
    breaks = (0.0,) + tuple(inner) + (1.0,)
    f = StepFunction(breaks, tuple(pieces), tuple(pts))
    g = iv.a_prob_step(f, "full")
    assert iv.a_prob_step(g, "full") == g
    assert g.is_left_continuous("full")
    for x in g.sample_levels():
        if x > 0:
            assert g(x) == f.left_limit(x)
    n = f.normalized()
    assert all(n(x) == f(x) for x in f.sample_levels())


def test_truncate():
    f = StepFunction.left_continuous((0, 0.3, 0.5, 0.8), ["a", "b", "c"], "full")
    t = f.truncate(0.4)
    assert t.end == 0.4 and t(0.4) == "b" and t(0.2) == "a"
    assert f.truncate(0.5).breaks == (0.0, 0.3, 0.5)
