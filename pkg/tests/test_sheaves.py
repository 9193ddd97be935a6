from itertools import product

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from reducedtopos import laws, tolerance
from reducedtopos.contexts import Selector
from reducedtopos.errors import EnumerationTooLarge, NotASieve, NotGlobalElement
from reducedtopos.semantics import spectral_presheaf
from reducedtopos.sheaves import (
    Sieve,
    TruthValue,
    closure,
    covering_J,
    enumerate_sieves,
    global_truth_values,
    in_omega_j,
    is_j_sheaf,
    lt_topology_j,
    omega_j,
    pullback_selector,
    r_factor,
    unit_zeta,
)


def ids(fx, *labels):
    return {fx.id(x) for x in labels}


def test_sieve_examples(qubit):
    p, vz = qubit.poset, qubit.id("Vz")
    for s in enumerate_sieves(p, vz):
        assert Sieve.top(p, vz).meet(s) == s
        assert Sieve.empty(p, vz).implies(s).is_top()
    s = Sieve(vz, ids(qubit, "V_I", "Vz"), p)
    assert s.restrict(p.bottom).members == {p.bottom}


def test_sieve_must_be_down_closed(qubit):
    with pytest.raises(NotASieve):
        Sieve(qubit.id("Vz"), ids(qubit, "Vz"), qubit.poset)


@settings(max_examples=30, deadline=None)
@given(st.sampled_from(["qubit", "spin1", "two_qubit"]), st.data())
def test_heyting_laws(name, data):
    import conftest
    fx = {"qubit": conftest.make_qubit, "spin1": conftest.make_spin1,
          "two_qubit": conftest.make_two_qubit}[name]()
    p = fx.poset
    v = data.draw(st.sampled_from(list(p)))
    sieves = enumerate_sieves(p, v)
    a, b, c = (data.draw(st.sampled_from(sieves)) for _ in range(3))
    # a /\ b <= c  iff  a <= (b => c)
    assert (a.meet(b).members <= c.members) == (a.members <= b.implies(c).members)
    assert a.meet(b.join(c)) == a.meet(b).join(a.meet(c))
    assert a.join(a.meet(b)) == a


def test_covering_examples(qubit):
    p, sel = qubit.poset, qubit.sel
    vz, vx = qubit.id("Vz"), qubit.id("Vx")
    for v in p:
        assert covering_J(Sieve.top(p, v), sel)
        assert not covering_J(Sieve.empty(p, v), sel)
    assert covering_J(Sieve(vx, {p.bottom}, p), sel)
    assert not covering_J(Sieve(vz, {p.bottom}, p), sel)


def test_lt_topology_examples(qubit):
    p, sel = qubit.poset, qubit.sel
    vx = qubit.id("Vx")
    assert lt_topology_j(Sieve.top(p, vx), sel).is_top()
    assert lt_topology_j(Sieve(vx, {p.bottom}, p), sel).members == ids(qubit, "V_I", "Vx")


@pytest.mark.parametrize("name", ["qubit", "spin1", "two_qubit"])
def test_topology_suites(name, request):
    fx = request.getfixturevalue(name)
    for suite in (laws.grothendieck_suite, laws.lt_suite):
        r = suite(fx.sel)
        assert r["pass"], r["violations"]


def test_topology_suites_identity_and_bottom(two_qubit):
    for sel in (Selector.identity(two_qubit.poset), Selector.constant_bottom(two_qubit.poset)):
        assert laws.grothendieck_suite(sel)["pass"]
        assert laws.lt_suite(sel)["pass"]


def test_omega_j_examples(qubit):
    p, sel = qubit.poset, qubit.sel
    vx = qubit.id("Vx")
    assert len(omega_j(p, vx, Selector.identity(p))) == len(enumerate_sieves(p, vx))
    assert not in_omega_j(Sieve(vx, {p.bottom}, p), sel)
    for v in p:
        assert in_omega_j(Sieve.top(p, v), sel)
    # the equalizer description: closed sieves are the fixpoints of j
    for v in p:
        for s in enumerate_sieves(p, v):
            assert in_omega_j(s, sel) == (lt_topology_j(s, sel) == s)


def test_closure_examples(qubit):
    p, sel = qubit.poset, qubit.sel
    q = spectral_presheaf(p)
    full = {v: frozenset(q[v]) for v in p}
    assert closure(full, q, sel) == full
    empty = {v: frozenset() for v in p}
    assert closure(empty, q, Selector.identity(p)) == empty
    vx = qubit.id("Vx")
    sub = {v: frozenset() for v in p}
    sub[p.bottom] = frozenset(q[p.bottom])
    assert closure(sub, q, sel)[vx] == frozenset(q[vx])


@pytest.mark.parametrize("name", ["qubit", "spin1"])
def test_closure_suite(name, request):
    fx = request.getfixturevalue(name)
    r = laws.closure_suite(fx.sel)
    assert r["pass"], r["violations"]


def test_pullback_examples(qubit):
    p, sel = qubit.poset, qubit.sel
    q = spectral_presheaf(p)
    same = pullback_selector(q, Selector.identity(p))
    assert same.values == q.values
    flat = pullback_selector(q, sel)
    assert len(flat[qubit.id("Vx")]) == 1
    again = pullback_selector(flat, sel)
    assert again.values == flat.values


def test_unit_examples(qubit):
    p, sel = qubit.poset, qubit.sel
    q = spectral_presheaf(p)
    ident = unit_zeta(q, Selector.identity(p))
    assert all(m == {x: x for x in q[v]} for v, m in ident.items())
    zeta = unit_zeta(q, sel)
    vx = qubit.id("Vx")
    assert len(zeta[vx]) == 2 and len(set(zeta[vx].values())) == 1
    assert not is_j_sheaf(q, sel)
    assert is_j_sheaf(pullback_selector(q, sel), sel)
    assert is_j_sheaf(q, Selector.identity(p))


def _sheaf_by_matching_families(q, sel):
    """Every matching family on every covering sieve has exactly one amalgamation."""
    p = q.poset
    for v in q.domain:
        for s in enumerate_sieves(p, v):
            if not covering_J(s, sel):
                continue
            members = sorted(s.members)
            for choice in product(*(q[w] for w in members)):
                fam = dict(zip(members, choice))
                if any(q.restrict(fam[w], w, u) != fam[u]
                       for w in members for u in members if p.leq(u, w)):
                    continue
                amalg = [x for x in q[v] if all(q.restrict(x, v, w) == fam[w] for w in members)]
                if len(amalg) != 1:
                    return False
    return True


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000), st.sampled_from(["qubit", "spin1", "two_qubit"]))
def test_sheaf_check_agrees_with_matching_families(seed, name):
    import conftest
    fx = {"qubit": conftest.make_qubit, "spin1": conftest.make_spin1,
          "two_qubit": conftest.make_two_qubit}[name]()
    q = laws.random_presheaf(fx.poset, np.random.default_rng(seed), max_size=2)
    assert is_j_sheaf(q, fx.sel) == _sheaf_by_matching_families(q, fx.sel)
    fq = pullback_selector(q, fx.sel)
    assert is_j_sheaf(fq, fx.sel) and _sheaf_by_matching_families(fq, fx.sel)


def test_r_factor_examples(qubit):
    p, sel = qubit.poset, qubit.sel
    true = TruthValue.true(p)
    assert r_factor(true, sel) == true
    false = TruthValue.false(p)
    assert r_factor(false, sel) == false
    vx = qubit.id("Vx")
    nu = TruthValue.from_downset(p, {p.bottom})
    assert r_factor(nu, sel)[vx].members == ids(qubit, "V_I", "Vx")


def test_r_factor_rejects_unnatural(qubit):
    p = qubit.poset
    comps = {v: Sieve.top(p, v) for v in p}
    comps[p.bottom] = Sieve.empty(p, p.bottom)
    with pytest.raises(NotGlobalElement):
        r_factor(TruthValue(p, comps), qubit.sel)


def test_global_truth_values_are_downsets(qubit):
    values = global_truth_values(qubit.poset)
    assert len(values) == 5  # down-sets of a V shape with a bottom
    assert all(v.is_natural() for v in values)


def test_enumeration_guard(two_qubit):
    with tolerance.settings(max_enum=2):
        with pytest.raises(EnumerationTooLarge):
            enumerate_sieves(two_qubit.poset, two_qubit.id("V_ZZfull"))
