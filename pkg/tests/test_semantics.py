from itertools import product

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from reducedtopos import operators as ops
from reducedtopos.contexts import Selector
from reducedtopos.errors import NotASubpresheaf, NotJSheaf, ResultNotInOmegaJ
from reducedtopos.semantics import (
    EQUAL,
    ClopenSub,
    daseinize,
    daseinize_j,
    daseinize_presheaf,
    discriminate_witness,
    enumerate_clopen,
    explicit_truth_object,
    name_of,
    spectral_presheaf,
    truth_object_rho_r,
    valuate,
    valuate_j,
)
from reducedtopos.sheaves import TruthValue

from conftest import I2, P_X, P_Z, P_ZM, random_states


def lattice(ctx):
    n = len(ctx)
    return [sum((ctx.atoms[i] for i in range(n) if bits[i]), np.zeros((ctx.dim, ctx.dim)))
            for bits in product((0, 1), repeat=n)]


def daseinize_oracle(e, ctx):
    """Smallest projection of the context lattice above e, by exhaustive search."""
    above = [p for p in lattice(ctx) if ops.proj_leq(e, p)]
    return min(above, key=ops.rank)


def trace(rho, p):
    return float(np.real(np.trace(rho.matrix @ p)))


def test_spectral_presheaf(qubit):
    q = spectral_presheaf(qubit.poset)
    assert len(q[qubit.id("Vz")]) == 2 and len(q[qubit.poset.bottom]) == 1
    assert q.map(qubit.id("Vz"), qubit.poset.bottom) == {0: 0, 1: 0}
    assert q.functoriality_violations() == []


def test_daseinize_examples(qubit):
    p = qubit.poset
    vz, vx = (p.contexts[qubit.id(x)] for x in ("Vz", "Vx"))
    assert np.allclose(daseinize(P_Z, vz), P_Z)
    assert np.allclose(daseinize(P_Z, vx), I2)
    assert np.allclose(daseinize(np.zeros((2, 2)), vz), 0)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000), st.sampled_from(["spin1", "two_qubit"]))
def test_daseinize_matches_exhaustive_search(seed, name):
    import conftest
    fx = {"spin1": conftest.make_spin1, "two_qubit": conftest.make_two_qubit}[name]()
    rng = np.random.default_rng(seed)
    dim = fx.poset.dim
    ctx = fx.poset.contexts[int(rng.integers(len(fx.poset)))]
    if rng.integers(2):
        # a projection already in the context is its own daseinisation
        e = ctx.projection(frozenset(np.flatnonzero(rng.integers(0, 2, size=len(ctx)))))
    else:
        v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
        e = ops.ket_projection(v)
    assert np.allclose(daseinize(e, ctx), daseinize_oracle(e, ctx), atol=1e-8)


def test_daseinize_j_examples(qubit):
    p, sel = qubit.poset, qubit.sel
    ident = Selector.identity(p)
    d = daseinize_j(P_Z, ident)
    for v in p:
        assert np.allclose(d.projection(v), daseinize(P_Z, p.contexts[v]))
    dj = daseinize_j(P_Z, sel)
    assert np.allclose(dj.projection(qubit.id("Vx")), I2)
    assert np.allclose(dj.projection(qubit.id("Vz")), P_Z)
    assert dj.is_j_sheaf()


def test_enumeration_counts_against_brute_force(qubit, spin1):
    for fx in (qubit, spin1):
        p = fx.poset
        q = spectral_presheaf(p)
        subsets = {v: [frozenset(a for a in range(p.n_atoms(v)) if m >> a & 1)
                       for m in range(1 << p.n_atoms(v))] for v in p}
        count = 0
        for choice in product(*(subsets[v] for v in p)):
            sets = dict(zip(p, choice))
            if all(q.restrict(a, v, w) in sets[w] for v in p for w in p.down(v) for a in sets[v]):
                count += 1
        assert len(enumerate_clopen(p)) == count
    assert len(enumerate_clopen(qubit.poset)) == 17
    assert len(enumerate_clopen(qubit.poset, sel=qubit.sel)) == 5


def test_sheaf_clopens_are_pullbacks(qubit, spin1):
    for fx in (qubit, spin1):
        p, sel = fx.poset, fx.sel
        pulled = {c.pullback(sel) for c in enumerate_clopen(p)}
        assert pulled == set(enumerate_clopen(p, sel=sel))


def test_clopen_rejects_non_subpresheaf(qubit):
    p = qubit.poset
    sets = {v: frozenset(range(p.n_atoms(v))) for v in p}
    sets[p.bottom] = frozenset()
    with pytest.raises(NotASubpresheaf):
        ClopenSub(p, sets)


def test_truth_object_examples(qubit):
    p = qubit.poset
    vz = qubit.id("Vz")
    rho0, rhomix = qubit.states["rho0"], qubit.states["rhomix"]
    lattice_vz = enumerate_clopen(p, p.down(vz), qubit.sel)
    assert all(truth_object_rho_r(rho0, 0).contains(vz, s) for s in lattice_vz)
    up = next(s for s in lattice_vz if np.allclose(s.projection(vz), P_Z))
    down = next(s for s in lattice_vz if np.allclose(s.projection(vz), P_ZM))
    t1 = truth_object_rho_r(rho0, 1)
    assert t1.contains(vz, up) and not t1.contains(vz, down)
    half = truth_object_rho_r(rhomix, 0.5)
    assert half.contains(vz, up) and half.contains(vz, down)


def test_name_of_examples(qubit):
    p, sel = qubit.poset, qubit.sel
    vx = qubit.id("Vx")
    top = ClopenSub.top(p, sel)
    assert name_of(top, sel(vx)) == ClopenSub.top(p, sel, p.down(sel(vx)))
    bottom = ClopenSub.bottom(p, sel)
    assert all(not s for s in name_of(bottom, vx).sets.values())
    named = name_of(daseinize_j(P_Z, sel), vx)
    assert named.domain == tuple(sorted(p.down(vx)))
    assert np.allclose(named.projection(vx), I2)
    with pytest.raises(NotJSheaf):
        name_of(daseinize_presheaf(P_Z, p), vx)


def test_valuate_j_examples(qubit):
    p, sel = qubit.poset, qubit.sel
    vz, vx = qubit.id("Vz"), qubit.id("Vx")
    for rho in qubit.states.values():
        nu = valuate_j(ClopenSub.top(p, sel), truth_object_rho_r(rho, 1), sel)
        assert nu == TruthValue.true(p)
    dj = daseinize_j(P_Z, sel)
    nu = valuate_j(dj, truth_object_rho_r(qubit.states["rho0"], 1), sel)
    assert nu[vz].is_top() and nu[vx].is_top()
    nu = valuate_j(dj, truth_object_rho_r(qubit.states["rhox"], 1), sel)
    assert nu[vz].members == {p.bottom}
    assert nu == valuate_j(dj, truth_object_rho_r(qubit.states["rhox"], 1), sel, parallel=True)


@pytest.mark.parametrize("name", ["qubit", "spin1"])
def test_valuate_j_matches_direct_traces(name, request):
    fx = request.getfixturevalue(name)
    p, sel = fx.poset, fx.sel
    states = list(fx.states.values()) + random_states(p.dim, 3, seed=7)
    props = list(fx.props.values()) or [P_X]
    for e in props:
        dj = daseinize_j(e, sel)
        for rho in states:
            for r in (0.0, 0.3, 0.5, 1.0):
                nu = valuate_j(dj, truth_object_rho_r(rho, r), sel)
                for v in p:
                    expect = {w for w in p.down(v)
                              if trace(rho, daseinize(e, p.contexts[sel(w)])) >= r - 1e-9}
                    assert nu[v].members == expect


def test_non_filter_truth_object_rejected(qubit):
    p, sel = qubit.poset, qubit.sel
    dj = daseinize_j(P_Z, sel)
    vx = qubit.id("Vx")
    # membership at Vx only: the resulting family is not down-closed
    bogus = explicit_truth_object({vx: {dj.restrict_to(vx)}})
    with pytest.raises(ResultNotInOmegaJ):
        valuate_j(dj, bogus, sel)
    with pytest.raises(NotJSheaf):
        valuate_j(daseinize_presheaf(P_Z, p), truth_object_rho_r(qubit.states["rho0"], 1), sel)


def test_presheaf_valuation(qubit):
    p = qubit.poset
    d = daseinize_presheaf(P_Z, p)
    nu = valuate(d, truth_object_rho_r(qubit.states["rhox"], 1), p)
    assert nu[qubit.id("Vx")].is_top()
    assert nu[qubit.id("Vz")].members == {p.bottom}
    nu = valuate(daseinize_presheaf(P_X, p), truth_object_rho_r(qubit.states["rhox"], 1), p)
    assert nu == TruthValue.true(p)


def test_discrimination_examples(qubit):
    sel = qubit.sel
    a, b = daseinize_j(P_Z, sel), daseinize_j(P_ZM, sel)
    assert discriminate_witness(a, a) is EQUAL
    w = discriminate_witness(a, b)
    t = truth_object_rho_r(w, 1)
    assert valuate_j(a, t, sel) != valuate_j(b, t, sel)
    assert min(trace(w, P_Z), trace(w, P_ZM)) == pytest.approx(0, abs=1e-12)
