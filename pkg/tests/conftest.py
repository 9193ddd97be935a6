from itertools import product

import numpy as np
import pytest

from reducedtopos import operators as ops
from reducedtopos.contexts import Selector, build_poset, selector_from_operators
from reducedtopos.semantics import enumerate_clopen

SZ = np.diag([1.0, -1.0]).astype(complex)
SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]])
I2 = np.eye(2, dtype=complex)

P_Z = np.diag([1.0, 0.0]).astype(complex)
P_ZM = np.diag([0.0, 1.0]).astype(complex)
P_X = 0.5 * np.array([[1, 1], [1, 1]], dtype=complex)

_S2 = np.sqrt(2.0)
SPIN_X = np.array([[0, 1, 0], [1, 0, 1], [0, 1, 0]], dtype=complex) / _S2
SPIN_Y = np.array([[0, -1j, 0], [1j, 0, -1j], [0, 1j, 0]]) / _S2
SPIN_Z = np.diag([1.0, 0.0, -1.0]).astype(complex)

ZI = np.kron(SZ, I2)
IZ = np.kron(I2, SZ)
ZZ = np.kron(SZ, SZ)
XX = np.kron(SX, SX)


class Fixture:
    def __init__(self, poset, sel, states, props):
        self.poset = poset
        self.sel = sel
        self.states = states
        self.props = props

    def id(self, label):
        return self.poset.id_of(label)


def random_states(dim, n, seed):
    rng = np.random.default_rng(seed)
    return [ops.DensityMatrix.random(dim, rng) for _ in range(n)]


def make_qubit():
    poset = build_poset({"Vz": [SZ], "Vx": [SX]}, [[SZ]])
    sel = selector_from_operators([SZ], poset)
    states = {
        "rho0": ops.DensityMatrix.from_vector([1, 0]),
        "rho1": ops.DensityMatrix.from_vector([0, 1]),
        "rhox": ops.DensityMatrix.from_vector(np.array([1, 1]) / _S2),
        "rhomix": ops.DensityMatrix.maximally_mixed(2),
    }
    props = {"Pz": P_Z, "Pz-": P_ZM, "Px": P_X, "I": I2, "0": np.zeros((2, 2), complex)}
    return Fixture(poset, sel, states, props)


def make_spin1():
    poset = build_poset({"Vx": [SPIN_X], "Vy": [SPIN_Y], "Vz": [SPIN_Z]}, [[SPIN_Z]])
    sel = selector_from_operators([SPIN_Z], poset)
    states = {
        "up": ops.DensityMatrix.from_vector([1, 0, 0]),
        "mix": ops.DensityMatrix.maximally_mixed(3),
    }
    props = {}
    for name, a in (("z", SPIN_Z), ("x", SPIN_X)):
        for m in (1.0, 0.0, -1.0):
            props[f"{name}={m:g}"] = ops.spectral_projection(a, ops.BorelSelection.of(m))
    return Fixture(poset, sel, states, props)


def make_two_qubit():
    """Contexts of Z-type and Bell-type observables on C^4 (six contexts)."""
    poset = build_poset({"V_ZI": [ZI], "V_IZ": [IZ], "V_ZZfull": [ZI, IZ], "V_Bell": [XX, ZZ]})
    states = {"00": ops.DensityMatrix.from_vector([1, 0, 0, 0]),
              "mix": ops.DensityMatrix.maximally_mixed(4)}
    sel = selector_from_operators([ZI, IZ], poset)
    return Fixture(poset, sel, states, {})


@pytest.fixture(scope="session")
def qubit():
    return make_qubit()


@pytest.fixture(scope="session")
def spin1():
    return make_spin1()


@pytest.fixture(scope="session")
def two_qubit():
    return make_two_qubit()


@pytest.fixture(scope="session")
def chain_selector(two_qubit):
    """Non-idempotent selector on the chain V_I < V_ZI < V_ZZfull."""
    p = two_qubit.poset
    mapping = {lab: "V_I" for lab in p.labels}
    mapping["V_ZZfull"] = "V_ZI"
    return Selector.explicit(p, mapping)


def principal_filter_families(p):
    """Every family of principal filters closed under restriction to smaller contexts."""
    lattices = {v: enumerate_clopen(p, p.down(v)) for v in p}
    filters = {v: [frozenset(t for t in lat if g.leq(t)) for g in lat] for v, lat in lattices.items()}
    out = []
    for choice in product(*(filters[v] for v in p)):
        fam = dict(zip(p, choice))
        if all(s.restrict_domain(p.down(w)) in fam[w]
               for v in p for w in p.down(v) for s in fam[v]):
            out.append(fam)
    return out


# criterion number -> (passed, detail), filled by test_acceptance
ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}")
