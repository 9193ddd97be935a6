"""Measures on the spectral presheaf and sheaf, Born probabilities and factorisations."""
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from . import operators as ops
from . import tolerance
from .errors import NaturalityViolation, NotGlobalElement
from .semantics import (
    ClopenSub,
    TruthObject,
    daseinize,
    daseinize_j,
    enumerate_clopen,
    truth_object_rho_r,
)
from .sheaves import Sieve, in_omega_j


@dataclass(frozen=True)
class OrderReversingSection:
    """A [0,1]-valued function on a set of contexts that grows towards the bottom."""

    poset: object = field(compare=False, repr=False)
    values: tuple  # sorted (context id, value) pairs

    @classmethod
    def of(cls, poset, values):
        return cls(poset, tuple(sorted((int(v), float(x)) for v, x in values.items())))

    def __getitem__(self, v):
        return dict(self.values)[v]

    def as_dict(self):
        return dict(self.values)

    @property
    def domain(self):
        return tuple(v for v, _ in self.values)

    def order_violations(self):
        d = self.as_dict()
        e = tolerance.eps()
        return [
            (w, v) for v in d for w in self.poset.down(v)
            if w in d and d[w] < d[v] - e
        ]

    def flat_violations(self, sel):
        d = self.as_dict()
        e = tolerance.eps()
        return [v for v in d if sel(v) in d and abs(d[v] - d[sel(v)]) > e]

    def restrict(self, domain):
        d = self.as_dict()
        return OrderReversingSection.of(self.poset, {v: d[v] for v in domain})

    def close_to(self, other):
        a, b = self.as_dict(), other.as_dict()
        return a.keys() == b.keys() and all(abs(a[v] - b[v]) <= tolerance.eps() for v in a)


@dataclass(frozen=True)
class Measure:
    """Evaluator-backed measure. ``local`` says whether the value at V depends on S(V) only."""

    kind: str
    evaluator: object
    sel: object = None
    rho: object = None
    local: bool = True

    def __call__(self, s):
        return self.evaluator(s)


def measure_from_state(rho, kind="presheaf", sel=None):
    """The state's measure: S |-> (V |-> tr(rho P_S(V)))."""
    if kind not in ("presheaf", "j_sheaf"):
        raise ValueError(f"unknown measure kind {kind!r}")

    def ev(s):
        return OrderReversingSection.of(
            s.poset, {v: ops.trace_pairing(rho, s.projection(v)) for v in s.domain})

    return Measure(kind, ev, sel, rho)


def validate_measure(mu, samples, max_pairs=4096, seed=0):
    """Report on normalisation, modularity, order reversal, locality and flat constancy.

    Pairwise laws run over every pair when there are at most ``max_pairs`` of
    them and over a seeded random sample of that size otherwise.
    """
    samples = list(samples)
    e = tolerance.eps()
    report = {"normalization": [], "modularity": [], "order": [], "locality": [], "flat": []}
    if not samples:
        return report
    cache = {}

    def value(s):
        if s not in cache:
            cache[s] = mu(s)
        return cache[s]

    first = samples[0]
    top = ClopenSub.top(first.poset, first.sel, first.domain)
    for v, x in value(top).values:
        if abs(x - 1) > e:
            report["normalization"].append((v, x))
    for s in samples:
        report["order"].extend((s, bad) for bad in value(s).order_violations())
        if mu.kind == "j_sheaf" and mu.sel is not None:
            report["flat"].extend((s, bad) for bad in value(s).flat_violations(mu.sel))
    n = len(samples)
    if n * (n - 1) // 2 <= max_pairs:
        pairs = combinations(samples, 2)
    else:
        rng = np.random.default_rng(seed)
        idx = rng.integers(0, n, size=(max_pairs, 2))
        pairs = ((samples[i], samples[k]) for i, k in idx if i != k)
    for s, t in pairs:
        a, b = value(s).as_dict(), value(t).as_dict()
        j, m = value(s.join(t)).as_dict(), value(s.meet(t)).as_dict()
        for v in a:
            if abs(j[v] + m[v] - a[v] - b[v]) > 4 * e:
                report["modularity"].append((s, t, v))
        if mu.local:
            for v in a:
                if s[v] == t[v] and abs(a[v] - b[v]) > e:
                    report["locality"].append((s, t, v))
    return report


def measure_is_valid(report):
    return not any(report.values())


def born_probability_presheaf(a, delta, rho, poset):
    e = ops.spectral_projection(a, delta)
    return min(ops.trace_pairing(rho, daseinize(e, c)) for c in poset.contexts)


def is_flat_selected(e, sel):
    """A projection is selected when it lies in the lattice of some fixpoint context."""
    return any(sel.poset.contexts[f].contains_projection(e) for f in sel.fixpoints)


def born_probability_j(a, delta, rho, sel):
    """Minimum over contexts of the sheaf daseinisation's trace, with an exactness flag."""
    e = ops.spectral_projection(a, delta)
    p = daseinize_j(e, sel)
    value = min(ops.trace_pairing(rho, p.projection(v)) for v in sel.poset)
    return value, is_flat_selected(e, sel)


def gamma_to_h(gamma, sel):
    """Global element of [0,1]_j (one section per context) to a function on fixpoints."""
    return {f: gamma[f][f] for f in sel.fixpoints}


def h_to_gamma(h, sel):
    p = sel.poset
    return {
        v: OrderReversingSection.of(p, {w: h[sel(w)] for w in p.down(v)}) for v in p
    }


def h_violations(h, sel):
    """Order reversal of a function on fixpoints."""
    e = tolerance.eps()
    p = sel.poset
    return [(g, f) for f in h for g in h if p.leq(g, f) and h[g] < h[f] - e]


def internalize_measure(mu):
    """The morphism S |-> mu(S) componentwise: component at V acts on clopens of down(V)."""

    def component(v, s):
        return mu(s.restrict_to(v))

    return component


def naturality_violations(mu, samples):
    comp = internalize_measure(mu)
    out = []
    p = None
    for s in samples:
        p = s.poset
        for v in s.domain:
            whole = comp(v, s)
            for w in p.down(v):
                if not whole.restrict(p.down(w)).close_to(comp(w, s.restrict_to(w))):
                    out.append((s, v, w))
    return out


def check_internalization(mu, samples):
    bad = naturality_violations(mu, samples)
    if bad:
        raise NaturalityViolation(f"{len(bad)} naturality squares fail")
    return True


def threshold_morphism(r):
    """h |-> sieve of contexts where h >= r."""
    e = tolerance.eps()

    def lam(v, section, sel=None):
        poset = section.poset
        d = section.as_dict()
        s = Sieve(v, {w for w in poset.down(v) if d[w] >= r - e}, poset)
        if sel is not None and not in_omega_j(s, sel):
            raise NotGlobalElement("threshold sieve is not closed")
        return s

    return lam


def canonical_truth_object(mu):
    """Membership: the measure is 1 at the selected subcontext of every V' <= V."""
    e = tolerance.eps()
    sel = mu.sel

    def pred(v, s):
        d = mu(s.restrict_to(v)).as_dict()
        return all(d[sel(w) if sel is not None else w] >= 1 - e for w in s.poset.down(v))

    return TruthObject("canonical_mu", pred)


def characteristic_sieve(truth, v, s):
    """Characteristic map of a truth object at V applied to a clopen S on down(V)."""
    p = s.poset
    return Sieve(v, {w for w in p.down(v) if truth.contains(w, s.restrict_to(w))}, p)


def check_factorizations(rho, r, mu, sel, lam=None, lam_canonical=None):
    """Compare characteristic maps of the two truth objects with threshold-after-measure.

    Both factorisations are checked on every enumerable sheaf clopen of every
    down-set; equality is exact sieve equality.
    """
    poset = sel.poset
    lam_r = lam or threshold_morphism(r)
    lam_1 = lam_canonical or threshold_morphism(1.0)
    comp = internalize_measure(mu)
    triangles = {
        "rho_r": (truth_object_rho_r(rho, r), lam_r),
        "canonical": (canonical_truth_object(mu), lam_1),
    }
    report = {}
    for name, (truth, lam_f) in triangles.items():
        mismatches = []
        checked = 0
        for v in poset:
            for s in enumerate_clopen(poset, poset.down(v), sel):
                checked += 1
                lhs = characteristic_sieve(truth, v, s)
                rhs = lam_f(v, comp(v, s))
                if lhs != rhs:
                    mismatches.append(
                        {"context": poset.label(v), "clopen": s.table(),
                         "truth": lhs.labels(), "threshold": rhs.labels()})
        report[name] = {"checked": checked, "mismatches": mismatches}
    report["pass"] = all(not t["mismatches"] for t in report.values())
    return report


def lift_measure_max(mu_j):
    """Presheaf measure that reads the sheaf measure at the selected subcontext."""
    sel = mu_j.sel

    def ev(s):
        d = mu_j(s.pullback(sel)).as_dict()
        return OrderReversingSection.of(s.poset, {v: d[sel(v)] for v in s.domain})

    return Measure("presheaf", ev, sel, mu_j.rho, local=False)


def fit_density_matrix(pairs, dim):
    """Diagnostic only: least-squares state reproducing (projection, value) pairs.

    The fit is projected back onto density matrices by clipping eigenvalues.
    Nothing in the package relies on its uniqueness.
    """
    basis = []
    for i in range(dim):
        for k in range(dim):
            b = np.zeros((dim, dim), dtype=complex)
            if i == k:
                b[i, i] = 1
            elif i < k:
                b[i, k] = b[k, i] = 1
            else:
                b[i, k], b[k, i] = 1j, -1j
            basis.append(b)
    rows = [[np.trace(b @ ops.as_matrix(p)).real for b in basis] for p, _ in pairs]
    rows.append([np.trace(b).real for b in basis])
    rhs = [float(x) for _, x in pairs] + [1.0]
    coef, *_ = np.linalg.lstsq(np.array(rows), np.array(rhs), rcond=None)
    m = sum(c * b for c, b in zip(coef, basis))
    m = (m + m.conj().T) / 2
    w, v = np.linalg.eigh(m)
    w = np.clip(w, 0, None)
    if w.sum() == 0:
        return ops.DensityMatrix.maximally_mixed(dim)
    m = (v * (w / w.sum())) @ v.conj().T
    return ops.DensityMatrix(m)
