"""Spectral presheaf, clopen subobjects, daseinization, truth objects and valuation.

A clopen subobject is stored as a set of atom ids per context. With a selector
attached it is a subobject of flat* Sigma: the atoms at V are atoms of flat(V).
"""
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import operators as ops
from . import tolerance
from .errors import (
    DimMismatch,
    EnumerationTooLarge,
    NotASubpresheaf,
    NotAProjection,
    NotJSheaf,
    ResultNotInOmegaJ,
)
from .sheaves import Presheaf, Sieve, TruthValue, in_omega_j


def spectral_presheaf(poset, domain=None):
    dom = tuple(domain) if domain is not None else tuple(poset)
    values = {v: tuple(range(poset.n_atoms(v))) for v in dom}
    return Presheaf.from_function(
        poset, values, lambda hi, lo, a: poset.restrict_atom(hi, a, lo), dom)


class ClopenSub:
    """Context-indexed atom sets closed under restriction.

    ``sel`` is None for subobjects of the spectral presheaf and a selector for
    subobjects of its pullback, in which case the atoms at V belong to flat(V).
    """

    def __init__(self, poset, sets, sel=None, check=True):
        self.poset = poset
        self.sel = sel
        self.sets = {v: frozenset(s) for v, s in sets.items()}
        if check:
            bad = self.presheaf_violations()
            if bad:
                raise NotASubpresheaf(f"restriction leaves the subobject at {bad[:3]}")

    def ctx(self, v):
        return self.sel(v) if self.sel is not None else v

    @property
    def domain(self):
        return tuple(sorted(self.sets))

    def presheaf_violations(self):
        p = self.poset
        out = []
        for v, s in self.sets.items():
            if any(not 0 <= a < p.n_atoms(self.ctx(v)) for a in s):
                out.append((v, v))
                continue
            for w in p.down(v):
                if w != v and w in self.sets:
                    if not p.restrict_atoms(self.ctx(v), s, self.ctx(w)) <= self.sets[w]:
                        out.append((v, w))
        return out

    def key(self):
        return tuple(sorted((v, tuple(sorted(s))) for v, s in self.sets.items()))

    def __eq__(self, other):
        return isinstance(other, ClopenSub) and self.sel == other.sel and self.key() == other.key()

    def __hash__(self):
        return hash(self.key())

    def __repr__(self):
        body = ", ".join(f"{self.poset.label(v)}:{sorted(s)}" for v, s in sorted(self.sets.items()))
        return f"ClopenSub({body})"

    def __getitem__(self, v):
        return self.sets[v]

    @cached_property
    def _projections(self):
        return {v: self.poset.projection(self.ctx(v), s) for v, s in self.sets.items()}

    def projection(self, v):
        return self._projections[v]

    def leq(self, other):
        return all(self.sets[v] <= other.sets[v] for v in self.sets)

    def meet(self, other):
        return ClopenSub(self.poset, {v: s & other.sets[v] for v, s in self.sets.items()},
                         self.sel, check=False)

    def join(self, other):
        return ClopenSub(self.poset, {v: s | other.sets[v] for v, s in self.sets.items()},
                         self.sel, check=False)

    def restrict_to(self, v):
        """Restriction to the down-set of ``v``."""
        return ClopenSub(self.poset, {w: self.sets[w] for w in self.poset.down(v)},
                         self.sel, check=False)

    def restrict_domain(self, domain):
        return ClopenSub(self.poset, {w: self.sets[w] for w in domain}, self.sel, check=False)

    def is_j_sheaf(self):
        """Values agree with the value at the selected subcontext."""
        if self.sel is None:
            return False
        return all(
            s == self.sets[self.sel(v)] for v, s in self.sets.items() if self.sel(v) in self.sets
        )

    def pullback(self, sel):
        """flat* S for a subobject of Sigma: (flat* S)(V) = S(flat V)."""
        if self.sel is not None:
            raise ValueError("already a subobject of the pulled-back presheaf")
        return ClopenSub(self.poset, {v: self.sets[sel(v)] for v in self.sets}, sel, check=False)

    @classmethod
    def top(cls, poset, sel=None, domain=None):
        dom = domain if domain is not None else list(poset)
        ctx = (lambda v: sel(v)) if sel is not None else (lambda v: v)
        return cls(poset, {v: range(poset.n_atoms(ctx(v))) for v in dom}, sel, check=False)

    @classmethod
    def bottom(cls, poset, sel=None, domain=None):
        dom = domain if domain is not None else list(poset)
        return cls(poset, {v: () for v in dom}, sel, check=False)

    @classmethod
    def from_projections(cls, poset, projections, sel=None):
        sets = {}
        for v, p in projections.items():
            c = poset.contexts[sel(v) if sel is not None else v]
            p = ops.as_matrix(p)
            if p.shape[0] != c.dim:
                raise DimMismatch("projection dimension differs from the poset")
            atoms = c.atoms_below(p)
            if not ops.close(c.projection(atoms), p):
                raise NotAProjection(f"projection is not in the lattice of {poset.label(v)}")
            sets[v] = atoms
        return cls(poset, sets, sel)

    def table(self):
        return {self.poset.label(v): sorted(s) for v, s in sorted(self.sets.items())}


def enumerate_clopen(poset, domain=None, sel=None):
    """Every clopen subobject on a down-closed ``domain``.

    With a selector only sheaf subobjects are produced; they are fixed by their
    values at the selector's fixpoints, so the search runs over those alone.
    """
    dom = sorted(domain if domain is not None else poset)
    free = [v for v in dom if sel is None or sel(v) == v]
    exponent = sum(poset.n_atoms(v) for v in free)
    if exponent > tolerance.max_enum():
        raise EnumerationTooLarge(
            f"clopen enumeration needs 2^{exponent} candidates; bound is 2^{tolerance.max_enum()}")
    lower = {v: [w for w in poset.down(v) if w != v and w in free] for v in free}
    out = []

    def rec(k, chosen):
        if k == len(free):
            sets = {v: chosen[sel(v) if sel is not None else v] for v in dom}
            out.append(ClopenSub(poset, sets, sel, check=False))
            return
        v = free[k]
        allowed = [
            a for a in range(poset.n_atoms(v))
            if all(poset.restrict_atom(v, a, w) in chosen[w] for w in lower[v])
        ]
        for mask in range(1 << len(allowed)):
            chosen[v] = frozenset(a for i, a in enumerate(allowed) if mask >> i & 1)
            rec(k + 1, chosen)
        del chosen[v]

    rec(0, {})
    return out


def daseinize_atoms(e, context):
    """Atoms of the context not orthogonal to ``e``: the least dominating projection."""
    e = ops.as_matrix(e)
    if e.shape[0] != context.dim:
        raise DimMismatch("projection and context dimensions differ")
    return frozenset(
        i for i, a in enumerate(context.atoms) if np.linalg.norm(a @ e) > tolerance.eps()
    )


def daseinize(e, context):
    return context.projection(daseinize_atoms(e, context))


def daseinize_presheaf(e, poset, domain=None):
    dom = domain if domain is not None else list(poset)
    return ClopenSub(poset, {v: daseinize_atoms(e, poset.contexts[v]) for v in dom}, check=False)


def daseinize_j(e, sel, domain=None):
    poset = sel.poset
    dom = domain if domain is not None else list(poset)
    per_fix = {}
    sets = {}
    for v in dom:
        f = sel(v)
        if f not in per_fix:
            per_fix[f] = daseinize_atoms(e, poset.contexts[f])
        sets[v] = per_fix[f]
    return ClopenSub(poset, sets, sel, check=False)


@dataclass(frozen=True)
class TruthObject:
    """An intensional truth object: a membership test on (context, clopen on its down-set)."""

    kind: str
    predicate: object
    meta: tuple = ()

    def contains(self, v, s):
        return bool(self.predicate(v, s))

    def members(self, v, candidates):
        return [s for s in candidates if self.contains(v, s)]

    def filter_violations(self, v, lattice):
        """Upward-closure and meet-closure failures on an explicit lattice of candidates."""
        inside = [s for s in lattice if self.contains(v, s)]
        out = []
        for s in inside:
            for t in lattice:
                if s.leq(t) and not self.contains(v, t):
                    out.append(("upward", s, t))
        for i, s in enumerate(inside):
            for t in inside[i + 1:]:
                if not self.contains(v, s.meet(t)):
                    out.append(("meet", s, t))
        if lattice and not inside:
            out.append(("empty", None, None))
        return out


def truth_object_rho_r(rho, r):
    e = tolerance.eps()

    def pred(v, s):
        return ops.trace_pairing(rho, s.projection(v)) >= r - e

    return TruthObject("rho_r", pred, (("r", float(r)),))


def explicit_truth_object(members, kind="custom"):
    """Truth object from explicit member sets ``{v: set of ClopenSub}``."""
    frozen = {v: frozenset(ms) for v, ms in members.items()}
    return TruthObject(kind, lambda v, s: s in frozen.get(v, ()))


def name_of(p, v):
    """The name of a sheaf proposition at V: its restriction to the down-set of V."""
    if not p.is_j_sheaf():
        raise NotJSheaf("proposition is not a sheaf subobject")
    return p.restrict_to(v)


def valuate(p, truth, poset, domain=None, check=None, parallel=False):
    """Sieve of V' <= V whose restricted proposition belongs to the truth object."""
    dom = list(domain) if domain is not None else list(poset)
    needed = sorted({w for v in dom for w in poset.down(v)})

    def test(w):
        return w, truth.contains(w, p.restrict_to(w))

    if parallel:
        from concurrent.futures import ThreadPoolExecutor
        with ThreadPoolExecutor() as pool:
            hits = dict(pool.map(test, needed))
    else:
        hits = dict(map(test, needed))
    comps = {}
    for v in dom:
        members = frozenset(w for w in poset.down(v) if hits[w])
        try:
            comps[v] = Sieve(v, members, poset)
        except ValueError as exc:
            if check is None:
                raise
            raise ResultNotInOmegaJ(f"component at {poset.label(v)} is not a sieve") from exc
    return TruthValue(poset, comps)


def valuate_j(p, truth, sel, domain=None, parallel=False):
    if not p.is_j_sheaf():
        raise NotJSheaf("proposition is not a sheaf subobject")
    nu = valuate(p, truth, sel.poset, domain, check=True, parallel=parallel)
    for v, s in nu.components.items():
        if not in_omega_j(s, sel):
            raise ResultNotInOmegaJ(f"component at {sel.poset.label(v)} is not closed")
    if not nu.is_natural():
        raise ResultNotInOmegaJ("valuation is not a global element")
    return nu


class _Equal:
    def __repr__(self):
        return "Equal"


EQUAL = _Equal()


def difference_context(p1, p2):
    """A context where two propositions differ, preferring non-trivial contexts."""
    diff = [v for v in p1.domain if p1[v] != p2[v]]
    if not diff:
        return None
    nontrivial = [v for v in diff if v != p1.poset.bottom]
    return (nontrivial or diff)[-1]


def discriminate_witness(p1, p2):
    """A pure state on which the two propositions get different valuations, or EQUAL.

    At a context V where they differ, the two projections commute, so one of
    them has a unit vector in its range annihilated by the other.
    """
    v = difference_context(p1, p2)
    if v is None:
        return EQUAL
    a, b = p1.projection(v), p2.projection(v)
    for big, small in ((b, a), (a, b)):
        rest = big - big @ small
        if ops.rank(rest) >= 1:
            w, vecs = np.linalg.eigh((rest + rest.conj().T) / 2)
            return ops.DensityMatrix.from_vector(vecs[:, int(np.argmax(w))])
    raise AssertionError("distinct commuting projections must leave a remainder")
