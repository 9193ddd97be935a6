"""Presheaves on a finite context poset, sieves, and the topology induced by a selector.

Sieves are explicit frozensets of context ids. Global elements of the
subobject classifier are stored as one sieve per context.
"""
from dataclasses import dataclass, field

from . import tolerance
from .errors import (
    BaseMismatch,
    EnumerationTooLarge,
    NotAPresheaf,
    NotASieve,
    NotASubpresheaf,
    NotGlobalElement,
)


class Presheaf:
    """Finite presheaf: a value tuple per context and restriction maps on Hasse edges.

    ``domain`` may be any subset of the poset (for example ``down(V)`` or the
    selector's fixpoints); restriction between comparable contexts is the
    composite along a Hasse path inside the domain, memoised on first use.
    """

    def __init__(self, poset, values, edge_maps, domain=None):
        self.poset = poset
        self.domain = tuple(sorted(domain if domain is not None else values.keys()))
        self.values = {v: tuple(values[v]) for v in self.domain}
        self._edges = {}
        for (hi, lo) in poset.hasse_edges(self.domain):
            m = edge_maps[(hi, lo)]
            self._edges[(hi, lo)] = {x: m[x] for x in self.values[hi]}
            if not set(self._edges[(hi, lo)].values()) <= set(self.values[lo]):
                raise NotAPresheaf(f"edge map {hi}->{lo} leaves the target set")
        self._cache = {}

    @classmethod
    def from_function(cls, poset, values, restrict, domain=None):
        dom = tuple(sorted(domain if domain is not None else values.keys()))
        maps = {
            (hi, lo): {x: restrict(hi, lo, x) for x in values[hi]}
            for (hi, lo) in poset.hasse_edges(dom)
        }
        return cls(poset, values, maps, dom)

    def __getitem__(self, v):
        return self.values[v]

    def map(self, hi, lo):
        """The restriction map Q(hi) -> Q(lo) as a dict."""
        key = (hi, lo)
        if key in self._cache:
            return self._cache[key]
        if hi == lo:
            out = {x: x for x in self.values[hi]}
        else:
            if not self.poset.leq(lo, hi) or lo not in self.values:
                raise BaseMismatch(f"{lo} is not below {hi} in the domain")
            step = next(
                (m for (h, m) in self._edges if h == hi and self.poset.leq(lo, m)), None
            )
            if step is None:
                raise BaseMismatch(f"no path from {hi} to {lo}")
            first, rest = self._edges[(hi, step)], self.map(step, lo)
            out = {x: rest[first[x]] for x in self.values[hi]}
        self._cache[key] = out
        return out

    def restrict(self, x, hi, lo):
        return self.map(hi, lo)[x]

    def functoriality_violations(self):
        """Check every composite against every factorisation through a middle context."""
        out = []
        dom = self.domain
        for hi in dom:
            for mid in dom:
                if not self.poset.leq(mid, hi):
                    continue
                for lo in dom:
                    if not self.poset.leq(lo, mid):
                        continue
                    direct, a, b = self.map(hi, lo), self.map(hi, mid), self.map(mid, lo)
                    if any(direct[x] != b[a[x]] for x in self.values[hi]):
                        out.append((hi, mid, lo))
        return out

    def subpresheaf_violations(self, sub):
        out = []
        for v in self.domain:
            if not set(sub[v]) <= set(self.values[v]):
                out.append((v, v))
        for (hi, lo) in self.poset.hasse_edges(self.domain):
            m = self._edges[(hi, lo)]
            if any(m[x] not in sub[lo] for x in sub[hi]):
                out.append((hi, lo))
        return out

    def check_subpresheaf(self, sub):
        if self.subpresheaf_violations(sub):
            raise NotASubpresheaf("family is not closed under restriction")
        return {v: frozenset(sub[v]) for v in self.domain}


@dataclass(frozen=True)
class Sieve:
    base: int
    members: frozenset
    poset: object = field(compare=False, repr=False, hash=False)

    def __post_init__(self):
        object.__setattr__(self, "members", frozenset(self.members))
        below = set(self.poset.down(self.base))
        if not self.members <= below:
            raise NotASieve("sieve members must lie below the base")
        for v in self.members:
            if not set(self.poset.down(v)) <= self.members:
                raise NotASieve("sieve is not down-closed")

    @classmethod
    def top(cls, poset, base):
        return cls(base, frozenset(poset.down(base)), poset)

    @classmethod
    def empty(cls, poset, base):
        return cls(base, frozenset(), poset)

    def __contains__(self, v):
        return v in self.members

    def _same_base(self, other):
        if self.base != other.base:
            raise BaseMismatch(f"sieves on {self.base} and {other.base}")

    def meet(self, other):
        self._same_base(other)
        return Sieve(self.base, self.members & other.members, self.poset)

    def join(self, other):
        self._same_base(other)
        return Sieve(self.base, self.members | other.members, self.poset)

    def implies(self, other):
        self._same_base(other)
        p = self.poset
        keep = {
            v for v in p.down(self.base)
            if all(w not in self.members or w in other.members for w in p.down(v))
        }
        return Sieve(self.base, keep, p)

    def restrict(self, v):
        if not self.poset.leq(v, self.base):
            raise BaseMismatch("restriction target is not below the base")
        return Sieve(v, self.members & set(self.poset.down(v)), self.poset)

    def is_top(self):
        return self.members == frozenset(self.poset.down(self.base))

    def labels(self):
        return sorted(self.poset.label(v) for v in self.members)


def enumerate_downsets(poset, elements):
    """All down-closed subsets of ``elements`` (itself down-closed), smallest ids first."""
    elems = sorted(elements)
    if len(elems) > tolerance.max_enum():
        raise EnumerationTooLarge(
            f"{len(elems)} contexts exceed the enumeration bound {tolerance.max_enum()}")
    below = {v: [w for w in poset.down(v) if w != v] for v in elems}
    out = []

    def rec(k, chosen):
        if k == len(elems):
            out.append(frozenset(chosen))
            return
        rec(k + 1, chosen)
        v = elems[k]
        if all(w in chosen for w in below[v]):
            chosen.add(v)
            rec(k + 1, chosen)
            chosen.discard(v)

    rec(0, set())
    return out


def enumerate_sieves(poset, base):
    return [Sieve(base, m, poset) for m in enumerate_downsets(poset, poset.down(base))]


class TruthValue:
    """A family of sieves, one per context of ``domain``; a global element when natural."""

    def __init__(self, poset, components):
        self.poset = poset
        self.components = dict(components)

    @classmethod
    def from_downset(cls, poset, downset, domain=None):
        dom = domain if domain is not None else list(poset)
        d = frozenset(downset)
        return cls(poset, {v: Sieve(v, d & set(poset.down(v)), poset) for v in dom})

    @classmethod
    def true(cls, poset):
        return cls(poset, {v: Sieve.top(poset, v) for v in poset})

    @classmethod
    def false(cls, poset):
        return cls(poset, {v: Sieve.empty(poset, v) for v in poset})

    def __getitem__(self, v):
        return self.components[v]

    def __eq__(self, other):
        return isinstance(other, TruthValue) and self.components == other.components

    def __hash__(self):
        return hash(frozenset(self.components.items()))

    def naturality_violations(self):
        out = []
        for v, s in self.components.items():
            for w in self.poset.down(v):
                if w in self.components and s.restrict(w) != self.components[w]:
                    out.append((v, w))
        return out

    def is_natural(self):
        return not self.naturality_violations()

    def leq(self, other):
        return all(self[v].members <= other[v].members for v in self.components)

    def as_downset(self):
        return frozenset().union(*(s.members for s in self.components.values()))

    def table(self):
        return {self.poset.label(v): s.labels() for v, s in sorted(self.components.items())}


def covering_J(sieve, sel):
    """A sieve on V covers iff it contains flat(V)."""
    return sel(sieve.base) in sieve.members


def lt_topology_j(sieve, sel):
    p = sieve.poset
    return Sieve(sieve.base, {w for w in p.down(sieve.base) if sel(w) in sieve.members}, p)


def in_omega_j(sieve, sel):
    """Membership in the sheaf subobject classifier by its defining condition."""
    return all(
        w in sieve.members for w in sieve.poset.down(sieve.base) if sel(w) in sieve.members
    )


def omega_j(poset, base, sel):
    return [s for s in enumerate_sieves(poset, base) if in_omega_j(s, sel)]


def closure(sub, q, sel):
    """Closure of a subpresheaf: elements whose restriction to flat(V) lies in the sub."""
    q.check_subpresheaf(sub)
    out = {}
    for v in q.domain:
        f = sel(v)
        m = q.map(v, f)
        out[v] = frozenset(x for x in q[v] if m[x] in sub[f])
    return out


def pullback_selector(q, sel):
    """(flat* Q)(V) = Q(flat V), with restrictions borrowed from Q."""
    dom = q.domain
    values = {v: q[sel(v)] for v in dom}
    return Presheaf.from_function(
        q.poset, values, lambda hi, lo, x: q.restrict(x, sel(hi), sel(lo)), dom)


def unit_zeta(q, sel):
    """Components Q(V) -> Q(flat V) of the unit Q -> flat* Q."""
    return {v: q.map(v, sel(v)) for v in q.domain}


def zeta_naturality_violations(q, sel):
    zeta = unit_zeta(q, sel)
    target = pullback_selector(q, sel)
    out = []
    for (hi, lo) in q.poset.hasse_edges(q.domain):
        a = {x: zeta[lo][q.restrict(x, hi, lo)] for x in q[hi]}
        b = {x: target.restrict(zeta[hi][x], hi, lo) for x in q[hi]}
        if a != b:
            out.append((hi, lo))
    return out


def is_j_sheaf(q, sel):
    """A presheaf is a sheaf iff every component of the unit is a bijection."""
    for v, m in unit_zeta(q, sel).items():
        image = set(m.values())
        if len(image) != len(m) or image != set(q[sel(v)]):
            return False
    return True


def r_factor(nu, sel):
    """Send a global element of Omega to the sheaf classifier by applying j."""
    if nu.naturality_violations():
        raise NotGlobalElement("truth value is not natural")
    out = TruthValue(nu.poset, {v: lt_topology_j(s, sel) for v, s in nu.components.items()})
    if not all(in_omega_j(s, sel) for s in out.components.values()) or not out.is_natural():
        raise NotGlobalElement("image does not land in the sheaf classifier")
    return out


def global_truth_values(poset):
    """Every global element of Omega: one per down-set of the whole poset."""
    return [TruthValue.from_downset(poset, d) for d in enumerate_downsets(poset, list(poset))]
