"""The product site of contexts and probability levels.

A sieve on (V, r) is stored by its fibers: for each V' <= V the down-set of
levels r' with (V', r') in the sieve. Clopen subobjects of the pulled-back
spectral object are step functions of the level, one per context, whose
values are atom sets of flat(V).
"""
from dataclasses import dataclass, field
from itertools import product as cartesian

from . import interval as iv
from . import operators as ops
from . import tolerance
from .errors import BaseMismatch, NotASieve, NotASubpresheaf, NotJSheaf
from .interval import Closed, Empty, Open, StepFunction, a_prob_step
from .measures import measure_from_state


@dataclass(frozen=True)
class ProductPoint:
    context: int
    level: float

    def leq(self, other, poset):
        return poset.leq(self.context, other.context) and self.level <= other.level


@dataclass(frozen=True)
class BoldSieve:
    base: ProductPoint
    fibers: tuple  # sorted (context id, DownSet) pairs over down(base.context)
    poset: object = field(compare=False, repr=False, hash=False)

    @classmethod
    def of(cls, poset, v, r, fibers, check=True):
        base = ProductPoint(v, float(r))
        fib = {w: fibers.get(w, Empty()) for w in poset.down(v)}
        s = cls(base, tuple(sorted(fib.items())), poset)
        if check:
            s.validate()
        return s

    @classmethod
    def top(cls, poset, v, r):
        return cls.of(poset, v, r, {w: Closed(r) for w in poset.down(v)})

    def validate(self):
        p, r = self.poset, self.base.level
        f = self.fiber_map
        for w, d in f.items():
            if not iv.leq(d, Closed(r)):
                raise NotASieve(f"fiber at {p.label(w)} exceeds the base level")
            for u in p.down(w):
                if not iv.leq(d, f[u]):
                    raise NotASieve("fibers must grow towards smaller contexts")

    @property
    def fiber_map(self):
        return dict(self.fibers)

    def fiber(self, w):
        return self.fiber_map[w]

    def contains(self, w, r):
        f = self.fiber_map
        return w in f and f[w].contains(r)

    def restrict(self, v, r):
        if not (self.poset.leq(v, self.base.context) and r <= self.base.level):
            raise BaseMismatch("restriction target is not below the base")
        f = self.fiber_map
        return BoldSieve.of(self.poset, v, r, {w: iv.restrict(f[w], r) for w in self.poset.down(v)},
                            check=False)

    def meet(self, other):
        self._same(other)
        a, b = self.fiber_map, other.fiber_map
        return BoldSieve.of(self.poset, *self._base(), {w: iv.meet(a[w], b[w]) for w in a},
                            check=False)

    def join(self, other):
        self._same(other)
        a, b = self.fiber_map, other.fiber_map
        return BoldSieve.of(self.poset, *self._base(), {w: iv.join(a[w], b[w]) for w in a},
                            check=False)

    def _base(self):
        return self.base.context, self.base.level

    def _same(self, other):
        if self.base != other.base:
            raise BaseMismatch("sieves on different base points")

    def is_top(self):
        return all(d == Closed(self.base.level) for _, d in self.fibers)

    def table(self):
        return {self.poset.label(w): repr(d) for w, d in self.fibers}


def covering_Jbold(sieve, sel):
    """Covers iff it contains every (W, s) with W <= flat(V) and s < r."""
    f = sieve.fiber_map
    need = Open(sieve.base.level)
    return all(iv.leq(need, f[w]) for w in sieve.poset.down(sel(sieve.base.context)))


def lt_jbold(sieve, sel):
    """Fiber at V' becomes the levels r' whose open down-set at flat(V') is covered."""
    p = sieve.poset
    f = sieve.fiber_map
    out = {}
    for w in p.down(sieve.base.context):
        t = min(iv.sup(f[u]) for u in p.down(sel(w)))
        out[w] = Closed(min(t, sieve.base.level))
    return BoldSieve.of(p, *sieve._base(), out, check=False)


def in_omega_jbold(sieve, sel):
    """Closed sieves: every covered point already belongs to the sieve."""
    p = sieve.poset
    f = sieve.fiber_map
    for w in p.down(sieve.base.context):
        need = lt_jbold(sieve, sel).fiber(w)
        if not iv.leq(need, f[w]):
            return False
    return True


class BoldTruthValue:
    """A global truth value on the product site, kept as global fibers over [0, 1]."""

    def __init__(self, poset, fibers):
        self.poset = poset
        self.fibers = dict(fibers)

    def at(self, v, r):
        return BoldSieve.of(
            self.poset, v, r, {w: iv.restrict(self.fibers[w], r) for w in self.poset.down(v)},
            check=False)

    def __eq__(self, other):
        return isinstance(other, BoldTruthValue) and self.fibers == other.fibers

    def table(self):
        return {self.poset.label(w): repr(d) for w, d in sorted(self.fibers.items())}


def _combine(f, g, op):
    if f.end != g.end:
        raise BaseMismatch("step functions on different level ranges")
    breaks = tuple(sorted(set(f.breaks) | set(g.breaks)))
    mids = [(x + y) / 2 for x, y in zip(breaks, breaks[1:])]
    return StepFunction(
        breaks,
        tuple(op(f(m), g(m)) for m in mids),
        tuple(op(f(b), g(b)) for b in breaks),
    ).normalized()


class StepClopen:
    """Per context a step function of the level with atom sets of flat(V) as values."""

    def __init__(self, sel, steps, check=True):
        self.sel = sel
        self.poset = sel.poset
        self.steps = {v: f.normalized() for v, f in steps.items()}
        ends = {f.end for f in self.steps.values()}
        if len(ends) != 1:
            raise BaseMismatch("all contexts need the same level range")
        self.end = ends.pop()
        if check:
            bad = self.presheaf_violations()
            if bad:
                raise NotASubpresheaf(f"not a subobject: {bad[:3]}")

    @property
    def domain(self):
        return tuple(sorted(self.steps))

    def full(self, v):
        return frozenset(range(self.poset.n_atoms(self.sel(v))))

    def value(self, v, r):
        return self.steps[v](r)

    def projection(self, v, r):
        return self.poset.projection(self.sel(v), self.value(v, r))

    def breaks(self):
        return sorted({b for f in self.steps.values() for b in f.breaks})

    def levels(self, *others):
        """Breakpoints of this and ``others`` plus the midpoints between them."""
        b = sorted(set(self.breaks()).union(*(o.breaks() for o in others)))
        return sorted(set(b) | {(x + y) / 2 for x, y in zip(b, b[1:])})

    def key(self):
        return tuple(sorted(self.steps.items()))

    def __eq__(self, other):
        return isinstance(other, StepClopen) and self.key() == other.key()

    def __hash__(self):
        return hash(self.key())

    def __repr__(self):
        return f"StepClopen(end={self.end}, contexts={len(self.steps)})"

    def presheaf_violations(self):
        """Antitone in the level and closed under restriction between contexts."""
        p, out = self.poset, []
        levels = self.levels()
        for v, f in self.steps.items():
            vals = [f(r) for r in levels]
            if any(not b <= a for a, b in zip(vals, vals[1:])):
                out.append(("antitone", v))
            for w in p.down(v):
                if w == v or w not in self.steps:
                    continue
                for r in levels:
                    img = p.restrict_atoms(self.sel(v), f(r), self.sel(w))
                    if not img <= self.steps[w](r):
                        out.append(("restriction", v, w, r))
                        break
        return out

    def leq(self, other):
        return all(
            self.value(v, r) <= other.value(v, r)
            for v in self.steps for r in self.levels(other))

    def meet(self, other):
        return StepClopen(self.sel, {v: _combine(f, other.steps[v], frozenset.__and__)
                                     for v, f in self.steps.items()}, check=False)

    def join(self, other):
        return StepClopen(self.sel, {v: _combine(f, other.steps[v], frozenset.__or__)
                                     for v, f in self.steps.items()}, check=False)

    def restrict_to(self, v, r):
        return StepClopen(self.sel, {w: self.steps[w].truncate(r) for w in self.poset.down(v)},
                          check=False)


def flat_pullback_steps(s):
    return StepClopen(s.sel, {v: s.steps[s.sel(v)] for v in s.steps}, check=False)


def a_prob_steps(s):
    return StepClopen(s.sel, {v: a_prob_step(f, s.full(v)) for v, f in s.steps.items()},
                      check=False)


def sheafify(s, order="flat_first"):
    """Associated sheaf: pull back along the selector and take left limits, in either order."""
    if order == "flat_first":
        return a_prob_steps(flat_pullback_steps(s))
    if order == "prob_first":
        return flat_pullback_steps(a_prob_steps(s))
    raise ValueError(f"unknown order {order!r}")


def is_jbold_sheaf(s):
    """Constant along the selector and left-continuous in the level, full at level 0."""
    flat_ok = all(f == s.steps[s.sel(v)] for v, f in s.steps.items() if s.sel(v) in s.steps)
    left_ok = all(f.is_left_continuous(s.full(v)) for v, f in s.steps.items())
    return flat_ok and left_ok


def zeta_bold_is_iso(s):
    """The unit into the associated sheaf is an isomorphism, i.e. it changes nothing."""
    return sheafify(s) == s


def inject_pi1(p, end=1.0):
    """Constant-in-level image of a sheaf clopen: full at 0, its value on (0, end]."""
    if not p.is_j_sheaf():
        raise NotJSheaf("proposition is not a sheaf subobject")
    steps = {}
    for v in p.domain:
        full = frozenset(range(p.poset.n_atoms(p.sel(v))))
        steps[v] = StepFunction.constant(p[v], end, at_zero=full)
    return StepClopen(p.sel, steps)


def truth_object_bold(rho):
    e = tolerance.eps()

    def pred(point, s):
        return ops.trace_pairing(rho, s.projection(point.context, point.level)) >= point.level - e

    return pred


def valuation_fiber(f, projection_of, rho):
    """Largest level r' with tr(rho P(r')) >= r', solved exactly piece by piece."""
    best = 0.0
    b = f.breaks
    for i, val in enumerate(f.points):
        if ops.trace_pairing(rho, projection_of(val)) >= b[i]:
            best = max(best, b[i])
    for i, val in enumerate(f.pieces):
        t = ops.trace_pairing(rho, projection_of(val))
        if t > b[i]:
            best = max(best, min(b[i + 1], t))
    return Closed(best)


def valuate_bold(s, rho):
    fibers = {
        v: valuation_fiber(f, lambda atoms, v=v: s.poset.projection(s.sel(v), atoms), rho)
        for v, f in s.steps.items()
    }
    return BoldTruthValue(s.poset, fibers)


def ell_prime_bold(h, sel):
    """Global truth value whose fiber at V' is [0, h(flat V')]."""
    return BoldTruthValue(sel.poset, {v: Closed(h[sel(v)]) for v in sel.poset})


def check_key_diagram(rho, p, sel, measure=None, levels=None):
    """Measure-then-embed against inject-then-valuate, as exact sieve equality."""
    mu = measure or measure_from_state(rho, "j_sheaf", sel)
    section = mu(p).as_dict()
    h = {f: section[f] for f in sel.fixpoints if f in section}
    lhs = ell_prime_bold(h, sel)
    rhs = valuate_bold(inject_pi1(p), rho)
    grid = set(levels or (0.0, 0.25, 0.5, 0.75, 1.0))
    grid |= {ops.trace_pairing(rho, p.projection(v)) for v in p.domain}
    grid |= set(h.values())
    mismatches = []
    for v in p.domain:
        for r in sorted(x for x in grid if 0.0 <= x <= 1.0):
            a, b = lhs.at(v, r), rhs.at(v, r)
            if a != b:
                mismatches.append({"context": sel.poset.label(v), "level": r,
                                   "measure_side": a.table(), "valuation_side": b.table()})
    return {"pass": not mismatches, "levels": sorted(grid), "mismatches": mismatches}


def enumerate_step_clopens(sel, v, grid, clopens):
    """Step clopens on down(v) with pieces on the given grid and antitone values.

    ``grid`` is 0 < g1 < ... < gk; ``clopens`` is a list of sheaf clopens on
    down(v). Each result is full at 0 and takes value c_i on (g_{i-1}, g_i].
    """
    grid = [float(g) for g in grid]
    breaks = (0.0,) + tuple(grid)
    dom = sel.poset.down(v)
    out = []

    def rec(chain):
        if len(chain) == len(grid):
            steps = {}
            for w in dom:
                full = frozenset(range(sel.poset.n_atoms(sel(w))))
                steps[w] = StepFunction.left_continuous(breaks, [c[w] for c in chain], full)
            out.append(StepClopen(sel, steps, check=False))
            return
        for c in clopens:
            if not chain or c.leq(chain[-1]):
                rec(chain + [c])

    rec([])
    return out


def downset_candidates(levels):
    """Every Empty/Closed/Open down-set with endpoints in ``levels``."""
    out = {Empty()}
    for t in levels:
        out.add(Closed(t))
        out.add(Open(t))
    return sorted(out, key=lambda d: d.key)


def enumerate_bold_sieves(poset, v, r, levels):
    """All monotone fiber assignments on down(v) from the candidate down-sets."""
    cands = [d for d in downset_candidates(levels) if iv.leq(d, Closed(r))]
    dom = list(poset.down(v))
    out = []
    for choice in cartesian(range(len(cands)), repeat=len(dom)):
        fib = {w: cands[k] for w, k in zip(dom, choice)}
        if all(iv.leq(fib[w], fib[u]) for w in dom for u in poset.down(w)):
            out.append(BoldSieve.of(poset, v, r, fib, check=False))
    return out
