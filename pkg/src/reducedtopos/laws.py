"""Exhaustive law checks shared by the command line and the test-suite.

Every suite returns a dict with ``pass``, ``checked`` and a list of
``violations`` (each a small JSON-friendly description).
"""
from itertools import combinations, product

from . import interval as iv
from .contexts import validate_selector
from .interval import Closed, Empty, Open
from .product import (
    BoldSieve,
    StepClopen,
    covering_Jbold,
    enumerate_bold_sieves,
    enumerate_step_clopens,
    in_omega_jbold,
    inject_pi1,
    is_jbold_sheaf,
    lt_jbold,
    truth_object_bold,
    zeta_bold_is_iso,
    sheafify,
)
from .interval import StepFunction
from .product import ProductPoint
from .semantics import enumerate_clopen, spectral_presheaf, truth_object_rho_r
from .sheaves import (
    Presheaf,
    Sieve,
    closure,
    covering_J,
    enumerate_sieves,
    in_omega_j,
    is_j_sheaf,
    lt_topology_j,
    pullback_selector,
)


def _result(violations, checked):
    return {"pass": not violations, "checked": checked, "violations": violations[:20],
            "n_violations": len(violations)}


def selector_suite(sel):
    v = validate_selector(sel)
    return _result(v, len(sel.poset))


def grothendieck_suite(sel):
    """Maximal sieve, stability under restriction and transitivity for J."""
    p, out, n = sel.poset, [], 0
    lab = p.label
    for v in p:
        sieves = enumerate_sieves(p, v)
        if not covering_J(Sieve.top(p, v), sel):
            out.append({"law": "maximal", "context": lab(v)})
        covers = [s for s in sieves if covering_J(s, sel)]
        for s in covers:
            for w in p.down(v):
                n += 1
                if not covering_J(s.restrict(w), sel):
                    out.append({"law": "stability", "context": lab(v), "to": lab(w)})
        for s in covers:
            for t in sieves:
                n += 1
                if all(covering_J(t.restrict(w), sel) for w in s.members) and not covering_J(t, sel):
                    out.append({"law": "transitivity", "context": lab(v),
                                "sieve": s.labels(), "other": t.labels()})
        for s in sieves:
            n += 1
            if covering_J(s, sel) != lt_topology_j(s, sel).is_top():
                out.append({"law": "J iff j is top", "context": lab(v), "sieve": s.labels()})
    return _result(out, n)


def lt_suite(sel):
    """Lawvere-Tierney axioms for j and both descriptions of the sheaf classifier."""
    p, out, n = sel.poset, [], 0
    lab = p.label
    for v in p:
        sieves = enumerate_sieves(p, v)
        j = {s: lt_topology_j(s, sel) for s in sieves}
        top = Sieve.top(p, v)
        if lt_topology_j(top, sel) != top:
            out.append({"law": "preserves true", "context": lab(v)})
        for s in sieves:
            n += 1
            if j[s] != lt_topology_j(j[s], sel):
                out.append({"law": "idempotent", "context": lab(v), "sieve": s.labels()})
            if in_omega_j(s, sel) != (j[s] == s):
                out.append({"law": "equalizer", "context": lab(v), "sieve": s.labels()})
            if not s.members <= j[s].members:
                out.append({"law": "inflationary", "context": lab(v), "sieve": s.labels()})
            for w in p.down(v):
                if j[s].restrict(w) != lt_topology_j(s.restrict(w), sel):
                    out.append({"law": "natural", "context": lab(v), "to": lab(w),
                                "sieve": s.labels()})
        for s, t in combinations(sieves, 2):
            n += 1
            if lt_topology_j(s.meet(t), sel) != j[s].meet(j[t]):
                out.append({"law": "meets", "context": lab(v),
                            "sieves": [s.labels(), t.labels()]})
    return _result(out, n)


def closure_suite(sel, presheaf=None, subs=None):
    """Closure is inflationary, idempotent, monotone, meet-preserving and local."""
    p = sel.poset
    q = presheaf or spectral_presheaf(p)
    if subs is None:
        subs = [c.sets for c in enumerate_clopen(p, list(p))]
    out, n = [], 0
    cl = [closure(s, q, sel) for s in subs]
    for s, c in zip(subs, cl):
        n += 1
        if any(not s[v] <= c[v] for v in q.domain):
            out.append({"law": "inflationary"})
        if closure(c, q, sel) != c:
            out.append({"law": "idempotent"})
        q.check_subpresheaf(c)
    for (s, cs), (t, ct) in combinations(list(zip(subs, cl)), 2):
        n += 1
        meet = {v: s[v] & t[v] for v in q.domain}
        if closure(meet, q, sel) != {v: cs[v] & ct[v] for v in q.domain}:
            out.append({"law": "meets"})
        if all(s[v] <= t[v] for v in q.domain) and any(not cs[v] <= ct[v] for v in q.domain):
            out.append({"law": "monotone"})
    return _result(out, n)


def sheafification_suite(sel, presheaves):
    """The pullback is a sheaf, idempotent, and its unit is an isomorphism."""
    out, n = [], 0
    for k, q in enumerate(presheaves):
        n += 1
        fq = pullback_selector(q, sel)
        if not is_j_sheaf(fq, sel):
            out.append({"law": "unit iso on pullback", "presheaf": k})
        ffq = pullback_selector(fq, sel)
        if ffq.values != fq.values or any(
                ffq.map(a, b) != fq.map(a, b) for a, b in sel.poset.hasse_edges(fq.domain)):
            out.append({"law": "pullback idempotent", "presheaf": k})
        if fq.functoriality_violations():
            out.append({"law": "functorial", "presheaf": k})
    return _result(out, n)


def random_presheaf(poset, rng, max_size=3):
    """Random finite presheaf built bottom-up from compatible families."""
    values, maps = {}, {}
    edges = poset.hasse_edges()
    lower = {v: [lo for (hi, lo) in edges if hi == v] for v in poset}
    next_id = 0
    for v in poset:
        if lower[v]:
            sub = Presheaf(poset, values, maps, domain=tuple(values))
            families = []
            for combo in product(*(values[w] for w in lower[v])):
                fam = dict(zip(lower[v], combo))
                ok = all(
                    sub.restrict(fam[a], a, u) == sub.restrict(fam[b], b, u)
                    for a, b in combinations(lower[v], 2)
                    for u in poset.down(a) if poset.leq(u, b)
                )
                if ok:
                    families.append(fam)
        else:
            families = [{}]
        k = int(rng.integers(1, max_size + 1)) if families else 0
        values[v] = tuple(range(next_id, next_id + k))
        next_id += k
        for w in lower[v]:
            maps.setdefault((v, w), {})
        for x in values[v]:
            fam = families[int(rng.integers(len(families)))]
            for w, y in fam.items():
                maps.setdefault((v, w), {})[x] = y
    return Presheaf(poset, values, maps)


def prob_suite(levels=(0.0, 0.25, 0.5, 0.75, 1.0)):
    """Lawvere-Tierney axioms for j_prob and the Grothendieck axioms for its covers."""
    levels = sorted(set(float(x) for x in levels))
    out, n = [], 0
    cands = [Empty()] + [f(t) for t in levels for f in (Closed, Open)]
    samples = sorted(set(levels) | {(a + b) / 2 for a, b in zip(levels, levels[1:])})
    for r in levels:
        sieves = [d for d in set(cands) if iv.leq(d, Closed(r))]
        if iv.j_prob(Closed(r)) != Closed(r):
            out.append({"law": "preserves true", "r": r})
        if not iv.covering_J_prob(r, Closed(r)):
            out.append({"law": "maximal", "r": r})
        for d in sieves:
            n += 1
            jd = iv.j_prob(d)
            if iv.j_prob(jd) != jd:
                out.append({"law": "idempotent", "d": repr(d)})
            if iv.omega_prob_member(r, d) != (jd == d):
                out.append({"law": "equalizer", "r": r, "d": repr(d)})
            if iv.covering_J_prob(r, d) != (jd == Closed(r)):
                out.append({"law": "J iff j is top", "r": r, "d": repr(d)})
            for r2 in samples:
                if r2 <= r and iv.restrict(jd, r2) != iv.j_prob(iv.restrict(d, r2)):
                    out.append({"law": "natural", "d": repr(d), "r": r, "to": r2})
                if r2 <= r and iv.covering_J_prob(r, d) and not iv.covering_J_prob(
                        r2, iv.restrict(d, r2)):
                    out.append({"law": "stability", "d": repr(d), "r": r, "to": r2})
            for e in sieves:
                n += 1
                if iv.j_prob(iv.meet(d, e)) != iv.meet(jd, iv.j_prob(e)):
                    out.append({"law": "meets", "d": repr(d), "e": repr(e)})
                if iv.covering_J_prob(r, d) and all(
                        iv.covering_J_prob(s, iv.restrict(e, s)) for s in samples if d.contains(s)
                ) and not iv.covering_J_prob(r, e):
                    out.append({"law": "transitivity", "r": r, "d": repr(d), "e": repr(e)})
    for p_ in levels:
        for q_ in levels:
            n += 1
            le = all(iv.leq(iv.ell_prime(p_).at(r), iv.ell_prime(q_).at(r)) for r in samples)
            if le != (p_ <= q_):
                out.append({"law": "ell' order embedding", "p": p_, "q": q_})
    return _result(out, n)


def _points(sieve, samples):
    return [(w, s) for w, d in sieve.fibers for s in samples if d.contains(s)]


def bold_suite(sel, levels=(0.0, 0.5, 1.0)):
    """Grothendieck and Lawvere-Tierney axioms on the product site, with every endpoint case."""
    p = sel.poset
    levels = sorted(set(float(x) for x in levels))
    samples = sorted(set(levels) | {(a + b) / 2 for a, b in zip(levels, levels[1:])})
    out, n = [], 0
    for v in p:
        for r in levels:
            sieves = enumerate_bold_sieves(p, v, r, levels)
            top = BoldSieve.top(p, v, r)
            if not covering_Jbold(top, sel):
                out.append({"law": "maximal", "context": p.label(v), "r": r})
            if lt_jbold(top, sel) != top:
                out.append({"law": "preserves true", "context": p.label(v), "r": r})
            jmap = {s: lt_jbold(s, sel) for s in sieves}
            below = [(w, s) for w in p.down(v) for s in samples if s <= r]
            covers = [s for s in sieves if covering_Jbold(s, sel)]
            for s in sieves:
                n += 1
                js = jmap[s]
                if lt_jbold(js, sel) != js:
                    out.append({"law": "idempotent", "context": p.label(v), "r": r})
                if in_omega_jbold(s, sel) != (js == s):
                    out.append({"law": "equalizer", "context": p.label(v), "r": r})
                if covering_Jbold(s, sel) != js.is_top():
                    out.append({"law": "J iff j is top", "context": p.label(v), "r": r})
                for (w, s2) in below:
                    if js.restrict(w, s2) != lt_jbold(s.restrict(w, s2), sel):
                        out.append({"law": "natural", "context": p.label(v), "r": r})
            for s in covers:
                for (w, s2) in below:
                    n += 1
                    if not covering_Jbold(s.restrict(w, s2), sel):
                        out.append({"law": "stability", "context": p.label(v), "r": r})
            for s, t in product(sieves, repeat=2):
                n += 1
                if lt_jbold(s.meet(t), sel) != jmap[s].meet(jmap[t]):
                    out.append({"law": "meets", "context": p.label(v), "r": r})
            for s in covers:
                pts = _points(s, samples)
                for t in sieves:
                    n += 1
                    if all(covering_Jbold(t.restrict(w, s2), sel) for w, s2 in pts) \
                            and not covering_Jbold(t, sel):
                        out.append({"law": "transitivity", "context": p.label(v), "r": r})
    return _result(out, n)


def random_step_clopen(sel, rng, broken=None, max_pieces=3):
    """A sheaf step clopen on the whole poset, optionally broken in one of three ways.

    ``broken`` is None, "right_jump", "zero_not_full" or "not_flat_constant".
    """
    p = sel.poset
    clopens = enumerate_clopen(p, list(p), sel)
    k = int(rng.integers(1, max_pieces + 1))
    grid = sorted(set(round(float(x), 3) for x in rng.uniform(0.05, 0.95, size=k - 1))) + [1.0]
    chain = []
    for _ in grid:
        options = [c for c in clopens if not chain or c.leq(chain[-1])]
        chain.append(options[int(rng.integers(len(options)))])
    breaks = (0.0,) + tuple(grid)
    steps = {}
    for w in p:
        full = frozenset(range(p.n_atoms(sel(w))))
        steps[w] = StepFunction.left_continuous(breaks, [c[w] for c in chain], full)
    s = StepClopen(sel, steps, check=False)
    if broken is None:
        return s
    steps = dict(s.steps)
    if broken == "zero_not_full":
        w = int(rng.integers(len(p)))
        f = steps[w]
        steps[w] = StepFunction(f.breaks, f.pieces, (frozenset(),) + f.points[1:])
    elif broken == "right_jump":
        # full up to the cut, empty after it, and the cut itself takes the right value
        w = int(rng.integers(len(p)))
        full = frozenset(range(p.n_atoms(sel(w))))
        cut = round(float(rng.uniform(0.1, 0.9)), 3)
        steps[w] = StepFunction((0.0, cut, 1.0), (full, frozenset()),
                                (full, frozenset(), frozenset()))
    elif broken == "not_flat_constant":
        movable = [w for w in p if sel(w) != w] or list(p)
        w = movable[int(rng.integers(len(movable)))]
        f = steps[w]
        empty = frozenset()
        if all(x == empty for x in f.pieces):
            f = StepFunction.left_continuous(f.breaks, [f.points[0]] * len(f.pieces), f.points[0])
        else:
            f = StepFunction.left_continuous(f.breaks, [empty] * len(f.pieces), f.points[0])
        steps[w] = f
    else:
        raise ValueError(f"unknown breakage {broken!r}")
    return StepClopen(sel, steps, check=False)


def sheaf_criterion_suite(instances):
    """The left-limit/flat-constancy test against 'the unit into the sheafification is iso'."""
    out = []
    for k, s in enumerate(instances):
        a, b = is_jbold_sheaf(s), zeta_bold_is_iso(s)
        if a != b:
            out.append({"instance": k, "criterion_iii": a, "criterion_ii": b})
        if sheafify(s, "flat_first") != sheafify(s, "prob_first"):
            out.append({"instance": k, "law": "composition orders differ"})
    return _result(out, len(instances))


def truth_filter_suite(sel, states, levels):
    """Filter property of the threshold truth objects on every down-set lattice."""
    p = sel.poset
    out, n = [], 0
    for name, rho in states.items():
        for r in levels:
            t = truth_object_rho_r(rho, r)
            for v in p:
                n += 1
                lattice = enumerate_clopen(p, p.down(v), sel)
                for kind, a, b in t.filter_violations(v, lattice):
                    out.append({"state": name, "r": r, "context": p.label(v), "law": kind,
                                "first": a.table() if a else None,
                                "second": b.table() if b else None})
    return _result(out, n)


def bold_filter_suite(sel, states, grid=(0.5, 1.0)):
    """Filter property of the product truth object on grid sublattices of step clopens."""
    p = sel.poset
    out, n = [], 0
    for name, rho in states.items():
        pred = truth_object_bold(rho)
        for v in p:
            clopens = enumerate_clopen(p, p.down(v), sel)
            for r in grid:
                sub_grid = [g for g in grid if g <= r]
                lattice = enumerate_step_clopens(sel, v, sub_grid, clopens)
                pt = ProductPoint(v, r)
                inside = [s for s in lattice if pred(pt, s)]
                n += 1
                for s in inside:
                    for t in lattice:
                        if s.leq(t) and not pred(pt, t):
                            out.append({"state": name, "context": p.label(v), "r": r,
                                        "law": "upward"})
                for s, t in combinations(inside, 2):
                    if not pred(pt, s.meet(t)):
                        out.append({"state": name, "context": p.label(v), "r": r,
                                    "law": "meet"})
    return _result(out, n)


def least_filter_suite(sel, states, levels=(0.5, 1.0)):
    """Does the product truth object equal the filter generated by injected members?"""
    p = sel.poset
    out, n = [], 0
    for name, rho in states.items():
        pred = truth_object_bold(rho)
        for v in p:
            clopens = enumerate_clopen(p, p.down(v), sel)
            for r in levels:
                grid = sorted({g for g in levels if g <= r})
                lattice = enumerate_step_clopens(sel, v, grid, clopens)
                t = truth_object_rho_r(rho, r)
                gens = {inject_pi1(c, 1.0).restrict_to(v, r) for c in clopens if t.contains(v, c)}
                gens = {_regrid(g, grid, sel, v) for g in gens}
                meets = set(gens)
                frontier = set(gens)
                while frontier:
                    new = {a.meet(b) for a in frontier for b in meets} - meets
                    meets |= new
                    frontier = new
                generated = {s for s in lattice if any(m.leq(s) for m in meets)}
                actual = {s for s in lattice if pred(ProductPoint(v, r), s)}
                n += 1
                if generated != actual:
                    out.append({"state": name, "context": p.label(v), "r": r,
                                "generated": len(generated), "truth_object": len(actual)})
    return _result(out, n)


def _regrid(s, grid, sel, v):
    breaks = (0.0,) + tuple(grid)
    steps = {}
    for w in sel.poset.down(v):
        f = s.steps[w]
        full = frozenset(range(sel.poset.n_atoms(sel(w))))
        steps[w] = StepFunction.left_continuous(breaks, [f(g) for g in grid], full)
    return StepClopen(sel, steps, check=False)
