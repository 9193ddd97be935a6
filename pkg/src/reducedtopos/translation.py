"""Moving between presheaf and sheaf descriptions, and the theory on fixpoints only.

The range operators return lower and upper bounds; membership in a range is
the sandwich test between them. Enumeration-based checks stay behind the
global size guard.
"""
from . import operators as ops
from .errors import NotGlobalElement, NotInOmegaJ
from .semantics import (
    ClopenSub,
    TruthObject,
    daseinize,
    daseinize_atoms,
    daseinize_j,
    daseinize_presheaf,
    enumerate_clopen,
    explicit_truth_object,
    truth_object_rho_r,
    valuate,
    valuate_j,
)
from .sheaves import (
    Presheaf,
    Sieve,
    TruthValue,
    in_omega_j,
    r_factor,
)


def translate_truth_value(nu, sel):
    return r_factor(nu, sel)


def upper_fixpoint_set(sel, v):
    """Contexts W with V contained in flat(W)."""
    p = sel.poset
    return [w for w in p if p.leq(v, sel(w))]


def gamma_range(nu_j, sel):
    """Least and greatest presheaf truth values translating to ``nu_j``."""
    p = sel.poset
    if nu_j.naturality_violations() or not all(in_omega_j(s, sel) for s in nu_j.components.values()):
        raise NotGlobalElement("not a global element of the sheaf classifier")
    upper = TruthValue(p, dict(nu_j.components))
    lower = {}
    for v in p:
        members = nu_j[v].members
        keep = {w for w in p.down(v) if any(p.leq(w, sel(x)) for x in members)}
        lower[v] = Sieve(v, keep, p)
    return TruthValue(p, lower), upper


def in_gamma_range(nu, nu_j, sel):
    lo, hi = gamma_range(nu_j, sel)
    return lo.leq(nu) and nu.leq(hi)


def imath_range(p_j):
    """Least and greatest presheaf propositions whose pullback is ``p_j``."""
    sel = p_j.sel
    poset = sel.poset
    upper, lower = {}, {}
    for v in poset:
        c = poset.contexts[v]
        upper[v] = c.atoms_below(p_j.projection(v))
        ws = upper_fixpoint_set(sel, v)
        if not ws:
            lower[v] = frozenset()
            continue
        acc = ops.zeros(poset.dim)
        for w in ws:
            acc = ops.proj_join(acc, daseinize(p_j.projection(w), c))
        lower[v] = c.atoms_below(acc)
    return ClopenSub(poset, lower), ClopenSub(poset, upper)


def in_imath_range(p, p_j):
    lo, hi = imath_range(p_j)
    return lo.leq(p) and p.leq(hi)


def jmath_upper(truth_j, sel):
    """Presheaf truth object: S on down(V) belongs iff its pullback does."""

    def pred(v, s):
        return truth_j.contains(v, s.pullback(sel))

    return TruthObject("jmath_upper", pred)


def _filter_closure(generators, lattice):
    """Smallest filter of ``lattice`` containing ``generators``: meets, then upward closure."""
    gens = set(generators)
    if not gens:
        top = max(lattice, key=lambda s: sum(len(x) for x in s.sets.values()))
        return {t for t in lattice if top.leq(t)}
    meets = set(gens)
    frontier = set(gens)
    while frontier:
        new = {a.meet(b) for a in frontier for b in meets} - meets
        meets |= new
        frontier = new
    return {t for t in lattice if any(m.leq(t) for m in meets)}


def jmath_lower(truth_j, sel):
    """Presheaf truth object generated from restrictions of the upper range along flat."""
    poset = sel.poset
    members = {}
    for v in poset:
        lattice = enumerate_clopen(poset, poset.down(v))
        ws = upper_fixpoint_set(sel, v)
        if not ws:
            members[v] = {ClopenSub.top(poset, domain=poset.down(v))}
            continue
        gens = set()
        for w in ws:
            for s in enumerate_clopen(poset, poset.down(sel(w))):
                if truth_j.contains(w, _sheaf_on(s, sel, w)):
                    gens.add(s.restrict_domain(poset.down(v)))
        members[v] = _filter_closure(gens, lattice)
    return explicit_truth_object(members, kind="jmath_lower"), members


def jmath_range(truth_j, sel):
    lower, _ = jmath_lower(truth_j, sel)
    return lower, jmath_upper(truth_j, sel)


def translation_equation_violations(truth, truth_j, sel):
    """Compare T(flat V) with the clopens on down(flat V) whose pullback lies in T_j(V)."""
    poset = sel.poset
    out = []
    for v in poset:
        f = sel(v)
        for s in enumerate_clopen(poset, poset.down(f)):
            lhs = truth.contains(f, s)
            rhs = truth_j.contains(v, _sheaf_on(s, sel, v))
            if lhs != rhs:
                out.append((poset.label(v), s.table()))
    return out


def _sheaf_on(s, sel, v):
    """flat*(S) on down(V) for S given on down(flat V)."""
    return ClopenSub(s.poset, {x: s.sets[sel(x)] for x in s.poset.down(v)}, sel, check=False)


# theory on the fixpoints of the selector


def reduced_restrict(q, sel):
    """Restrict a presheaf to the fixpoints."""
    fix = [v for v in q.domain if sel(v) == v]
    return Presheaf.from_function(q.poset, {v: q[v] for v in fix},
                                  lambda hi, lo, x: q.restrict(x, hi, lo), fix)


def reduced_pullback(x, sel):
    """Extend a presheaf on fixpoints to all contexts by reading it at flat(V)."""
    p = sel.poset
    dom = [v for v in p if sel(v) in x.values]
    return Presheaf.from_function(p, {v: x[sel(v)] for v in dom},
                                  lambda hi, lo, e: x.restrict(e, sel(hi), sel(lo)), dom)


def presheaf_iso(a, b):
    """Same values and the same restriction maps on a shared domain."""
    if a.domain != b.domain or any(a[v] != b[v] for v in a.domain):
        return False
    return all(a.map(hi, lo) == b.map(hi, lo) for (hi, lo) in a.poset.hasse_edges(a.domain))


def fixpoints_below(sel, v):
    return [w for w in sel.poset.down(v) if sel(w) == w]


def xi(sieve, sel):
    if not in_omega_j(sieve, sel) or sel(sieve.base) != sieve.base:
        raise NotInOmegaJ("xi needs a closed sieve on a fixpoint")
    return frozenset(w for w in sieve.members if sel(w) == w)


def xi_inv(members, base, sel):
    p = sel.poset
    return Sieve(base, {w for w in p.down(base) if sel(w) in members}, p)


def vartheta(z, sel):
    """A clopen on fixpoints to the sheaf clopen that reads it at flat(V)."""
    p = sel.poset
    dom = [v for v in p if sel(v) in z.sets]
    return ClopenSub(p, {v: z.sets[sel(v)] for v in dom}, sel, check=False)


def vartheta_inv(s, sel):
    return ClopenSub(s.poset, {v: s.sets[v] for v in s.domain if sel(v) == v}, sel, check=False)


def reduced_daseinize(e, sel):
    p = sel.poset
    return ClopenSub(p, {f: daseinize_atoms(e, p.contexts[f]) for f in sel.fixpoints}, sel,
                     check=False)


def reduced_truth_object(rho, r):
    """On fixpoints: Z belongs at flat V iff tr(rho P_Z(flat V)) >= r."""
    return truth_object_rho_r(rho, r)


def reduced_valuation(z, truth, sel):
    out = {}
    for f in sel.fixpoints:
        out[f] = frozenset(
            g for g in fixpoints_below(sel, f)
            if truth.contains(g, z.restrict_domain(fixpoints_below(sel, g))))
    return out


def reduced_theory_suite(rho, r, e, sel, xi_map=None):
    """Checks (a)-(e) tying the sheaf theory to the theory on fixpoints."""
    xi_map = xi_map or xi
    p = sel.poset
    fix = sel.fixpoints
    report = {}

    sheaf_props = enumerate_clopen(p, list(p), sel)
    bad = [s.table() for s in sheaf_props if vartheta(vartheta_inv(s, sel), sel) != s]
    reduced = {vartheta_inv(s, sel) for s in sheaf_props}
    bad += [z.table() for z in reduced if vartheta_inv(vartheta(z, sel), sel) != z]
    report["a_vartheta_round_trip"] = {"pass": not bad, "failures": bad}

    d_j = daseinize_j(e, sel)
    d_flat = reduced_daseinize(e, sel)
    report["b_daseinization"] = {"pass": vartheta_inv(d_j, sel) == d_flat}

    t_j = truth_object_rho_r(rho, r)
    t_flat = reduced_truth_object(rho, r)
    bad = []
    for f in fix:
        for s in enumerate_clopen(p, p.down(f), sel):
            z = vartheta_inv(s, sel)
            if t_flat.contains(f, z) != t_j.contains(f, s):
                bad.append((p.label(f), s.table()))
    report["c_truth_object"] = {"pass": not bad, "failures": bad}

    nu_j = valuate_j(d_j, t_j, sel)
    nu_flat = reduced_valuation(d_flat, t_flat, sel)
    bad = []
    for f in fix:
        try:
            translated = xi_map(nu_j[f], sel)
        except NotInOmegaJ:
            translated = None
        if translated != nu_flat[f]:
            bad.append(p.label(f))
    report["d_valuation"] = {"pass": not bad, "failures": bad}

    bad = []
    presheaf_prop = daseinize_presheaf(e, p)
    for truth in (truth_object_rho_r(rho, r), jmath_upper(t_j, sel)):
        nu = valuate(presheaf_prop, truth, p)
        if r_factor(nu, sel) != nu_j:
            bad.append(truth.kind)
    report["e_consistency"] = {"pass": not bad, "failures": bad}

    report["pass"] = all(v["pass"] for v in report.values())
    return report
