"""Batch front end: build a system from a config file, run constructions and checks.

Exit codes: 0 when every requested check passes, 1 on verification
failures, 2 on input errors.
"""
import argparse
import sys
from datetime import datetime, timezone

import numpy as np
import yaml

from . import laws, tolerance
from . import operators as ops
from .config import load_config
from .contexts import Selector, build_poset, selector_from_operators, validate_selector
from .errors import ConfigError, EnumerationTooLarge, ToposError, UnknownContext
from .measures import (
    born_probability_j,
    born_probability_presheaf,
    check_factorizations,
    measure_from_state,
    measure_is_valid,
    validate_measure,
)
from .product import check_key_diagram, inject_pi1, valuate_bold
from .semantics import (
    daseinize_j,
    daseinize_presheaf,
    enumerate_clopen,
    truth_object_rho_r,
    valuate,
    valuate_j,
)
from .translation import (
    gamma_range,
    imath_range,
    reduced_daseinize,
    reduced_theory_suite,
    reduced_truth_object,
    reduced_valuation,
)


class System:
    """A config resolved into a poset, a selector and projections."""

    def __init__(self, cfg):
        self.cfg = cfg
        opnd = cfg.operators
        gens = {lab: [opnd[n] for n in names] for lab, names in cfg.contexts.items()}
        sel_spec = cfg.selector
        sel_ops = [[opnd[n] for n in sel_spec["operators"]]] if "operators" in sel_spec else []
        self.poset = build_poset(gens, sel_ops, dim=cfg.hilbert_dim)
        if "operators" in sel_spec:
            self.sel = selector_from_operators(sel_ops[0], self.poset)
        elif "explicit" in sel_spec:
            try:
                self.sel = Selector.explicit(self.poset, sel_spec["explicit"])
            except UnknownContext as exc:
                raise ConfigError(str(exc), "selector.explicit") from None
        else:
            self.sel = Selector.identity(self.poset)
        self.projections = {
            name: ops.spectral_projection(opnd[a], delta)
            for name, (a, delta) in cfg.propositions.items()
        }


def _labels(poset, ids):
    return sorted((poset.label(w) for w in ids), key=poset.id_of)


def _table(nu, poset):
    return {poset.label(v): _labels(poset, s.members) for v, s in sorted(nu.components.items())}


def _float(x):
    return float(np.round(x, 12))


def cmd_build(system):
    p, sel = system.poset, system.sel
    return {
        "poset": {"contexts": len(p), "summary": p.summary()},
        "selector": {
            "map": sel.as_labels(),
            "fixpoints": _labels(p, sel.fixpoints),
            "violations": [{k: str(v) for k, v in d.items()} for d in validate_selector(sel)],
        },
    }


def cmd_valuate(system, parallel=False):
    cfg, p, sel = system.cfg, system.poset, system.sel
    out = {}
    for pname, e in system.projections.items():
        d_pre = daseinize_presheaf(e, p)
        d_j = daseinize_j(e, sel)
        d_red = reduced_daseinize(e, sel)
        bold = inject_pi1(d_j)
        per_state = {}
        for sname, rho in cfg.states.items():
            per_r = {}
            for r in cfg.thresholds:
                t = truth_object_rho_r(rho, r)
                per_r[f"r={r:g}"] = {
                    "presheaf": _table(valuate(d_pre, t, p, parallel=parallel), p),
                    "j_sheaf": _table(valuate_j(d_j, t, sel, parallel=parallel), p),
                    "reduced": {
                        p.label(f): _labels(p, m)
                        for f, m in sorted(reduced_valuation(d_red, reduced_truth_object(rho, r),
                                                             sel).items())
                    },
                }
            nu_bold = valuate_bold(bold, rho)
            product_form = {
                "fibers": {p.label(v): repr(d) for v, d in sorted(nu_bold.fibers.items())},
                "levels": {
                    f"r={r:g}": {p.label(v): nu_bold.at(v, r).table() for v in p}
                    for r in cfg.levels
                },
            }
            per_state[sname] = {"thresholds": per_r, "product": product_form}
        out[pname] = per_state
    return out


def cmd_probability(system):
    cfg, p, sel = system.cfg, system.poset, system.sel
    out = {}
    for pname, (a, delta) in cfg.propositions.items():
        op = cfg.operators[a]
        e = system.projections[pname]
        rows = {}
        for sname, rho in cfg.states.items():
            value, exact = born_probability_j(op, delta, rho, sel)
            rows[sname] = {
                "born": _float(ops.trace_pairing(rho, e)),
                "presheaf_min": _float(born_probability_presheaf(op, delta, rho, p)),
                "j_sheaf_min": _float(value),
                "flag": "exact" if exact else "bound",
            }
        out[pname] = rows
    return out


def _guarded(fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except EnumerationTooLarge as exc:
        return {"pass": False, "error": f"EnumerationTooLarge: {exc}"}


def cmd_verify(system):
    cfg, p, sel = system.cfg, system.poset, system.sel
    toggles = {
        "selector": True, "topology": True, "closure": True, "sheafification": True,
        "probability_interval": True, "product": True, "measures": True,
        "factorization": True, "key_diagram": True, "translation": True, "filters": True,
    }
    unknown = set(cfg.verify) - set(toggles)
    if unknown:
        raise ConfigError(f"unknown toggle(s) {sorted(unknown)}", "verify")
    toggles.update({k: bool(v) for k, v in cfg.verify.items()})
    rng = np.random.default_rng(cfg.seed)
    suites = {}
    selector_ok = not validate_selector(sel)
    if toggles["selector"]:
        suites["selector"] = laws.selector_suite(sel)
    if not selector_ok:
        # everything below assumes a valid selector
        return suites
    if toggles["topology"]:
        suites["grothendieck"] = _guarded(laws.grothendieck_suite, sel)
        suites["lawvere_tierney"] = _guarded(laws.lt_suite, sel)
    if toggles["closure"]:
        suites["closure"] = _guarded(laws.closure_suite, sel)
    if toggles["sheafification"]:
        qs = [laws.random_presheaf(p, rng) for _ in range(5)]
        suites["sheafification"] = _guarded(laws.sheafification_suite, sel, qs)
        inst = [laws.random_step_clopen(sel, rng, b)
                for b in (None, "right_jump", "zero_not_full", "not_flat_constant")]
        suites["product_sheaf_criterion"] = _guarded(laws.sheaf_criterion_suite, inst)
    if toggles["probability_interval"]:
        suites["probability_interval"] = laws.prob_suite(cfg.levels)
    if toggles["product"]:
        suites["product_topology"] = _guarded(laws.bold_suite, sel)

    def per_state(name, fn):
        rows = {}
        for sname, rho in cfg.states.items():
            rows[sname] = _guarded(fn, rho)
        suites[name] = {"pass": all(r["pass"] for r in rows.values()), "states": rows}

    if toggles["measures"]:
        def measures(rho):
            mu = measure_from_state(rho, "j_sheaf", sel)
            report = validate_measure(mu, enumerate_clopen(p, list(p), sel))
            return {"pass": measure_is_valid(report),
                    "counts": {k: len(v) for k, v in report.items()}}
        per_state("measures", measures)
    if toggles["factorization"]:
        def factor(rho):
            mu = measure_from_state(rho, "j_sheaf", sel)
            rows = {f"r={r:g}": check_factorizations(rho, r, mu, sel) for r in cfg.thresholds}
            return {"pass": all(x["pass"] for x in rows.values()),
                    "mismatches": {k: sum(len(x[t]["mismatches"]) for t in ("rho_r", "canonical"))
                                   for k, x in rows.items()}}
        per_state("factorization", factor)
    if toggles["key_diagram"]:
        def key(rho):
            rows = {}
            for pname, e in system.projections.items():
                res = check_key_diagram(rho, daseinize_j(e, sel), sel, levels=cfg.levels)
                rows[pname] = {"pass": res["pass"], "mismatches": res["mismatches"][:5]}
            return {"pass": all(x["pass"] for x in rows.values()), "propositions": rows}
        per_state("key_diagram", key)
    if toggles["translation"]:
        def trans(rho):
            rows, ok = {}, True
            for pname, e in system.projections.items():
                for r in cfg.thresholds:
                    rep = reduced_theory_suite(rho, r, e, sel)
                    d_j = daseinize_j(e, sel)
                    nu_j = valuate_j(d_j, truth_object_rho_r(rho, r), sel)
                    lo, hi = gamma_range(nu_j, sel)
                    ilo, ihi = imath_range(d_j)
                    d_pre = daseinize_presheaf(e, p)
                    nu = valuate(d_pre, truth_object_rho_r(rho, r), p)
                    sandwich = lo.leq(nu) and nu.leq(hi) and ilo.leq(d_pre) and d_pre.leq(ihi)
                    rows[f"{pname} r={r:g}"] = {
                        k: v["pass"] for k, v in rep.items() if isinstance(v, dict)}
                    rows[f"{pname} r={r:g}"]["ranges"] = sandwich
                    ok &= rep["pass"] and sandwich
            return {"pass": ok, "checks": rows}
        per_state("translation", trans)
    if toggles["filters"]:
        suites["truth_object_filters"] = _guarded(
            laws.truth_filter_suite, sel, cfg.states, cfg.thresholds)
        suites["product_truth_object_filters"] = _guarded(
            laws.bold_filter_suite, sel, cfg.states, cfg.thresholds)
    return suites


def _all_pass(suites):
    return all(s.get("pass", False) for s in suites.values())


def build_parser():
    ap = argparse.ArgumentParser(prog="reducedtopos", description=__doc__.splitlines()[0])
    ap.add_argument("command", choices=["build", "valuate", "probability", "verify"])
    ap.add_argument("--config", required=True, help="YAML or JSON system description")
    ap.add_argument("--out", help="write the report here instead of stdout")
    ap.add_argument("--epsilon", type=float, default=tolerance.DEFAULT_EPSILON)
    ap.add_argument("--max-enum", type=int, default=None,
                    help=f"enumeration bound (default: config value or "
                         f"{tolerance.DEFAULT_MAX_ENUM})")
    ap.add_argument("--parallel", type=lambda s: s.lower() in ("1", "true", "yes", "on"),
                    default=False, metavar="BOOL")
    return ap


def run(argv=None):
    """Return (exit code, report text)."""
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        max_enum = args.max_enum or cfg.max_enum or tolerance.DEFAULT_MAX_ENUM
        with tolerance.settings(epsilon=args.epsilon, max_enum=max_enum):
            system = System(cfg)
            report = {"command": args.command, "build": cmd_build(system)}
            code = 0
            if args.command == "valuate":
                report["valuations"] = cmd_valuate(system, args.parallel)
            elif args.command == "probability":
                report["probabilities"] = cmd_probability(system)
            elif args.command == "verify":
                suites = cmd_verify(system)
                report["verification"] = suites
                report["pass"] = _all_pass(suites)
                code = 0 if report["pass"] else 1
            elif report["build"]["selector"]["violations"]:
                code = 1
    except (ConfigError, ValueError) as exc:
        return 2, f"error: {exc}\n"
    except ToposError as exc:
        return 2, f"error: {type(exc).__name__}: {exc}\n"
    stamp = datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")
    text = f"# generated {stamp}\n" + yaml.safe_dump(report, sort_keys=False, width=100)
    return code, text


def main(argv=None):
    code, text = run(argv)
    args = build_parser().parse_args(argv)
    if code == 2:
        sys.stderr.write(text)
    elif args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
