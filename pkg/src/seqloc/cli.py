"""Command-line front end: ``seqloc <command> ...``.

Every command prints one JSON document ``{command, status, result,
certificate}`` to standard output.  Exit status 0 means the command ran
(a negative membership answer is still 0), 2 means malformed input and 3
a numeric failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time
from fractions import Fraction

import numpy as np

from . import core
from .core import BINARY_12, SequentialCorrelations
from .exactlp.dd import DDError
from .exactlp.lp import CertificateError, LpError

EXIT_OK, EXIT_INPUT, EXIT_NUMERIC = 0, 2, 3


class InputError(ValueError):
    """Malformed command input."""


def number(v) -> dict:
    """Exact and decimal renderings of a number."""
    if isinstance(v, (bool, np.bool_)):
        raise TypeError("booleans are not numbers here")
    if isinstance(v, (int, np.integer)):
        v = Fraction(int(v))
    if isinstance(v, Fraction):
        return {"exact": str(v), "decimal": _decimal(float(v))}
    return {"exact": None, "decimal": _decimal(float(v))}


def _decimal(x: float) -> str:
    return f"{x:.15g}"


def _write_json(path, data) -> None:
    with open(path, "w") as fh:
        json.dump(data, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _load_correlations(path) -> SequentialCorrelations:
    try:
        return core.load_json(path)
    except (OSError, json.JSONDecodeError) as e:
        raise InputError(f"cannot read correlations from {path}: {e}") from None


def _functional(source: str):
    from .polytopes.functionals import builtin, load_functional
    if source.startswith("builtin:"):
        try:
            return builtin(source[len("builtin:"):])
        except KeyError as e:
            raise InputError(str(e.args[0])) from None
    try:
        return load_functional(source)
    except (OSError, json.JSONDecodeError) as e:
        raise InputError(f"cannot read functional from {source}: {e}") from None


def _scenario(text: str):
    if text.replace(" ", "") != "1,2":
        raise InputError(f"unsupported scenario {text!r}; facet enumeration covers --scenario 1,2")
    return BINARY_12


# ------------------------------------------------------------- commands

def cmd_validate(args):
    P = _load_correlations(args.file)
    report = core.validate_sequential(P)
    return {"valid": report.ok, "representation": P.representation, **report.to_json()}, None


def cmd_member(args):
    from .polytopes import member_bell_local, member_postloc, member_toloc
    P = _load_correlations(args.file)
    if args.set == "toloc":
        res = member_toloc(P)
    elif args.set == "bell":
        res = member_bell_local(P)
    else:
        res = member_postloc(P)
        cert = res.to_json()
        cert.pop("member")
        return {"member": res.member, "failures": list(res.failures)}, cert
    cert = res.to_json()
    cert.pop("member")
    return {"member": res.member}, cert


def _facet_summary(facets, records):
    from .polytopes.strategies import toloc_vertex_set
    from .polytopes.symmetry import NONADAPTIVE, TAGS, classify_facets
    from .polytopes.functionals import builtin
    forms = {f.canonical_correlator() for f in facets}
    found = {name: builtin(name).canonical_correlator() in forms for _, name in TAGS}
    full = classify_facets(facets)
    fine = classify_facets(facets, NONADAPTIVE)
    return {"vertex_count": len(toloc_vertex_set(BINARY_12)), "facet_count": len(facets),
            "orbit_count": len(full.orbits), "orbits": [{"label": o.label, "size": o.size} for o in full.orbits],
            "nonadaptive_orbit_count": len(fine.orbits),
            "nonadaptive_orbits": [{"label": o.label, "size": o.size} for o in fine.orbits],
            "builtins_present": found}


def cmd_facets(args):
    from .polytopes.facets import CACHE_VERSION, toloc_facets
    sc = _scenario(args.scenario)
    facets, records = toloc_facets(sc, with_records=True)
    summary = _facet_summary(facets, records)
    if args.out:
        _write_json(args.out, {"version": CACHE_VERSION, "scenario": sc.to_json(),
                               "vertex_count": summary["vertex_count"], "facet_count": len(records),
                               "facets": records})
        summary["out"] = args.out
    return summary, None


def cmd_classify(args):
    from .polytopes.facets import load_facet_records, records_to_functionals
    from .polytopes.symmetry import classify_facets
    try:
        records = load_facet_records(args.file)
        facets = records_to_functionals(records)
    except (OSError, json.JSONDecodeError, KeyError, TypeError) as e:
        raise InputError(f"cannot read facets from {args.file}: {e}") from None
    return classify_facets(facets, args.group).to_json(), None


def _lp_certificate(lp_result) -> dict:
    return {"status": lp_result.status,
            "dual_equalities": [str(v) for v in (lp_result.y_eq or [])],
            "dual_inequalities": [str(v) for v in (lp_result.y_ub or [])]}


def cmd_maximize(args):
    f = _functional(args.functional)
    if args.set == "postloc":
        from .polytopes.membership import maximize_over_postloc
        res = maximize_over_postloc(f)
        result = {"set": "postloc", "functional": f.name, "optimum": number(res.optimum),
                  "bound": number(f.bound), "violates_bound": res.optimum > f.bound}
        cert = {"maximizer": res.maximizer.to_json(), "dual": _lp_certificate(res.lp)}
        return result, cert
    from .oplocal import oplocal_lp
    res = oplocal_lp(f)
    result = {"set": "oplocal", "functional": f.name, "optimum": number(res.optimum),
              "toloc_maximum": number(res.toloc_maximum), "equal": res.equal,
              "constraint_count": res.constraint_count}
    cert = {"maximizer": res.maximizer.to_json(), "active": list(res.active), "dual": _lp_certificate(res.lp)}
    return result, cert


def _theorem_row(row) -> dict:
    return {"label": row.label, "orbit_size": row.orbit_size, "optimum": number(row.optimum),
            "toloc_maximum": number(row.toloc_maximum), "equal": row.equal}


def cmd_theorem1(args):
    from .oplocal import certify_builtins, certify_theorem1
    from .polytopes.facets import toloc_facets
    from .polytopes.symmetry import NONADAPTIVE

    def progress(row):
        if args.progress:
            print(f"{row.label}: {row.optimum} vs {row.toloc_maximum}", file=sys.stderr, flush=True)

    rows = certify_theorem1(toloc_facets(), progress=progress, group=NONADAPTIVE)
    named = certify_builtins(progress=progress)
    return {"group": NONADAPTIVE, "rows": [_theorem_row(r) for r in rows],
            "builtins": [_theorem_row(r) for r in named],
            "all_equal": all(r.equal for r in rows + named)}, None


def cmd_demo(args):
    from . import quantum
    if args.which == "popescu":
        if args.d is None:
            raise InputError("demo popescu needs --d")
        try:
            P, beta, state = quantum.popescu_protocol(args.d)
        except ValueError as e:
            raise InputError(str(e)) from None
        closed = quantum.popescu_closed_form(args.d)
        err = float(np.max(np.abs(state - quantum.popescu_branch_state_closed_form(args.d))))
        result = {"d": args.d, "beta": number(beta), "closed_form": number(closed),
                  "closed_form_expression": f"2*sqrt(2)*{args.d}/{args.d + 2}",
                  "beta_error": _decimal(abs(beta - closed)), "violates_chsh": beta > 2,
                  "branch_state_error": _decimal(err),
                  "branch_state_real": [[_decimal(v.real) for v in row] for row in state]}
    else:
        from .polytopes import member_postloc, member_toloc
        from .polytopes.facets import toloc_facets
        from .polytopes.symmetry import FULL, NONADAPTIVE, classify_facets, orbit_of
        from .polytopes.functionals import sequential_chsh
        P, report = quantum.ghz_example(check_bell_local=False)
        R, pert = quantum.rationalize(P, args.denominator_bound)
        post = member_postloc(R)
        to = member_toloc(R)
        separating = None
        if to.functional is not None:
            form = to.functional.canonical_correlator()
            facets = toloc_facets()
            labels = {f.canonical_correlator(): f.name for f in facets}
            fine = classify_facets(facets, NONADAPTIVE)
            fine_labels = {facets[i].canonical_correlator(): o.label for o in fine.orbits for i in o.members}
            separating = {"facet_orbit": labels.get(form), "facet_orbit_nonadaptive": fine_labels.get(form),
                          "in_sequential_chsh_orbit": form in orbit_of(sequential_chsh(), FULL),
                          "value": number(to.functional.value(R)), "bound": number(to.functional.bound)}
        result = {"beta": number(report.beta), "target": number(2 * math.sqrt(2)),
                  "conditioned_chsh": [{"y1": y1, "b1": b1, "chsh": number(v)}
                                       for (y1, b1), v in sorted(report.conditioned_chsh.items())],
                  "rationalized": {"denominator_bound": args.denominator_bound, "max_perturbation": _decimal(pert),
                                   "beta": number(sequential_chsh().value(R)),
                                   "member_postloc": post.member, "postloc_failures": list(post.failures),
                                   "member_toloc": to.member, "toloc_separating": separating}}
    if args.export:
        _write_json(args.export, P.to_json())
        result["export"] = args.export
    return result, None


def cmd_wire(args):
    from .wirings import apply_wiring, load_wiring
    P = _load_correlations(args.file)
    try:
        w = load_wiring(args.wiring)
    except (OSError, json.JSONDecodeError) as e:
        raise InputError(f"cannot read wiring from {args.wiring}: {e}") from None
    core.require_sequential(P)
    Q = apply_wiring(P, w)
    result = {"correlations": Q.to_json()}
    if Q.scenario == core.BINARY_11:
        from .polytopes.membership import fine_local
        from .polytopes.functionals import chsh_values
        result["chsh"] = [number(v) for v in chsh_values(list(Q.flat()))]
        result["bell_local"] = fine_local(Q)
    return result, None


def cmd_rationalize(args):
    from .quantum import rationalize
    P = _load_correlations(args.file)
    Q, pert = rationalize(P, args.denominator_bound, cap=args.cap)
    return {"correlations": Q.to_json(), "max_perturbation": _decimal(pert)}, None


# ---------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="seqloc", description="Locality tests for sequential correlations.")
    p.add_argument("--timing", action="store_true", help="include wall time in the output")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("validate", help="check normalization and the arrow-of-time conditions")
    s.add_argument("file")
    s.set_defaults(run=cmd_validate)

    s = sub.add_parser("member", help="membership in a locality set, with a certificate")
    s.add_argument("--set", required=True, choices=["toloc", "postloc", "bell"])
    s.add_argument("file")
    s.set_defaults(run=cmd_member)

    s = sub.add_parser("facets", help="facets of the time-ordered local polytope")
    s.add_argument("--scenario", required=True)
    s.add_argument("--out")
    s.set_defaults(run=cmd_facets)

    s = sub.add_parser("classify", help="orbits of a facet list under relabelings")
    s.add_argument("file")
    s.add_argument("--group", choices=["full", "nonadaptive"], default="full")
    s.set_defaults(run=cmd_classify)

    s = sub.add_parser("maximize", help="maximize a functional over PostLoc or the operational program")
    s.add_argument("--set", required=True, choices=["postloc", "oplocal"])
    s.add_argument("--functional", required=True)
    s.set_defaults(run=cmd_maximize)

    s = sub.add_parser("theorem1", help="operational program versus time-ordered maximum per facet orbit")
    s.add_argument("--progress", action="store_true", help="report each orbit on standard error")
    s.set_defaults(run=cmd_theorem1)

    s = sub.add_parser("demo", help="quantum constructions")
    s.add_argument("which", choices=["popescu", "ghz"])
    s.add_argument("--d", type=int)
    s.add_argument("--export")
    s.add_argument("--denominator-bound", type=int, default=10 ** 6)
    s.set_defaults(run=cmd_demo)

    s = sub.add_parser("wire", help="apply a sequential wiring")
    s.add_argument("file")
    s.add_argument("--wiring", required=True)
    s.set_defaults(run=cmd_wire)

    s = sub.add_parser("rationalize", help="exact correlations near a floating tensor")
    s.add_argument("file")
    s.add_argument("--denominator-bound", type=int, required=True)
    s.add_argument("--cap", type=float, default=1e-6)
    s.set_defaults(run=cmd_rationalize)
    return p


def run(argv=None) -> tuple[int, dict]:
    """Execute one command; returns ``(exit_code, document)``."""
    args = build_parser().parse_args(argv)
    echo = ["seqloc"] + list(sys.argv[1:] if argv is None else argv)
    doc = {"command": echo}
    start = time.perf_counter()
    code = EXIT_OK
    try:
        result, cert = args.run(args)
        doc.update(status="ok", result=result, certificate=cert)
    except (ArithmeticError, CertificateError, LpError, DDError) as e:
        code = EXIT_NUMERIC
        doc.update(status="error", result=None, certificate=None, error=f"{type(e).__name__}: {e}")
    except (InputError, TypeError, KeyError, ValueError) as e:
        # ShapeError, NegativeEntryError, PostselectionError and rational-input
        # errors all derive from ValueError or TypeError
        code = EXIT_INPUT
        doc.update(status="error", result=None, certificate=None, error=f"{type(e).__name__}: {e}")
    if args.timing:
        doc["wall_time"] = round(time.perf_counter() - start, 3)
    return code, doc


def main(argv=None) -> int:
    try:
        code, doc = run(argv)
    except SystemExit as e:  # argparse already printed usage to stderr
        return int(e.code) if isinstance(e.code, int) else EXIT_INPUT
    json.dump(doc, sys.stdout, indent=2, sort_keys=True)
    sys.stdout.write("\n")
    if code != EXIT_OK:
        print(doc["error"], file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
