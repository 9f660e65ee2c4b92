"""Command-line front end.

Input files use the text format described in :mod:`qspec.syntax` (``.qs``) or
its JSON mirror (``.qs.json``).

Exit codes: 0 verdict true or value computed, 1 verdict false, 2 usage, parse or
validation error, 3 unsupported operation or exceeded budget.
"""
import argparse
import dataclasses
import json
import logging
import math
import os
import sys

from .errors import (BudgetError, CapabilityError, KindMismatchError, ParseError, QSpecError,
                     StructureMismatchError, ValidationError)
from .model import SpecDocument, canon, is_implementation, translate, validate
from .ops import compose, conjoin, disjoin, inconsistent_initials, prune_inconsistent, quotient
from .quant import DEFAULT_TOL, make_metric, refinement_distance, thorough_distance_oracle
from .refine import mc_nu, refines, tr_oracle
from .syntax import load_spec, parse_json, parse_spec, relabel_states, serialize

log = logging.getLogger(__name__)

# the parser and serializers are part of the front end as well
__all__ = ["load_spec", "main", "parse_json", "parse_spec", "run_command", "serialize"]

EXIT_TRUE, EXIT_FALSE, EXIT_USAGE, EXIT_CAPABILITY = 0, 1, 2, 3


class UsageError(QSpecError):
    pass


def _fmt_value(v):
    if v == math.inf:
        return "inf"
    return repr(round(v, 9))


def _with_structure(system, ls):
    if system.ls == ls:
        return system
    return dataclasses.replace(system, ls=ls)


def _load(args):
    if not args.files:
        raise UsageError("no input files given")
    doc = load_spec(args.files)
    if doc.label_structure is None:
        raise UsageError("input declares no label structure")
    if getattr(args, "sync", None):
        ls = doc.label_structure.with_sync(args.sync)
        doc = SpecDocument(ls, {n: _with_structure(s, ls) for n, s in doc.systems.items()})
    return doc


def _get(doc, name, flag):
    if name is None:
        raise UsageError(f"missing {flag}")
    try:
        return doc.systems[name]
    except KeyError:
        raise UsageError(f"no system named {name!r}; known: {', '.join(sorted(doc.systems))}") from None


def _metric(args):
    lam = args.lam if args.metric == "discounting" else None
    try:
        return make_metric(args.metric, lam)
    except ValueError as err:
        raise UsageError(str(err)) from None


def _emit(args, payload, text):
    if args.format == "json":
        print(json.dumps(payload, sort_keys=True))
    else:
        print(text)


def _write_system(args, doc, system, default_name):
    name = args.name or default_name
    out = SpecDocument(doc.label_structure, {name: relabel_states(system)})
    fmt = "json" if (args.out and args.out.endswith(".json")) or args.format == "json" else "text"
    data = serialize(out, fmt)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(data)
        print(f"wrote {name} ({system.kind}, {len(system.states)} states) to {args.out}")
    else:
        sys.stdout.write(data)
    return EXIT_TRUE


# -- subcommands -------------------------------------------------------------------

def cmd_validate(args):
    doc = load_spec(args.files, check=False)
    ok = True
    report = {}
    for name in sorted(doc.systems):
        system = doc.systems[name]
        problems = validate(system)
        ok = ok and not problems
        report[name] = {"kind": system.kind, "violations": problems,
                        "implementation": not problems and is_implementation(system)}
    if args.format == "json":
        print(json.dumps(report, sort_keys=True))
    else:
        for name, r in report.items():
            if r["violations"]:
                print(f"{name}: {len(r['violations'])} violation(s)")
                for p in r["violations"]:
                    print(f"  - {p}")
            else:
                extra = ", implementation" if r["implementation"] else ""
                print(f"{name}: ok ({r['kind']}{extra})")
    return EXIT_TRUE if ok else EXIT_FALSE


def cmd_refine(args):
    doc = _load(args)
    left, right = _get(doc, args.left, "--left"), _get(doc, args.right, "--right")
    if left.kind != right.kind and "lts" not in (left.kind, right.kind):
        left, right = translate(left, "aa"), translate(right, "aa")
    w = refines(left, right)
    text = "true" if w.holds else "false"
    if not w.holds and w.failure:
        (s1, s2), why = w.failure
        text += f"\n  {canon(s1)} vs {canon(s2) if s2 is not None else '-'}: {why}"
    payload = {"refines": w.holds, "relation_size": len(w.relation)}
    if args.max_states:
        b = tr_oracle(left, right, args.max_states)
        payload["thorough_bounded"] = b.holds
        text += f"\nthorough (implementations up to {args.max_states} states): {'true' if b.holds else 'false'}"
    _emit(args, payload, text)
    return EXIT_TRUE if w.holds else EXIT_FALSE


def cmd_distance(args):
    doc = _load(args)
    left, right = _get(doc, args.left, "--left"), _get(doc, args.right, "--right")
    if left.kind != right.kind and "lts" not in (left.kind, right.kind):
        left, right = translate(left, "aa"), translate(right, "aa")
    value, table = refinement_distance(left, right, _metric(args), args.tol)
    payload = {"value": _fmt_value(value) if value == math.inf else round(value, 9),
               "converged": table.converged, "error_bound": table.error_bound,
               "rounds": table.rounds}
    text = _fmt_value(value)
    if args.max_states:
        b = thorough_distance_oracle(left, right, _metric(args), args.max_states, tol=args.tol)
        payload["thorough_bounded"] = _fmt_value(b.value)
        text += f"\nthorough (implementations up to {args.max_states} states): {_fmt_value(b.value)}"
    if args.table:
        payload["table"] = json.loads(table.to_json())["pairs"]
    _emit(args, payload, text)
    return EXIT_TRUE


def cmd_mc(args):
    doc = _load(args)
    impl, spec = _get(doc, args.left, "--left"), _get(doc, args.right, "--right")
    if impl.kind != "lts":
        raise UsageError("--left must name an LTS")
    holds = mc_nu(impl, spec)
    _emit(args, {"models": holds}, "true" if holds else "false")
    return EXIT_TRUE if holds else EXIT_FALSE


def cmd_member(args):
    doc = _load(args)
    impl, spec = _get(doc, args.left, "--left"), _get(doc, args.right, "--right")
    if impl.kind != "lts":
        raise UsageError("--left must name an LTS")
    if spec.kind not in ("dmts", "aa", "nu"):
        spec = translate(spec, "dmts")
    value, _ = refinement_distance(impl, spec, _metric(args), args.tol)
    holds = value <= args.alpha
    _emit(args, {"member": holds, "distance": _fmt_value(value), "alpha": args.alpha},
          f"{'true' if holds else 'false'} (distance {_fmt_value(value)}, alpha {args.alpha:g})")
    return EXIT_TRUE if holds else EXIT_FALSE


def cmd_compose(args):
    doc = _load(args)
    left, right = _get(doc, args.left, "--left"), _get(doc, args.right, "--right")
    return _write_system(args, doc, compose(left, right), f"{args.left}_par_{args.right}")


def cmd_conjoin(args):
    doc = _load(args)
    left, right = _get(doc, args.left, "--left"), _get(doc, args.right, "--right")
    return _write_system(args, doc, conjoin(left, right), f"{args.left}_and_{args.right}")


def cmd_disjoin(args):
    doc = _load(args)
    left, right = _get(doc, args.left, "--left"), _get(doc, args.right, "--right")
    if left.kind != right.kind:
        left, right = translate(left, "aa"), translate(right, "aa")
    return _write_system(args, doc, disjoin(left, right), f"{args.left}_or_{args.right}")


def cmd_quotient(args):
    doc = _load(args)
    a3 = _get(doc, args.dividend, "--dividend")
    a1 = _get(doc, args.divisor, "--divisor")
    q = quotient(a3, a1, split=not args.no_split, budget=args.budget)
    if args.prune:
        q = prune_inconsistent(q)
    return _write_system(args, doc, q, f"{args.dividend}_by_{args.divisor}")


def cmd_translate(args):
    doc = _load(args)
    system = _get(doc, args.left, "--left")
    if args.src and system.kind != args.src:
        raise UsageError(f"{args.left} is a {system.kind}, not a {args.src}")
    if not args.to:
        raise UsageError("missing --to")
    return _write_system(args, doc, translate(system, args.to), f"{args.left}_{args.to}")


def cmd_prune(args):
    doc = _load(args)
    system = _get(doc, args.left, "--left")
    pruned = prune_inconsistent(system)
    bad = inconsistent_initials(pruned)
    if bad:
        print("inconsistent initial states: " + ", ".join(sorted(canon(s) for s in bad)), file=sys.stderr)
    return _write_system(args, doc, pruned, f"{args.left}_pruned")


# -- manifest runner ---------------------------------------------------------------

_BUILDERS = {
    "compose": lambda doc, c: compose(doc[c["left"]], doc[c["right"]]),
    "conjoin": lambda doc, c: conjoin(doc[c["left"]], doc[c["right"]]),
    "disjoin": lambda doc, c: disjoin(doc[c["left"]], doc[c["right"]]),
    "quotient": lambda doc, c: quotient(doc[c["dividend"]], doc[c["divisor"]]),
    "translate": lambda doc, c: translate(doc[c["left"]], c["to"]),
    "prune": lambda doc, c: prune_inconsistent(doc[c["left"]]),
}


def _run_check(doc, c):
    c = dict(c)
    op = c["op"]
    ops = c.pop("operands", None)
    if ops:
        keys = ("dividend", "divisor") if op == "quotient" else ("left", "right")
        c.update(zip(keys, ops))
    c.update(c.pop("params", None) or {})
    if op in _BUILDERS:
        result = _BUILDERS[op](doc, c)
        name = c.get("name") or f"_{op}_{len(doc.systems)}"
        doc.systems[name] = result
        return None, f"built {name} ({result.kind}, {len(result.states)} states)"
    left, right = doc[c["left"]], doc[c["right"]]
    if left.kind != right.kind and "lts" not in (left.kind, right.kind):
        left, right = translate(left, "aa"), translate(right, "aa")
    if op == "refine":
        got = refines(left, right).holds
    elif op == "mc":
        got = mc_nu(left, right)
    elif op in ("distance", "member"):
        metric = make_metric(c.get("metric", "discounting"), c.get("lambda"))
        value, _ = refinement_distance(left, right, metric, c.get("tol", DEFAULT_TOL))
        got = value if op == "distance" else value <= float(c.get("alpha", 0))
    else:
        raise UsageError(f"unknown check op {op!r}")
    if "expect" not in c:
        return None, f"{op}: {got}"
    expect = c["expect"]
    if op == "distance":
        expect = math.inf if expect in ("inf", math.inf) else float(expect)
        tol = float(c.get("tol", 1e-6))
        ok = got == expect or abs(got - expect) <= tol
        return ok, f"{op} {c['left']} {c['right']}: {_fmt_value(got)} (expected {_fmt_value(expect)})"
    ok = bool(got) == bool(expect)
    return ok, f"{op} {c['left']} {c['right']}: {got} (expected {expect})"


def cmd_check(args):
    if len(args.files) != 1:
        raise UsageError("check takes exactly one manifest file")
    path = args.files[0]
    with open(path, encoding="utf-8") as fh:
        try:
            manifest = json.load(fh)
        except json.JSONDecodeError as err:
            raise ParseError(f"invalid manifest: {err.msg}", err.lineno, err.colno) from None
    base = os.path.dirname(os.path.abspath(path))
    files = [f if os.path.isabs(f) else os.path.join(base, f) for f in manifest.get("files", [])]
    doc = load_spec(files)
    all_ok = True
    for k, c in enumerate(manifest.get("checks", []), 1):
        try:
            ok, msg = _run_check(doc, c)
        except KeyError as err:
            raise UsageError(f"check {k}: unknown system or missing field {err}") from None
        status = {None: "INFO", True: "PASS", False: "FAIL"}[ok]
        all_ok = all_ok and ok is not False
        print(f"[{status}] {k}: {msg}")
    return EXIT_TRUE if all_ok else EXIT_FALSE


# -- argument parsing ----------------------------------------------------------------

def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("files", nargs="*", help=".qs or .qs.json files (merged)")
    common.add_argument("--format", choices=("text", "json"), default="text")
    common.add_argument("--sync", choices=("csp", "plus", "max", "cap"),
                        help="override the synchronization declared in the file")
    common.add_argument("-v", "--verbose", action="store_true")

    pair = argparse.ArgumentParser(add_help=False)
    pair.add_argument("--left")
    pair.add_argument("--right")
    oracle = argparse.ArgumentParser(add_help=False)
    oracle.add_argument("--max-states", type=int, default=0,
                        help="also run the bounded implementation-enumeration oracle")

    metric = argparse.ArgumentParser(add_help=False)
    metric.add_argument("--metric", choices=("discrete", "pointwise", "discounting"), default="discounting")
    metric.add_argument("--lambda", dest="lam", type=float, default=0.9)
    metric.add_argument("--tol", type=float, default=DEFAULT_TOL)

    output = argparse.ArgumentParser(add_help=False)
    output.add_argument("--out")
    output.add_argument("--name", help="name of the produced system")

    p = argparse.ArgumentParser(prog="qspec", description="Specification theories over structured labels.")
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("validate", parents=[common], help="check well-formedness").set_defaults(func=cmd_validate)
    sub.add_parser("refine", parents=[common, pair, oracle], help="modal refinement").set_defaults(func=cmd_refine)
    d = sub.add_parser("distance", parents=[common, pair, metric, oracle], help="refinement distance")
    d.add_argument("--table", action="store_true", help="include the per-pair table (json)")
    d.set_defaults(func=cmd_distance)
    sub.add_parser("mc", parents=[common, pair], help="does an LTS satisfy a specification").set_defaults(func=cmd_mc)
    m = sub.add_parser("member", parents=[common, pair, metric], help="relaxed implementation check")
    m.add_argument("--alpha", type=float, default=0.0)
    m.set_defaults(func=cmd_member)
    sub.add_parser("compose", parents=[common, pair, output]).set_defaults(func=cmd_compose)
    sub.add_parser("conjoin", parents=[common, pair, output]).set_defaults(func=cmd_conjoin)
    sub.add_parser("disjoin", parents=[common, pair, output]).set_defaults(func=cmd_disjoin)
    q = sub.add_parser("quotient", parents=[common, output])
    q.add_argument("--dividend")
    q.add_argument("--divisor")
    q.add_argument("--budget", type=int, default=None)
    q.add_argument("--no-split", action="store_true", help="do not split divisor states")
    q.add_argument("--prune", action="store_true", help="remove inconsistent states")
    q.set_defaults(func=cmd_quotient)
    t = sub.add_parser("translate", parents=[common, pair, output])
    t.add_argument("--from", dest="src", choices=("dmts", "aa", "nu", "lts"))
    t.add_argument("--to", choices=("dmts", "aa", "nu", "lts"))
    t.set_defaults(func=cmd_translate)
    sub.add_parser("prune", parents=[common, pair, output]).set_defaults(func=cmd_prune)
    sub.add_parser("check", parents=[common], help="run a JSON manifest of checks").set_defaults(func=cmd_check)
    return p


def run_command(argv):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_TRUE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (CapabilityError, BudgetError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_CAPABILITY
    except (ParseError, ValidationError, UsageError, KindMismatchError, StructureMismatchError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_USAGE


def main(argv=None):
    sys.exit(run_command(sys.argv[1:] if argv is None else argv))


if __name__ == "__main__":
    main()
