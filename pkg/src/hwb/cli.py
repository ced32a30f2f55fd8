"""Command-line surface for the workbench.

Every subcommand reads `.hwb` documents, runs one library operation, and
reports in text or JSON.  Exit codes are total: 0 when the queried property
holds or the construction succeeds, 1 when it is refuted or violations are
found, 2 when the verdict is inconclusive within the given bounds, and 3
for usage or input errors (diagnostics go to standard error).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time

from . import forcing, kripke, oracle, suites, syntax, textio
from .errors import (
    BudgetExceeded, ConsistencyLost, HwbError, JointConsistencyLost,
    OracleInconclusive, ParseError, ReductMismatch, ResolveError,
)
from .kripke import (
    amalgamate, generated_submodel, quasi_isomorphic, reduct, satisfies,
)
from .oracle import (
    DomainSpec, ExhaustedComplete, NoneWithinBounds, Refuted, SearchBounds,
)
from .sigcat import check_cip_criterion, check_square_criterion, pushout
from .textio import (
    json_bounds, json_criterion, json_model, json_oracle, json_run,
    json_signature, json_square_criterion, json_witness, load_document,
    print_model, print_morphism, print_signature, ser_sentence,
)

EXIT_HOLDS = 0
EXIT_REFUTED = 1
EXIT_INCONCLUSIVE = 2
EXIT_USAGE = 3

DEFAULT_BUDGET = 200000


class UsageError(HwbError):
    pass


class _Parser(argparse.ArgumentParser):
    """argparse exits with status 2 on bad flags; the contract wants 3."""

    def error(self, message):
        raise UsageError(message)


def _say(text):
    sys.stdout.write(text + "\n")


def _emit_json(payload):
    sys.stdout.write(json.dumps(payload, indent=2, sort_keys=True) + "\n")


# ---------------------------------------------------------------- resolution

def _split_ref(ref):
    """A block reference is PATH or PATH:NAME; the path wins when a file
    literally named PATH:NAME exists."""
    if os.path.exists(ref):
        return ref, None
    if ":" in ref:
        path, name = ref.rsplit(":", 1)
        return path, name or None
    return ref, None


def _load(path):
    try:
        return load_document(path)
    except FileNotFoundError:
        raise UsageError(f"no such file: {path}")
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc}")


def _pick(kind, ref):
    """Resolve PATH[:NAME] against one of the document's block tables."""
    path, name = _split_ref(ref)
    doc = _load(path)
    table = getattr(doc, kind + "s")
    if name is not None:
        if name not in table:
            raise UsageError(f"{path} has no {kind} named {name}")
        return doc, name, table[name]
    if len(table) == 1:
        name = next(iter(table))
        return doc, name, table[name]
    if not table:
        raise UsageError(f"{path} declares no {kind} block")
    raise UsageError(
        f"{path} declares {len(table)} {kind} blocks "
        f"({', '.join(sorted(table))}); use {path}:NAME")


def _signature_name(doc, sig):
    for name, candidate in doc.signatures.items():
        if candidate == sig:
            return name
    return "Sig"


def _resolve_sentence(doc, sig, text):
    """A sentence argument is either the name of a stored sentence over the
    same signature or literal sentence text."""
    if text in doc.sentences:
        stored_sig, phi = doc.sentences[text]
        if stored_sig == sig:
            return phi
    return textio.parse_sentence(sig, text)


# ---------------------------------------------------------------- bounds

def _add_bounds_flags(sub):
    sub.add_argument("--max-worlds", type=int, default=2, metavar="N")
    sub.add_argument("--max-carrier", action="append", default=[],
                     metavar="K|S=K",
                     help="uniform cap, or per-sort cap (repeatable)")
    sub.add_argument("--depth", type=int, default=2, metavar="D",
                     help="term depth bound")
    sub.add_argument("--mode", choices=["open", "closed"], default="open")
    sub.add_argument("--budget", type=int, default=None, metavar="N",
                     help="node budget (default HWB_BUDGET or "
                          f"{DEFAULT_BUDGET})")


def _bounds_from(args):
    uniform = 2
    per_sort = {}
    for entry in args.max_carrier:
        if "=" in entry:
            sort, _, size = entry.partition("=")
            try:
                per_sort[sort] = (0, int(size))
            except ValueError:
                raise UsageError(f"bad carrier bound {entry!r}")
        else:
            try:
                uniform = int(entry)
            except ValueError:
                raise UsageError(f"bad carrier bound {entry!r}")
    budget = args.budget
    if budget is None:
        try:
            budget = int(os.environ.get("HWB_BUDGET", DEFAULT_BUDGET))
        except ValueError:
            raise UsageError("HWB_BUDGET is not an integer")
    bounds = SearchBounds(
        max_worlds=args.max_worlds, max_carrier=uniform,
        term_depth=args.depth, budget=budget, mode=args.mode)
    domain = DomainSpec(tuple(per_sort.items())) if per_sort else None
    return bounds, domain


# ---------------------------------------------------------------- commands

def _cmd_check(args):
    worst = EXIT_HOLDS
    for path in args.inputs:
        if not os.path.exists(path):
            raise UsageError(f"no such file: {path}")
        try:
            doc = load_document(path)
        except HwbError as exc:
            sys.stderr.write(f"{path}: {exc}\n")
            worst = EXIT_REFUTED
            continue
        counts = ", ".join(
            f"{len(getattr(doc, kind))} {kind}"
            for kind in ["signatures", "morphisms", "squares",
                         "presentations", "models", "sentences"]
            if getattr(doc, kind))
        _say(f"{path}: ok ({counts or 'empty'})")
    return worst


def _cmd_pushout(args):
    doc, chi_name, chi = _pick("morphism", args.chi)
    doc_b, delta_name, delta = _pick("morphism", args.delta)
    square = pushout(chi, delta)
    if args.json:
        _emit_json({
            "schema": textio.SCHEMA,
            "kind": "pushout",
            "apex": json_signature(square.apex),
            "legA": {s: t for s, t in square.delta_a.sort_map},
            "legB": {s: t for s, t in square.chi_b.sort_map},
        })
        return EXIT_HOLDS
    _say(print_signature("Apex", square.apex))
    _say("")
    _say(print_morphism("into_apex_a", square.delta_a,
                        _signature_name(doc, chi.target), "Apex"))
    _say("")
    _say(print_morphism("into_apex_b", square.chi_b,
                        _signature_name(doc_b, delta.target), "Apex"))
    return EXIT_HOLDS


def _cmd_criterion(args):
    if args.square is None and args.morphism is None:
        raise UsageError("criterion needs --square or --morphism")
    if args.square is not None:
        _, name, square = _pick("square", args.square)
        report = check_square_criterion(square)
        if args.json:
            _emit_json(json_square_criterion(report))
        else:
            for leg in [report.chi_report, report.delta_report]:
                _say(_criterion_line(leg))
            _say(f"verdict: {report.verdict}")
        return EXIT_HOLDS if report.guaranteed else EXIT_REFUTED
    _, name, morphism = _pick("morphism", args.morphism)
    report = check_cip_criterion(morphism, name)
    if args.json:
        _emit_json(json_criterion(report))
    else:
        _say(_criterion_line(report))
    return EXIT_HOLDS if report.passed else EXIT_REFUTED


def _criterion_line(report):
    if report.passed:
        return f"{report.label}: pass"
    parts = [f"{rule} [{', '.join(str(s) for s in symbols)}]"
             if symbols else rule
             for rule, symbols in report.violations]
    return f"{report.label}: " + "; ".join(parts)


def _cmd_eval(args):
    doc, name, model = _pick("model", args.model)
    if args.world not in model.frame.worlds:
        raise UsageError(
            f"model {name} has no world {args.world} "
            f"(worlds: {', '.join(str(w) for w in model.frame.worlds)})")
    phi = _resolve_sentence(doc, model.sig, args.sentence)
    holds = satisfies(model, args.world, phi)
    if args.json:
        _emit_json({
            "schema": textio.SCHEMA,
            "kind": "eval",
            "model": name,
            "world": str(args.world),
            "sentence": ser_sentence(phi),
            "satisfied": holds,
        })
    else:
        _say("satisfied" if holds else "not satisfied")
    return EXIT_HOLDS if holds else EXIT_REFUTED


def _cmd_reduct(args):
    _, model_name, model = _pick("model", args.model)
    _, morphism_name, morphism = _pick("morphism", args.morphism)
    if morphism.target != model.sig:
        raise UsageError(
            f"morphism {morphism_name} does not target the signature "
            f"of model {model_name}")
    out = reduct(morphism, model)
    if args.json:
        _emit_json(json_model(out))
    else:
        doc = _load(_split_ref(args.morphism)[0])
        _say(print_model(f"{model_name}_reduct", out,
                         _signature_name(doc, out.sig)))
    return EXIT_HOLDS


def _cmd_gensub(args):
    doc, model_name, model = _pick("model", args.model)
    out = generated_submodel(model)
    if args.json:
        _emit_json(json_model(out))
    else:
        _say(print_model(f"{model_name}_generated", out,
                         _signature_name(doc, out.sig)))
    return EXIT_HOLDS


def _cmd_amalgamate(args):
    _, _, square = _pick("square", args.square)
    _, name_a, ma = _pick("model", args.model_a)
    _, name_b, mb = _pick("model", args.model_b)
    try:
        out = amalgamate(square, ma, mb)
    except ReductMismatch as exc:
        sys.stderr.write(f"base reducts disagree: {exc}\n")
        return EXIT_REFUTED
    if args.json:
        _emit_json(json_model(out))
    else:
        _say(print_model(f"{name_a}_{name_b}_amalgam", out, "Apex"))
    return EXIT_HOLDS


def _cmd_quasi_iso(args):
    _, name_a, ma = _pick("model", args.model_a)
    _, name_b, mb = _pick("model", args.model_b)
    pointed = None
    if args.pointed is not None:
        if "=" not in args.pointed:
            raise UsageError("--pointed takes WORLD_A=WORLD_B")
        wa, _, wb = args.pointed.partition("=")
        pointed = (wa, wb)
    witness = quasi_isomorphic(ma, mb, pointed=pointed)
    if witness is None:
        if args.json:
            _emit_json({"schema": textio.SCHEMA, "kind": "quasi-iso",
                        "isomorphic": False})
        else:
            _say("not quasi-isomorphic")
        return EXIT_REFUTED
    if args.json:
        payload = json_witness(witness)
        payload["isomorphic"] = True
        _emit_json(payload)
    else:
        _say("quasi-isomorphic")
        for w, v in witness.frame_map:
            _say(f"  {w} -> {v}")
    return EXIT_HOLDS


def _cmd_entail(args):
    doc, name, pres = _pick("presentation", args.presentation)
    goal = _resolve_sentence(doc, pres.signature, args.goal)
    bounds, domain = _bounds_from(args)
    try:
        verdict = oracle.entails(
            pres.signature, sorted(pres.sentences, key=ser_sentence),
            goal, bounds, domain)
    except BudgetExceeded as exc:
        sys.stderr.write(f"{exc}\n")
        return EXIT_INCONCLUSIVE
    if args.json:
        _emit_json(json_oracle(verdict, bounds))
        return _oracle_exit(verdict)
    if isinstance(verdict, Refuted):
        _say(f"refuted at world {verdict.world} "
             f"({verdict.nodes_visited} structures visited)")
        _say(print_model("countermodel", verdict.model,
                         _signature_name(doc, pres.signature)))
    elif isinstance(verdict, ExhaustedComplete):
        _say(f"holds throughout the closed bounded class "
             f"({verdict.nodes_visited} structures visited)")
    else:
        _say(f"inconclusive within bounds "
             f"({verdict.nodes_visited} structures visited)")
    return _oracle_exit(verdict)


def _oracle_exit(verdict):
    if isinstance(verdict, Refuted):
        return EXIT_REFUTED
    if isinstance(verdict, ExhaustedComplete):
        return EXIT_HOLDS
    return EXIT_INCONCLUSIVE


def _cmd_force(args):
    _, name, pres = _pick("presentation", args.presentation)
    bounds, _ = _bounds_from(args)
    gamma = sorted(pres.sentences, key=ser_sentence)
    try:
        seed = forcing.make_condition(pres.signature, gamma, bounds)
    except OracleInconclusive as exc:
        sys.stderr.write(f"{exc}\n")
        return EXIT_INCONCLUSIVE
    except HwbError as exc:
        sys.stderr.write(f"presentation {name} is not forceable: {exc}\n")
        return EXIT_REFUTED
    try:
        chain = forcing.build_generic(seed, args.steps, bounds,
                                      item_depth=args.depth)
    except (ConsistencyLost, OracleInconclusive, BudgetExceeded) as exc:
        sys.stderr.write(f"{exc}\n")
        return EXIT_INCONCLUSIVE
    holds = [ok for _, ok in chain.seed_report]
    if args.json:
        steps = [
            {"kind": "decision", "step": d.step, "decision": d.outcome,
             "nominal": None if d.nominal is None else str(d.nominal),
             "sentence": None if d.sentence is None
             else ser_sentence(d.sentence),
             "freshConstants": [list(c) for c in d.added]}
            for d in chain.decisions]
        _emit_json({
            "schema": textio.SCHEMA,
            "kind": "generic-chain",
            "steps": steps,
            "conditions": len(chain.conditions),
            "boundsUsed": json_bounds(bounds),
            "result": {
                "seedSentencesHold": holds,
                "model": json_model(chain.model),
            },
        })
        return EXIT_HOLDS if all(holds) else EXIT_INCONCLUSIVE
    for d in chain.decisions:
        if d.outcome == "skip":
            continue
        body = "" if d.sentence is None else f" {ser_sentence(d.sentence)}"
        _say(f"step {d.step}: {d.outcome} @{d.nominal}{body}")
    _say(f"conditions materialized: {len(chain.conditions)}")
    for phi, ok in chain.seed_report:
        status = {True: "holds", False: "FAILS", None: "undecided"}[ok]
        _say(f"seed {status}: {ser_sentence(phi)}")
    _say(print_model(f"{name}_generic", chain.model, "Extended"))
    return EXIT_HOLDS if all(holds) else EXIT_INCONCLUSIVE


def _cmd_interpolate(args):
    doc, name, square = _pick("square", args.square)
    phi_a = _resolve_sentence(doc, square.chi.target, args.phi_a)
    phi_b = _resolve_sentence(doc, square.delta.target, args.phi_b)
    bounds, _ = _bounds_from(args)
    try:
        run = forcing.interpolate(square, phi_a, phi_b, args.depth,
                                  args.rounds, bounds)
    except (OracleInconclusive, JointConsistencyLost, BudgetExceeded) as exc:
        sys.stderr.write(f"{exc}\n")
        return EXIT_INCONCLUSIVE
    if args.json:
        _emit_json(json_run(run))
    result = run.result
    if isinstance(result, forcing.Interpolant):
        if not args.json:
            _say(f"interpolant: {ser_sentence(result.sentence)}")
        return EXIT_HOLDS
    if isinstance(result, forcing.Witnesses):
        if not args.json:
            _say("no interpolant within bounds; witness pair extracted")
            _say(f"  left anchor world: {result.world_a}")
            _say(f"  right anchor world: {result.world_b}")
        return EXIT_REFUTED
    if not args.json:
        _say(f"inconclusive: {result.reason}")
    return EXIT_INCONCLUSIVE


def _cmd_suite(args):
    if args.name != "paper":
        raise UsageError(f"unknown suite {args.name!r} (try: paper)")
    report = suites.run_paper_suite(only=args.only)
    for row in report.rows:
        status = "pass" if row.passed else "FAIL"
        _say(f"{row.name:<24} {status:>4}  {row.seconds:7.2f}s  {row.detail}")
    _say(f"{report.passed}/{report.total} scenarios passed "
         f"in {report.seconds:.2f}s")
    return EXIT_HOLDS if report.passed == report.total else EXIT_REFUTED


# ---------------------------------------------------------------- driver

def _build_parser():
    parser = _Parser(prog="hwb", description=__doc__,
                     formatter_class=argparse.RawDescriptionHelpFormatter)
    subs = parser.add_subparsers(dest="subcommand", metavar="COMMAND")

    p = subs.add_parser("check", help="validate .hwb documents")
    p.add_argument("inputs", nargs="+", metavar="FILE")
    p.set_defaults(run=_cmd_check)

    p = subs.add_parser("pushout", help="pushout of a span of morphisms")
    p.add_argument("--chi", required=True, metavar="FILE[:NAME]")
    p.add_argument("--delta", required=True, metavar="FILE[:NAME]")
    p.add_argument("--json", action="store_true")
    p.set_defaults(run=_cmd_pushout)

    p = subs.add_parser("criterion",
                        help="interpolation criterion on a morphism or square")
    p.add_argument("--square", metavar="FILE[:NAME]")
    p.add_argument("--morphism", metavar="FILE[:NAME]")
    p.add_argument("--json", action="store_true")
    p.set_defaults(run=_cmd_criterion)

    p = subs.add_parser("eval", help="evaluate a sentence in a model")
    p.add_argument("--model", required=True, metavar="FILE[:NAME]")
    p.add_argument("--world", required=True)
    p.add_argument("--sentence", required=True)
    p.add_argument("--json", action="store_true")
    p.set_defaults(run=_cmd_eval)

    p = subs.add_parser("reduct", help="model reduct along a morphism")
    p.add_argument("--model", required=True, metavar="FILE[:NAME]")
    p.add_argument("--morphism", required=True, metavar="FILE[:NAME]")
    p.add_argument("--json", action="store_true")
    p.set_defaults(run=_cmd_reduct)

    p = subs.add_parser("amalgamate",
                        help="amalgamate two models over a square")
    p.add_argument("--square", required=True, metavar="FILE[:NAME]")
    p.add_argument("--model-a", required=True, metavar="FILE[:NAME]")
    p.add_argument("--model-b", required=True, metavar="FILE[:NAME]")
    p.add_argument("--json", action="store_true")
    p.set_defaults(run=_cmd_amalgamate)

    p = subs.add_parser("gensub", help="generated submodel")
    p.add_argument("--model", required=True, metavar="FILE[:NAME]")
    p.add_argument("--json", action="store_true")
    p.set_defaults(run=_cmd_gensub)

    p = subs.add_parser("quasi-iso",
                        help="quasi-isomorphism search between two models")
    p.add_argument("--model-a", required=True, metavar="FILE[:NAME]")
    p.add_argument("--model-b", required=True, metavar="FILE[:NAME]")
    p.add_argument("--pointed", metavar="WORLD_A=WORLD_B")
    p.add_argument("--json", action="store_true")
    p.set_defaults(run=_cmd_quasi_iso)

    p = subs.add_parser("entail", help="bounded entailment check")
    p.add_argument("--presentation", required=True, metavar="FILE[:NAME]")
    p.add_argument("--goal", required=True)
    p.add_argument("--json", action="store_true")
    _add_bounds_flags(p)
    p.set_defaults(run=_cmd_entail)

    p = subs.add_parser("force", help="build a generic chain and model")
    p.add_argument("--presentation", required=True, metavar="FILE[:NAME]")
    p.add_argument("--steps", type=int, default=40, metavar="N")
    p.add_argument("--json", action="store_true")
    _add_bounds_flags(p)
    p.set_defaults(run=_cmd_force)

    p = subs.add_parser("interpolate",
                        help="interpolant search with dual-chain fallback")
    p.add_argument("--square", required=True, metavar="FILE[:NAME]")
    p.add_argument("--phi-a", required=True,
                   help="sentence text or stored sentence name")
    p.add_argument("--phi-b", required=True)
    p.add_argument("--rounds", type=int, default=8, metavar="N")
    p.add_argument("--json", action="store_true")
    _add_bounds_flags(p)
    p.set_defaults(run=_cmd_interpolate)

    p = subs.add_parser("suite", help="run a bundled scenario suite")
    p.add_argument("name", metavar="NAME")
    p.add_argument("--only", metavar="SCENARIO")
    p.set_defaults(run=_cmd_suite)

    return parser


def run(argv=None):
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        if getattr(args, "run", None) is None:
            parser.print_help(sys.stderr)
            return EXIT_USAGE
        return args.run(args)
    except UsageError as exc:
        sys.stderr.write(f"hwb: {exc}\n")
        return EXIT_USAGE
    except ParseError as exc:
        sys.stderr.write(f"hwb: {exc}\n")
        return EXIT_USAGE
    except ResolveError as exc:
        sys.stderr.write(f"hwb: {exc}\n")
        return EXIT_USAGE
    except HwbError as exc:
        sys.stderr.write(f"hwb: {exc}\n")
        return EXIT_USAGE


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
