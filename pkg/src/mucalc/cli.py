"""Command-line interface: every pipeline as a subcommand of one binary.

Exit codes: 0 success/valid; 1 property violated (a witness file is written);
2 input error; 3 UNKNOWN oracle verdict under the fail policy; 4 internal
invariant breach.
"""
from __future__ import annotations

import argparse
import json
import sys

from .canonical import (
    DEFAULT_MAX_STATES, DEFAULT_UNFOLD_DEPTH, VerdictCache, build_canonical,
    distinctness_check, existence_check, sat_search, truth_lemma_check,
)
from .errors import InputError, MucalcError, UnknownVerdictError
from .filtration import (
    STRATEGIES, FiltrationError, build_filtration, filtration_agreement_check,
    fmp_search,
)
from .kripke import FrameClass
from .proofs import CheckError, check_derivation, load_derivation
from .semantics import model_check, model_check_equiv
from .syntax import canonicalize, classify_fragment, fl_closure
from .textio import (
    ParseError, parse_formula_lines, print_formula, read_model,
)

EXIT_OK = 0
EXIT_VIOLATION = 1
EXIT_INPUT = 2
EXIT_UNKNOWN = 3
EXIT_INTERNAL = 4


def _emit(args, doc, human_lines):
    if args.json:
        print(json.dumps(doc, sort_keys=True, default=str))
    else:
        for line in human_lines:
            print(line)


def _witness(args, doc):
    path = args.witness_out
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=1, sort_keys=True, default=str)
    print(f"witness written to {path}", file=sys.stderr)


def _read_formulas(path):
    with open(path) as fh:
        return parse_formula_lines(fh.read())


def _read_model(path):
    with open(path) as fh:
        return read_model(fh.read())


def _frame_class(name):
    try:
        return FrameClass[name]
    except KeyError:
        raise InputError(f"unknown frame class {name!r}")


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_fmt(args):
    for f in _read_formulas(args.file):
        printed = print_formula(canonicalize(f))
        _emit(args, {"formula": printed}, [printed])
    return EXIT_OK


def cmd_classify(args):
    xs = set(args.vars.split(",")) - {""} if args.vars else set()
    for f in _read_formulas(args.file):
        verdict, in_fragment = classify_fragment(f, xs)
        printed = print_formula(canonicalize(f))
        _emit(args,
              {"formula": printed, "fragment": verdict.name,
               "mucalc": in_fragment},
              [f"{printed}: {verdict.name} mucalc={in_fragment}"])
    return EXIT_OK


def cmd_closure(args):
    members = fl_closure(_read_formulas(args.file), with_negations=args.neg)
    printed = [print_formula(g) for g in members]
    _emit(args, {"size": len(printed), "members": printed},
          [f"{len(printed)} members:"] + [f"  {p}" for p in printed])
    return EXIT_OK


def cmd_mc(args):
    model = _read_model(args.model)
    status = EXIT_OK
    for f in _read_formulas(args.formula):
        printed = print_formula(canonicalize(f))
        if args.engine == "both":
            rep = model_check_equiv(f, model)
            sat = sorted(model_check(f, model, engine="algebraic"))
            doc = {"formula": printed, "engines_agree": rep.ok,
                   "positions": rep.positions_checked, "sat": sat,
                   "mismatches": rep.mismatches}
            _emit(args, doc,
                  [f"{printed}: sat={{{','.join(sat)}}} "
                   f"engines_agree={rep.ok} positions={rep.positions_checked}"])
            if not rep.ok:
                _witness(args, {"subcommand": "mc", "model": args.model,
                                "formula": printed,
                                "mismatches": rep.mismatches})
                status = EXIT_VIOLATION
        else:
            sat = sorted(model_check(f, model, engine=args.engine))
            _emit(args, {"formula": printed, "engine": args.engine, "sat": sat},
                  [f"{printed}: sat={{{','.join(sat)}}}"])
    return status


def cmd_filtrate(args):
    model = _read_model(args.model)
    sigma = fl_closure(_read_formulas(args.sigma))
    fr = build_filtration(model, sigma, args.strategy)
    if not args.json:
        print(fr.to_json())
    else:
        print(json.dumps(json.loads(fr.to_json()), sort_keys=True))
    if args.check:
        rep = filtration_agreement_check(fr, include_nonfragment=True)
        _emit(args,
              {"check": "agreement", "ok": rep.ok, "checked": rep.checked,
               "violations": rep.violations},
              [f"agreement: ok={rep.ok} checked={rep.checked}"]
              + [f"  disagree {v!r}" for v in rep.violations])
        if not rep.ok:
            _witness(args, {"subcommand": "filtrate", "model": args.model,
                            "sigma": args.sigma, "strategy": args.strategy,
                            "violations": rep.violations})
            return EXIT_VIOLATION
    return EXIT_OK


def cmd_fmp(args):
    cls = _frame_class(getattr(args, "class"))
    witness = _read_model(args.witness)
    for f in _read_formulas(args.formula):
        fr = fmp_search(f, cls, witness)
        bound = 2 ** len(fl_closure([f]))
        printed = print_formula(canonicalize(f))
        _emit(args,
              {"formula": printed, "class": cls.value,
               "states": len(fr.quotient.states), "bound": bound,
               "quotient": json.loads(fr.to_json())},
              [f"{printed}: countermodel with {len(fr.quotient.states)} "
               f"states (bound {bound})", fr.to_json()])
    return EXIT_OK


def cmd_sat(args):
    cls = _frame_class(getattr(args, "class"))
    cache = VerdictCache()
    status = EXIT_OK
    for f in _read_formulas(args.formula):
        printed = print_formula(canonicalize(f))
        verdict = sat_search(f, cls, max_states=args.max_states,
                             unfold_depth=args.depth, cache=cache)
        doc = {"formula": printed, "class": cls.value,
               "status": verdict.status, "method": verdict.method}
        human = [f"{printed}: {verdict.status} ({verdict.method})"]
        if verdict.witness is not None:
            from .textio import write_model
            doc["witness"] = json.loads(write_model(verdict.witness))
            doc["witness_state"] = verdict.witness_state
            human.append(f"  witness state {verdict.witness_state} in:")
            human.append(write_model(verdict.witness))
        _emit(args, doc, human)
        if verdict.status == "UNKNOWN":
            status = EXIT_UNKNOWN
    return status


def cmd_canonical(args):
    sigma = fl_closure(_read_formulas(args.sigma), with_negations=True)
    cm = build_canonical(sigma, args.logic, strategy=args.strategy,
                         unknown=args.unknown, cache=VerdictCache())
    doc = {"logic": cm.logic,
           "atoms": {a.name: [print_formula(g) for g in a.members]
                     for a in cm.atoms},
           "relation": sorted(list(e) for e in cm.model.relation),
           "warnings": cm.warnings}
    human = [f"canonical model over {len(cm.sigma)} formulas: "
             f"{len(cm.atoms)} atoms"]
    for a in cm.atoms:
        human.append(f"  {a.name}: " + " & ".join(print_formula(g)
                                                  for g in a.members))
    human.append("  relation: " + " ".join(f"{a}->{b}" for a, b
                                           in sorted(cm.model.relation)))
    _emit(args, doc, human)
    if args.check_all:
        failures = []
        for rep in (existence_check(cm), distinctness_check(cm),
                    truth_lemma_check(cm)):
            _emit(args, {"check": rep.name, "ok": rep.ok,
                         "checked": rep.checked, "violations": rep.violations},
                  [f"{rep.name}: ok={rep.ok} checked={rep.checked}"])
            if not rep.ok:
                failures.append((rep.name, rep.violations))
        if failures:
            _witness(args, {"subcommand": "canonical", "sigma": args.sigma,
                            "logic": args.logic, "failures": failures})
            return EXIT_VIOLATION
    return EXIT_OK


def cmd_prove(args):
    try:
        doc = load_derivation(args.file)
        theorem = check_derivation(doc)
    except CheckError as e:
        _emit(args, {"ok": False, "step": e.step, "reason": e.reason},
              [f"REJECTED at step {e.step}: {e.reason}"])
        _witness(args, {"subcommand": "prove", "file": args.file,
                        "step": e.step, "reason": e.reason})
        return EXIT_VIOLATION
    printed = print_formula(theorem.formula)
    _emit(args, {"ok": True, "logic": theorem.logic, "theorem": printed,
                 "hash": theorem.derivation_hash},
          [f"theorem ({theorem.logic}): {printed}",
           f"derivation hash: {theorem.derivation_hash}"])
    return EXIT_OK


def cmd_selftest(args):
    from .selftest import run_selftest
    ok, text = run_selftest(seed=args.seed, jobs=args.jobs)
    sys.stdout.write(text)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    return EXIT_OK if ok else EXIT_VIOLATION


# ---------------------------------------------------------------------------
# argument parsing and dispatch
# ---------------------------------------------------------------------------

def _build_parser():
    parser = argparse.ArgumentParser(
        prog="mucalc",
        description="continuous modal mu-calculus toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, fn, **kwargs):
        p = sub.add_parser(name, **kwargs)
        p.set_defaults(fn=fn)
        p.add_argument("--json", action="store_true",
                       help="one JSON report object per line")
        p.add_argument("--witness-out", default="mucalc-witness.json",
                       help="where to write the witness on a failure exit")
        return p

    p = add("fmt", cmd_fmt, help="parse and pretty-print formulas")
    p.add_argument("file")

    p = add("classify", cmd_classify, help="fragment classification")
    p.add_argument("file")
    p.add_argument("--vars", default="", help="comma-separated variable set X")

    p = add("closure", cmd_closure, help="FL-closure of a formula set")
    p.add_argument("file")
    p.add_argument("--neg", action="store_true", help="negation-closed")

    p = add("mc", cmd_mc, help="model check formulas on a model")
    p.add_argument("--model", required=True)
    p.add_argument("--formula", required=True)
    p.add_argument("--engine", default="algebraic",
                   choices=("algebraic", "game", "both"))

    p = add("filtrate", cmd_filtrate, help="filtration quotient")
    p.add_argument("--model", required=True)
    p.add_argument("--sigma", required=True,
                   help="formula file; sigma is its FL-closure")
    p.add_argument("--strategy", default="min", choices=STRATEGIES)
    p.add_argument("--check", action="store_true",
                   help="run the agreement check on all sigma members")

    p = add("fmp", cmd_fmp, help="finite countermodel via filtration")
    p.add_argument("--formula", required=True)
    p.add_argument("--class", required=True,
                   choices=tuple(c.name for c in FrameClass))
    p.add_argument("--witness", required=True, help="refuting model file")

    p = add("sat", cmd_sat, help="bounded satisfiability oracle")
    p.add_argument("--formula", required=True)
    p.add_argument("--class", default="K",
                   choices=tuple(c.name for c in FrameClass))
    p.add_argument("--max-states", type=int, default=DEFAULT_MAX_STATES)
    p.add_argument("--depth", type=int, default=DEFAULT_UNFOLD_DEPTH,
                   help="refuter unfolding depth")

    p = add("canonical", cmd_canonical, help="finitary canonical model")
    p.add_argument("--sigma", required=True,
                   help="formula file; sigma is its negation-closed closure")
    p.add_argument("--logic", default="K", choices=tuple(c.name for c in FrameClass))
    p.add_argument("--strategy", default=None, choices=STRATEGIES)
    p.add_argument("--check-all", action="store_true",
                   help="run existence, distinctness, and truth checks")
    p.add_argument("--unknown", default="fail",
                   choices=("fail", "exclude", "include"))

    p = add("prove", cmd_prove, help="check a .drv derivation")
    p.add_argument("file")

    p = add("selftest", cmd_selftest, help="run the acceptance suite")
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", default=None, help="also write the report here")

    return parser


def dispatch(argv) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except (ParseError, InputError, FileNotFoundError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT
    except UnknownVerdictError as e:
        print(f"unknown: {e}", file=sys.stderr)
        return EXIT_UNKNOWN
    except FiltrationError as e:
        print(f"violation: {e}", file=sys.stderr)
        _witness(args, {"subcommand": args.command, "error": str(e)})
        return EXIT_VIOLATION
    except MucalcError as e:
        print(f"internal invariant breach: {e}", file=sys.stderr)
        return EXIT_INTERNAL


def main():
    sys.exit(dispatch(sys.argv[1:]))


if __name__ == "__main__":
    main()
