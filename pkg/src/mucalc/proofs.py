"""Hilbert-style derivation checking for the continuous modal mu-calculus
logics K, T, KB, K4, S4, S5.

A derivation is a JSON document: a logic id plus a list of steps. Every step
states its resulting formula; the checker recomputes the formula from the
rule's parameters and compares up to alpha-equivalence, so a derivation can
never smuggle in an unjustified conclusion.

Propositional reasoning is a single rule: any substitution instance of a
propositional tautology is accepted, decided by a truth table over the
maximal non-boolean subformulas (complementary pairs share a table entry).
"""
from __future__ import annotations

import hashlib
import itertools
import json
import random
from dataclasses import dataclass

from .errors import InputError, MucalcError
from .kripke import FrameClass, random_model
from .semantics import eval_algebraic
from .syntax import (
    And, Atom, Bottom, Box, Diamond, Formula, Mu, NegAtom, Nu, Or, TOP, Top,
    alpha_eq, alpha_key, bound_names, canonicalize, free_names, iff, implies,
    in_cocon, in_con, negate, substitute,
)


class CheckError(MucalcError):
    """A derivation step failed to check."""

    def __init__(self, step: int, reason: str):
        super().__init__(f"step {step}: {reason}")
        self.step = step
        self.reason = reason


LOGICS = ("K", "T", "KB", "K4", "S4", "S5")

EXTENSION_AXIOMS = {
    "K": frozenset(),
    "T": frozenset({"T"}),
    "KB": frozenset({"B"}),
    "K4": frozenset({"4"}),
    "S4": frozenset({"T", "4"}),
    "S5": frozenset({"T", "B", "4"}),
}

LOGIC_CLASS = {name: FrameClass[name] for name in LOGICS}

MAX_TAUT_UNITS = 16


def is_tautology_instance(f: Formula) -> bool:
    """True iff f is a substitution instance of a propositional tautology.

    The boolean skeleton keeps Or/And/Top/Bottom and treats every other
    subformula as an opaque unit; a unit whose negation is already a unit
    reuses that entry with flipped sign.
    """
    table = {}

    def skeleton(g):
        if isinstance(g, Top):
            return ("const", True)
        if isinstance(g, Bottom):
            return ("const", False)
        if isinstance(g, Or):
            return ("or", skeleton(g.left), skeleton(g.right))
        if isinstance(g, And):
            return ("and", skeleton(g.left), skeleton(g.right))
        key = alpha_key(canonicalize(g))
        neg_key = alpha_key(canonicalize(negate(g)))
        if key in table:
            return ("var", table[key], True)
        if neg_key in table:
            return ("var", table[neg_key], False)
        table[key] = len(table)
        return ("var", table[key], True)

    sk = skeleton(f)
    if len(table) > MAX_TAUT_UNITS:
        raise InputError(
            f"tautology check limited to {MAX_TAUT_UNITS} distinct units")

    def evaluate(node, assignment):
        tag = node[0]
        if tag == "const":
            return node[1]
        if tag == "var":
            value = assignment[node[1]]
            return value if node[2] else not value
        a = evaluate(node[1], assignment)
        b = evaluate(node[2], assignment)
        return (a or b) if tag == "or" else (a and b)

    return all(evaluate(sk, bits)
               for bits in itertools.product((False, True), repeat=len(table)))


@dataclass
class Theorem:
    formula: Formula
    logic: str
    derivation_hash: str


def _require(cond, step, reason):
    if not cond:
        raise CheckError(step, reason)


def _as_implication(f, step, what):
    _require(isinstance(f, Or), step, f"{what} is not an implication (top-level |)")
    return f.left, f.right


def _parse_step_formula(step_doc, key, k):
    from .textio import parse_formula
    if key not in step_doc:
        raise CheckError(k, f"missing field {key!r}")
    try:
        return parse_formula(step_doc[key])
    except InputError as e:
        raise CheckError(k, f"bad formula in field {key!r}: {e}") from None


def _expected_axiom(step_doc, logic, k):
    schema = step_doc.get("schema")
    if schema == "normality":
        return Box(TOP)
    if schema == "additivity":
        a = _parse_step_formula(step_doc, "left", k)
        b = _parse_step_formula(step_doc, "right", k)
        return iff(Diamond(Or(a, b)), Or(Diamond(a), Diamond(b)))
    if schema == "dual_additivity":
        a = _parse_step_formula(step_doc, "left", k)
        b = _parse_step_formula(step_doc, "right", k)
        return iff(Box(And(a, b)), And(Box(a), Box(b)))
    if schema == "prefix":
        var = step_doc.get("var")
        body = _parse_step_formula(step_doc, "body", k)
        _require(isinstance(var, str), k, "missing binder variable")
        _require(in_con(body, frozenset({var})), k,
                 f"side condition: body is not continuous in {var!r}")
        fp = Mu(var, body)
        return implies(substitute(body, var, fp), fp)
    if schema == "postfix":
        var = step_doc.get("var")
        body = _parse_step_formula(step_doc, "body", k)
        _require(isinstance(var, str), k, "missing binder variable")
        _require(in_cocon(body, frozenset({var})), k,
                 f"side condition: body is not cocontinuous in {var!r}")
        fp = Nu(var, body)
        return implies(fp, substitute(body, var, fp))
    if schema in ("T", "B", "4"):
        _require(schema in EXTENSION_AXIOMS[logic], k,
                 f"axiom {schema} is not available in logic {logic}")
        a = _parse_step_formula(step_doc, "body", k)
        if schema == "T":
            return implies(Box(a), a)
        if schema == "B":
            return implies(a, Box(Diamond(a)))
        return implies(Box(a), Box(Box(a)))
    raise CheckError(k, f"unknown axiom schema {schema!r}")


def check_step(logic, steps, formulas, k):
    """Check step k of a derivation against the earlier formulas.

    steps is the list of raw step documents, formulas the already-checked
    formulas of steps 0..k-1.
    """
    doc = steps[k]
    stated = _parse_step_formula(doc, "formula", k)
    rule = doc.get("rule")
    refs = doc.get("refs", [])
    for r in refs:
        _require(isinstance(r, int) and 0 <= r < k, k,
                 f"reference {r!r} is not an earlier step")

    if rule == "taut":
        _require(is_tautology_instance(stated), k,
                 "stated formula is not a tautology instance")
        return stated

    if rule == "axiom":
        expected = _expected_axiom(doc, logic, k)
        _require(alpha_eq(canonicalize(stated), canonicalize(expected)), k,
                 "stated formula does not match the axiom schema")
        return stated

    if rule == "mp":
        _require(len(refs) == 2, k, "mp needs refs [antecedent, implication]")
        ante, impl = formulas[refs[0]], formulas[refs[1]]
        left, right = _as_implication(impl, k, "mp premise")
        _require(alpha_eq(canonicalize(left), canonicalize(negate(ante))), k,
                 "mp antecedent does not match the implication")
        _require(alpha_eq(canonicalize(stated), canonicalize(right)), k,
                 "stated formula is not the implication's consequent")
        return stated

    if rule in ("mono_dia", "mono_box"):
        _require(len(refs) == 1, k, f"{rule} needs one reference")
        left, right = _as_implication(formulas[refs[0]], k, "monotonicity premise")
        if rule == "mono_dia":
            expected = Or(Box(left), Diamond(right))
        else:
            expected = Or(Diamond(left), Box(right))
        _require(alpha_eq(canonicalize(stated), canonicalize(expected)), k,
                 "stated formula does not match the monotonicity conclusion")
        return stated

    if rule == "subst":
        _require(len(refs) == 1, k, "subst needs one reference")
        atom = doc.get("atom")
        _require(isinstance(atom, str), k, "missing substitution atom")
        repl = _parse_step_formula(doc, "with", k)
        premise = formulas[refs[0]]
        _require(atom not in bound_names(premise), k,
                 f"{atom!r} is bound in the premise")
        expected = substitute(premise, atom, repl)
        _require(alpha_eq(canonicalize(stated), canonicalize(expected)), k,
                 "stated formula does not match the substitution result")
        return stated

    if rule in ("lfp", "gfp"):
        _require(len(refs) == 1, k, f"{rule} needs one reference")
        var = doc.get("var")
        body = _parse_step_formula(doc, "body", k)
        _require(isinstance(var, str), k, "missing binder variable")
        premise = formulas[refs[0]]
        left, right = _as_implication(stated, k, "stated conclusion")
        if rule == "lfp":
            _require(in_con(body, frozenset({var})), k,
                     f"side condition: body is not continuous in {var!r}")
            fp = Mu(var, body)
            _require(alpha_eq(canonicalize(left), canonicalize(negate(fp))), k,
                     "conclusion antecedent is not the least fixpoint")
            target = right
            expected_premise = implies(substitute(body, var, target), target)
        else:
            _require(in_cocon(body, frozenset({var})), k,
                     f"side condition: body is not cocontinuous in {var!r}")
            fp = Nu(var, body)
            _require(alpha_eq(canonicalize(right), canonicalize(fp)), k,
                     "conclusion consequent is not the greatest fixpoint")
            target = negate(left)
            expected_premise = implies(target, substitute(body, var, target))
        _require(alpha_eq(canonicalize(premise), canonicalize(expected_premise)), k,
                 f"premise does not match the {rule} rule shape")
        return stated

    raise CheckError(k, f"unknown rule {rule!r}")


def check_derivation(doc) -> Theorem:
    """Check a whole derivation document; raises CheckError at the first
    failing step, InputError on a malformed document."""
    if isinstance(doc, str):
        try:
            doc = json.loads(doc)
        except json.JSONDecodeError as e:
            raise InputError(f"bad derivation JSON: {e}") from None
    logic = doc.get("logic")
    if logic not in LOGICS:
        raise InputError(f"unknown logic {logic!r}")
    steps = doc.get("steps")
    if not isinstance(steps, list) or not steps:
        raise InputError("derivation has no steps")
    formulas = []
    for k in range(len(steps)):
        formulas.append(check_step(logic, steps, formulas, k))
    digest = hashlib.sha256(
        json.dumps(doc, sort_keys=True).encode()).hexdigest()[:16]
    return Theorem(formula=formulas[-1], logic=logic, derivation_hash=digest)


def dualize_derivation(doc) -> dict:
    """Mechanical transform deriving the contrapositive reading of the
    conclusion: for an implication ~L -> R it appends a tautology step
    (the commuted disjunction) and modus ponens."""
    from .textio import parse_formula, print_formula

    if isinstance(doc, str):
        doc = json.loads(doc)
    out = {"logic": doc["logic"], "steps": [dict(s) for s in doc["steps"]]}
    n = len(out["steps"])
    concl = parse_formula(out["steps"][-1]["formula"])
    dual = Or(concl.right, concl.left) if isinstance(concl, Or) else concl
    bridge = implies(concl, dual)
    out["steps"].append({"rule": "taut", "formula": print_formula(bridge)})
    out["steps"].append({"rule": "mp", "refs": [n - 1, n],
                         "formula": print_formula(dual)})
    return out


def mutations(doc):
    """Single-step mutations that every checker must reject: a falsified
    stated formula, and a dangling reference."""
    if isinstance(doc, str):
        doc = json.loads(doc)
    for k, step in enumerate(doc["steps"]):
        mutated = {"logic": doc["logic"], "steps": [dict(s) for s in doc["steps"]]}
        mutated["steps"][k] = {**step, "formula": "false"}
        yield (k, "formula := false", mutated)
        if step.get("refs"):
            mutated = {"logic": doc["logic"],
                       "steps": [dict(s) for s in doc["steps"]]}
            bad_refs = list(step["refs"])
            bad_refs[0] = len(doc["steps"]) + 5
            mutated["steps"][k] = {**step, "refs": bad_refs}
            yield (k, "dangling reference", mutated)


@dataclass
class SoundnessReport:
    ok: bool
    models_checked: int
    refutations: list  # (model, state)


def soundness_sample(theorem: Theorem, n: int = 500, max_states: int = 4,
                     seed: int = 0) -> SoundnessReport:
    """Evaluate the theorem's formula on n random models in the logic's
    frame class; a refutation would witness a kernel bug."""
    rng = random.Random(seed)
    cls = LOGIC_CLASS[theorem.logic]
    f = canonicalize(theorem.formula)
    atoms = sorted(free_names(f))
    refutations = []
    for _ in range(n):
        model = random_model(rng, max_states, atoms, cls)
        sat = eval_algebraic(f, model)
        for s in model.states:
            if s not in sat:
                refutations.append((model, s))
                break
        if refutations:
            break
    return SoundnessReport(ok=not refutations, models_checked=n,
                           refutations=refutations)


# ---------------------------------------------------------------------------
# Shipped derivation corpus
# ---------------------------------------------------------------------------

def corpus_paths():
    """The shipped .drv files, sorted by name. Names starting with reject_
    are expected to fail the checker."""
    from importlib import resources
    root = resources.files("mucalc").joinpath("data/corpus")
    return sorted((p for p in root.iterdir() if p.name.endswith(".drv")),
                  key=lambda p: p.name)


def load_derivation(path) -> dict:
    try:
        doc = json.loads(path.read_text() if hasattr(path, "read_text")
                         else open(path).read())
    except json.JSONDecodeError as e:
        raise InputError(f"derivation is not valid JSON: {e}")
    if not isinstance(doc, dict) or "steps" not in doc:
        raise InputError("derivation document must be an object with steps")
    return doc
