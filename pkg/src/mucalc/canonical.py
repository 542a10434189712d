"""Finitary canonical models: a sound bounded satisfiability oracle,
Sigma-atom enumeration, the model over Sigma, and the machine-checked
Existence, Distinctness, and Truth properties behind the completeness
pipeline.

The oracle never lies: UNSAT verdicts come from a sound refutation calculus
(or, for tiny formulas, exhaustive enumeration), SAT verdicts carry a
replayable witness, and everything else is UNKNOWN.
"""
from __future__ import annotations

import hashlib
import itertools
import json
import os
from dataclasses import dataclass

from .errors import InputError, MucalcError, UnknownVerdictError
from .filtration import CLASS_STRATEGY, _apply_strategy
from .kripke import (
    FrameClass, KripkeModel, enumerate_models_exact, frame_class_check,
)
from .semantics import eval_algebraic
from .syntax import (
    And, Atom, Binder, Bottom, Box, Diamond, Formula, Mu, Nu, Or, Top,
    alpha_key, canonicalize, conjoin, disjoin, fl_closure, free_names,
    is_clean, is_continuous_mucalc, negate, SubformulaIndex, substitute,
)

DEFAULT_MAX_STATES = 4
DEFAULT_UNFOLD_DEPTH = 2
DEFAULT_MODAL_DEPTH = 8
DEFAULT_EVAL_BUDGET = 200_000  # model checks per phase-2 sweep

UNKNOWN_POLICIES = ("fail", "exclude", "include")


class NoAtomsError(MucalcError):
    """No candidate atom survived the oracle: sigma is inconsistent."""


@dataclass
class OracleVerdict:
    status: str                      # "SAT" | "UNSAT" | "UNKNOWN"
    method: str                      # "refuter" | "exhaustive" | "enumeration" | phase marker
    witness: KripkeModel | None = None
    witness_state: str | None = None

    @property
    def decisive(self) -> bool:
        return self.status != "UNKNOWN"


# ---------------------------------------------------------------------------
# Phase 1: sound refuter
# ---------------------------------------------------------------------------

def _key(f: Formula):
    return alpha_key(canonicalize(f))


_REFLEXIVE = (FrameClass.T, FrameClass.S4, FrameClass.S5)
_SYMMETRIC = (FrameClass.KB, FrameClass.S5)
_TRANSITIVE = (FrameClass.K4, FrameClass.S4, FrameClass.S5)


def _saturate(gamma, cls, unfold_depth):
    """All saturated branches of a formula set: conjunctions flattened,
    disjunctions branched, fixpoints unfolded (budgeted per formula, the
    original kept for clash detection), box bodies added locally on
    reflexive frames."""
    start = frozenset(canonicalize(g) for g in gamma)
    branches = [(start, frozenset(), {})]  # (members, processed, unfold counts)
    done = []
    while branches:
        members, processed, budgets = branches.pop()
        todo = sorted(members - processed, key=str)
        if not todo:
            done.append(members)
            continue
        g = todo[0]
        rest_processed = processed | {g}
        if isinstance(g, And):
            new = members | {canonicalize(g.left), canonicalize(g.right)}
            branches.append((new, rest_processed, budgets))
        elif isinstance(g, Or):
            for half in (g.left, g.right):
                branches.append((members | {canonicalize(half)},
                                 rest_processed, budgets))
        elif isinstance(g, Binder):
            k = _key(g)
            used = budgets.get(k, 0)
            if used < unfold_depth:
                unfolded = canonicalize(substitute(g.body, g.var, g))
                branches.append((members | {unfolded}, rest_processed,
                                 {**budgets, k: used + 1}))
            else:
                branches.append((members, rest_processed, budgets))
        elif isinstance(g, Box) and cls in _REFLEXIVE:
            branches.append((members | {canonicalize(g.body)},
                             rest_processed, budgets))
        else:
            branches.append((members, rest_processed, budgets))
    return done


def _clash(members) -> bool:
    keys = {_key(g) for g in members}
    if ("bot",) in keys:
        return True
    return any(_key(negate(g)) in keys for g in members)


def _child_set(branch, gamma_body, cls):
    child = {canonicalize(gamma_body)}
    for g in branch:
        if isinstance(g, Box):
            child.add(canonicalize(g.body))
            if cls in _TRANSITIVE:
                child.add(g)
    return child


def _branch_dead(branch, cls, unfold_depth, modal_depth, parent=None) -> bool:
    if _clash(branch):
        return True
    if parent is not None and cls in _SYMMETRIC:
        back = {canonicalize(g.body) for g in branch if isinstance(g, Box)}
        if back and _clash(frozenset(parent) | back):
            return True
    if modal_depth == 0:
        return False
    for g in sorted(branch, key=str):
        if not isinstance(g, Diamond):
            continue
        child = _child_set(branch, g.body, cls)
        if all(_branch_dead(cb, cls, unfold_depth, modal_depth - 1, parent=branch)
               for cb in _saturate(child, cls, unfold_depth)):
            return True
    return False


def refute(f: Formula, cls: FrameClass, unfold_depth: int = DEFAULT_UNFOLD_DEPTH,
           modal_depth: int = DEFAULT_MODAL_DEPTH) -> bool:
    """True only if f is certainly unsatisfiable over the frame class."""
    return all(_branch_dead(b, cls, unfold_depth, modal_depth)
               for b in _saturate({canonicalize(f)}, cls, unfold_depth))


# ---------------------------------------------------------------------------
# Verdict cache
# ---------------------------------------------------------------------------

class VerdictCache:
    """Content-addressed on-disk store, enabled by MUCALC_CACHE_DIR."""

    def __init__(self, directory=None):
        self.directory = directory or os.environ.get("MUCALC_CACHE_DIR")

    def _path(self, key):
        return os.path.join(self.directory, key + ".json")

    def get(self, key):
        if not self.directory:
            return None
        try:
            with open(self._path(key)) as fh:
                doc = json.load(fh)
        except (OSError, json.JSONDecodeError):
            return None
        witness = None
        if doc.get("witness"):
            from .textio import read_model
            witness = read_model(json.dumps(doc["witness"]))
        return OracleVerdict(status=doc["status"], method=doc["method"],
                             witness=witness,
                             witness_state=doc.get("witness_state"))

    def put(self, key, verdict: OracleVerdict):
        if not self.directory:
            return
        from .textio import write_model
        os.makedirs(self.directory, exist_ok=True)
        doc = {"status": verdict.status, "method": verdict.method,
               "witness_state": verdict.witness_state,
               "witness": (json.loads(write_model(verdict.witness))
                           if verdict.witness else None)}
        with open(self._path(key), "w") as fh:
            json.dump(doc, fh, sort_keys=True)


# ---------------------------------------------------------------------------
# The oracle
# ---------------------------------------------------------------------------

def sat_search(f: Formula, cls: FrameClass = FrameClass.K,
               max_states: int = DEFAULT_MAX_STATES,
               unfold_depth: int = DEFAULT_UNFOLD_DEPTH,
               modal_depth: int = DEFAULT_MODAL_DEPTH,
               cache: VerdictCache | None = None) -> OracleVerdict:
    """Three-phase bounded satisfiability search.

    Phase 1 runs the sound refuter; phase 2 enumerates class models up to
    max_states looking for a witness; phase 3 certifies unsatisfiability by
    exhaustion when the finite-model-property bound fits under max_states.
    """
    from .textio import print_formula

    f = canonicalize(f)
    cache = cache or VerdictCache()
    cache_key = None
    if cache.directory:
        raw = json.dumps([print_formula(f), cls.value, max_states,
                          unfold_depth, modal_depth])
        cache_key = hashlib.sha256(raw.encode()).hexdigest()
        hit = cache.get(cache_key)
        if hit is not None:
            return hit

    verdict = None
    if refute(f, cls, unfold_depth, modal_depth):
        verdict = OracleVerdict("UNSAT", "refuter")
    exhausted = True
    if verdict is None:
        atoms = tuple(sorted(free_names(f)))
        evals = 0
        for n in range(1, max_states + 1):
            space = 2 ** (n * n + n * len(atoms))
            if evals + space > DEFAULT_EVAL_BUDGET:
                exhausted = False
                break
            evals += space
            for model in enumerate_models_exact(n, atoms, cls):
                sat = eval_algebraic(f, model)
                if sat:
                    state = sorted(sat)[0]
                    verdict = OracleVerdict("SAT", "enumeration", model, state)
                    break
            if verdict is not None:
                break
    if verdict is None:
        if (exhausted and is_continuous_mucalc(f)
                and 2 ** len(fl_closure([f])) <= max_states):
            verdict = OracleVerdict("UNSAT", "exhaustive")
        else:
            verdict = OracleVerdict("UNKNOWN", "bounds-reached")

    if cache_key:
        cache.put(cache_key, verdict)
    return verdict


# ---------------------------------------------------------------------------
# Sigma atoms
# ---------------------------------------------------------------------------

@dataclass
class SigmaAtom:
    name: str
    members: tuple           # canonical formulas, sorted by printing
    psi: Formula             # conjunction of the members
    verdict: OracleVerdict

    def contains(self, f: Formula) -> bool:
        key = _key(f)
        return any(_key(g) == key for g in self.members)


def _locally_coherent(member_keys, by_key) -> bool:
    """The atom-level projections of the maximal-consistency laws."""
    for key in member_keys:
        g = by_key[key]
        if isinstance(g, Bottom):
            return False
        if isinstance(g, Or):
            if (_key(g.left) not in member_keys
                    and _key(g.right) not in member_keys):
                return False
        if isinstance(g, And):
            if (_key(g.left) not in member_keys
                    or _key(g.right) not in member_keys):
                return False
        if isinstance(g, Binder):
            unfolded = _key(substitute(g.body, g.var, g))
            if unfolded in by_key and unfolded not in member_keys:
                return False
    return True


def enumerate_atoms(sigma, logic: str, max_states: int = DEFAULT_MAX_STATES,
                    unfold_depth: int = DEFAULT_UNFOLD_DEPTH,
                    unknown: str = "fail",
                    cache: VerdictCache | None = None):
    """All Sigma-atoms: one member per complementary pair, locally coherent,
    with a satisfiable characteristic formula.

    Returns (atoms, warnings); warnings records atoms dropped or kept with
    an UNKNOWN verdict under the exclude/include policies.
    """
    from .textio import print_formula

    if unknown not in UNKNOWN_POLICIES:
        raise InputError(f"unknown-policy must be one of {UNKNOWN_POLICIES}")
    cls = FrameClass[logic]
    members = sorted((canonicalize(g) for g in sigma), key=print_formula)
    by_key = {_key(g): g for g in members}
    for g in members:
        if _key(negate(g)) not in by_key:
            raise InputError(
                f"sigma is not negation-closed at {print_formula(g)!r}")

    pairs = []
    seen = set()
    for g in members:
        k, nk = _key(g), _key(negate(g))
        if k in seen or nk in seen:
            continue
        seen.add(k)
        seen.add(nk)
        if k == nk:
            raise InputError(f"self-complementary member {print_formula(g)!r}")
        pairs.append((k, nk))

    atoms = []
    warnings = []
    for choice in itertools.product(*[(a, b) for (a, b) in pairs]):
        member_keys = frozenset(choice)
        if not _locally_coherent(member_keys, by_key):
            continue
        chosen = sorted((by_key[k] for k in member_keys), key=print_formula)
        psi = conjoin(chosen)
        verdict = sat_search(psi, cls, max_states, unfold_depth, cache=cache)
        if verdict.status == "UNSAT":
            continue
        if verdict.status == "UNKNOWN":
            label = " & ".join(print_formula(g) for g in chosen)
            if unknown == "fail":
                raise UnknownVerdictError(
                    f"oracle UNKNOWN for candidate atom {label}")
            warnings.append((unknown, label))
            if unknown == "exclude":
                continue
        atoms.append((tuple(chosen), psi, verdict))

    out = []
    for i, (chosen, psi, verdict) in enumerate(atoms):
        out.append(SigmaAtom(name=f"a{i}", members=chosen, psi=psi,
                             verdict=verdict))
    return out, warnings


# ---------------------------------------------------------------------------
# The model over Sigma
# ---------------------------------------------------------------------------

@dataclass
class CanonicalModel:
    logic: str
    sigma: tuple
    atoms: list                # SigmaAtom values; names are the model states
    model: KripkeModel
    rmin: frozenset
    rmax: frozenset
    warnings: list

    def atom(self, name: str) -> SigmaAtom:
        for a in self.atoms:
            if a.name == name:
                return a
        raise KeyError(name)


def build_canonical(sigma, logic: str, strategy: str | None = None,
                    max_states: int = DEFAULT_MAX_STATES,
                    unfold_depth: int = DEFAULT_UNFOLD_DEPTH,
                    unknown: str = "fail",
                    cache: VerdictCache | None = None) -> CanonicalModel:
    """The finitary canonical model over Sigma for the logic: atoms as
    states, the strategy closure of the oracle relation R^min as the
    relation, membership as the valuation."""
    from .textio import print_formula

    cls = FrameClass[logic]
    strategy = strategy or CLASS_STRATEGY[cls]
    members = sorted((canonicalize(g) for g in sigma), key=print_formula)
    atoms, warnings = enumerate_atoms(members, logic, max_states,
                                      unfold_depth, unknown, cache)

    rmin = set()
    for a in atoms:
        for b in atoms:
            query = And(a.psi, Diamond(b.psi))
            verdict = sat_search(query, cls, max_states, unfold_depth,
                                 cache=cache)
            if verdict.status == "SAT":
                rmin.add((a.name, b.name))
            elif verdict.status == "UNKNOWN":
                label = f"{a.name} -> {b.name}"
                if unknown == "fail":
                    raise UnknownVerdictError(
                        f"oracle UNKNOWN for relation query {label}")
                warnings.append((unknown, f"relation {label}"))
                if unknown == "include":
                    rmin.add((a.name, b.name))
    rmin = frozenset(rmin)

    rmax = set()
    for a in atoms:
        boxes = [g for g in a.members if isinstance(g, Box)]
        for b in atoms:
            if all(b.contains(g.body) for g in boxes):
                rmax.add((a.name, b.name))
    rmax = frozenset(rmax)

    if not atoms:
        raise NoAtomsError("no atoms survived; the sigma set is "
                           "unsatisfiable in every combination")
    names = tuple(a.name for a in atoms)
    relation = _apply_strategy(strategy, rmin, names, rmax)
    escaped = sorted(relation - rmax)
    if escaped:
        raise MucalcError(
            f"strategy {strategy!r} escapes R^max at edge {escaped[0]}")

    val_atoms = sorted({g.name for g in members if isinstance(g, Atom)})
    valuation = {p: frozenset(a.name for a in atoms if a.contains(Atom(p)))
                 for p in val_atoms}
    model = KripkeModel.make(names, relation, valuation)
    ok, witness = frame_class_check(model, cls)
    if not ok:
        raise MucalcError(f"canonical frame left class {cls.value}: {witness}")
    return CanonicalModel(logic=logic, sigma=tuple(members), atoms=atoms,
                          model=model, rmin=rmin, rmax=rmax,
                          warnings=warnings)


# ---------------------------------------------------------------------------
# Lemma-level checks
# ---------------------------------------------------------------------------

@dataclass
class CheckReport:
    name: str
    ok: bool
    checked: int
    violations: list


def existence_check(cm: CanonicalModel) -> CheckReport:
    """Every diamond member is in an atom exactly when some relation
    successor contains its body."""
    from .textio import print_formula

    diamonds = [g for g in cm.sigma if isinstance(g, Diamond)]
    violations = []
    checked = 0
    for a in cm.atoms:
        succ_names = cm.model.successors(a.name)
        succs = [cm.atom(n) for n in succ_names]
        for g in diamonds:
            checked += 1
            has = a.contains(g)
            witnessed = any(b.contains(g.body) for b in succs)
            if has != witnessed:
                violations.append((a.name, print_formula(g), has, witnessed))
    return CheckReport("existence", not violations, checked, violations)


def distinctness_check(cm: CanonicalModel,
                       cache: VerdictCache | None = None,
                       max_states: int = DEFAULT_MAX_STATES,
                       unfold_depth: int = DEFAULT_UNFOLD_DEPTH) -> CheckReport:
    """psi_A and psi_B are jointly satisfiable exactly when A = B."""
    cls = FrameClass[cm.logic]
    violations = []
    checked = 0
    for a in cm.atoms:
        for b in cm.atoms:
            checked += 1
            verdict = sat_search(And(a.psi, b.psi), cls, max_states,
                                 unfold_depth, cache=cache)
            expected = "SAT" if a.name == b.name else "UNSAT"
            if verdict.status != expected:
                violations.append((a.name, b.name, verdict.status, expected))
    return CheckReport("distinctness", not violations, checked, violations)


def truth_lemma_check(cm: CanonicalModel) -> CheckReport:
    """Membership coincides with truth at the atom, for every clean
    sigma member."""
    from .textio import print_formula

    violations = []
    checked = 0
    for g in cm.sigma:
        if not is_clean(g):
            continue
        sat = eval_algebraic(g, cm.model)
        for a in cm.atoms:
            checked += 1
            has = a.contains(g)
            true = a.name in sat
            if has != true:
                violations.append((a.name, print_formula(g), has, true))
    return CheckReport("truth_lemma", not violations, checked, violations)


def name_expansion(xi: Formula, phi: Formula, cm: CanonicalModel) -> Formula:
    """Diagnostic substitution of state-description disjunctions for the
    bound variables of xi inside phi."""
    xi = canonicalize(xi)
    idx = SubformulaIndex(xi)
    if phi not in idx.subs:
        raise InputError("phi is not a subformula of xi")
    psi_of = {a.name: a.psi for a in cm.atoms}
    out = phi
    for x in idx.bound_vars:
        u = eval_algebraic(idx.expansion(idx.delta[x]), cm.model)
        psi_u = disjoin([psi_of[name] for name in sorted(u)])
        out = substitute(out, x, psi_u)
    return out


# ---------------------------------------------------------------------------
# Completeness pipeline
# ---------------------------------------------------------------------------

@dataclass
class PipelineResult:
    status: str                       # "SAT" | "INCONSISTENT" | "UNKNOWN"
    canonical: CanonicalModel | None = None
    atom: str | None = None


def completeness_pipeline(phi: Formula, logic: str,
                          max_states: int = DEFAULT_MAX_STATES,
                          unfold_depth: int = DEFAULT_UNFOLD_DEPTH,
                          unknown: str = "fail",
                          cache: VerdictCache | None = None) -> PipelineResult:
    """Decide phi over the logic's frame class by building the canonical
    model over the negation-closed closure of phi."""
    phi = canonicalize(phi)
    if not is_continuous_mucalc(phi):
        raise InputError("formula is outside the continuous fragment")
    sigma = fl_closure([phi], with_negations=True)
    try:
        cm = build_canonical(sigma, logic, max_states=max_states,
                             unfold_depth=unfold_depth, unknown=unknown,
                             cache=cache)
    except NoAtomsError:
        return PipelineResult("INCONSISTENT")
    holders = [a for a in cm.atoms if a.contains(phi)]
    if not holders:
        if cm.warnings:
            return PipelineResult("UNKNOWN", cm)
        return PipelineResult("INCONSISTENT", cm)
    atom = holders[0]
    sat = eval_algebraic(phi, cm.model)
    if atom.name not in sat:
        raise MucalcError("truth lemma failure: the pipeline's witness atom "
                          "does not satisfy the formula")
    ok, witness = frame_class_check(cm.model, FrameClass[logic])
    if not ok:
        raise MucalcError(f"canonical frame left the class: {witness}")
    return PipelineResult("SAT", cm, atom.name)
