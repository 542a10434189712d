"""Filtrations: quotients by agreement on a closed formula set, validation,
the agreement (Filtration Theorem) harness, the translation into basic modal
logic, and the finite-model-property pipeline."""
from __future__ import annotations

import json
from dataclasses import dataclass

from .errors import InputError, MucalcError
from .kripke import (
    FrameClass, KripkeModel, equivalence_closure, frame_class_check,
    reflexive_closure, symmetric_closure, transitive_closure,
)
from .semantics import eval_algebraic
from .syntax import (
    Atom, Binder, Box, Diamond, Formula, alpha_eq, alpha_key, canonicalize,
    fl_closure, free_names, is_clean, is_continuous_mucalc, is_fl_closed,
)


class FiltrationError(MucalcError):
    """A requested relation strategy escaped the admissible bounds."""


STRATEGIES = ("min", "max", "reflexive", "symmetric", "transitive",
              "refl-trans", "equivalence")

# which filtration strategy keeps each frame class closed under quotients
CLASS_STRATEGY = {
    FrameClass.K: "min",
    FrameClass.T: "reflexive",
    FrameClass.KB: "symmetric",
    FrameClass.K4: "transitive",
    FrameClass.S4: "refl-trans",
    FrameClass.S5: "equivalence",
}


@dataclass
class FiltrationResult:
    source: KripkeModel
    sigma: tuple          # canonical members, sorted
    classes: dict         # class name -> tuple of source states
    class_map: dict       # source state -> class name
    quotient: KripkeModel
    rmin: frozenset
    rmax: frozenset
    strategy: str

    def to_json(self) -> str:
        from .textio import write_model
        doc = {
            "strategy": self.strategy,
            "classes": {name: list(members)
                        for name, members in sorted(self.classes.items())},
            "quotient": json.loads(write_model(self.quotient)),
            "rmin": [list(e) for e in sorted(self.rmin)],
            "rmax": [list(e) for e in sorted(self.rmax)],
        }
        return json.dumps(doc, indent=1, sort_keys=True)


def _class_name(members) -> str:
    return "{" + ",".join(sorted(members)) + "}"


def _sigma_members(sigma):
    members = [canonicalize(g) for g in sigma]
    if not is_fl_closed(members):
        raise InputError("sigma is not FL-closed")
    return members


def _apply_strategy(strategy, rmin, states, rmax=None):
    if strategy == "min":
        return rmin
    if strategy == "max":
        if rmax is None:
            raise InputError("strategy 'max' is only available where R^max is known")
        return rmax
    if strategy == "reflexive":
        return reflexive_closure(rmin, states)
    if strategy == "symmetric":
        return symmetric_closure(rmin)
    if strategy == "transitive":
        return transitive_closure(rmin)
    if strategy == "refl-trans":
        return transitive_closure(reflexive_closure(rmin, states))
    if strategy == "equivalence":
        return equivalence_closure(rmin, states)
    raise InputError(f"unknown strategy {strategy!r}; choose from {STRATEGIES}")


def build_filtration(model: KripkeModel, sigma, strategy: str = "min") -> FiltrationResult:
    """Quotient the model by agreement on sigma; the relation is the named
    closure of the finest relation R^min, validated against R^max."""
    members = _sigma_members(sigma)
    truth = {alpha_key(g): eval_algebraic(g, model) for g in members}

    profiles = {}
    for s in model.states:
        profiles[s] = frozenset(k for k, sat in truth.items() if s in sat)
    classes = {}
    for s in model.states:
        classes.setdefault(profiles[s], []).append(s)
    class_names = {profile: _class_name(ss) for profile, ss in classes.items()}
    class_map = {s: class_names[profiles[s]] for s in model.states}
    class_members = {class_names[profile]: tuple(sorted(ss))
                     for profile, ss in classes.items()}

    rmin = frozenset((class_map[a], class_map[b]) for (a, b) in model.relation)

    # R^max: A -> B allowed unless a boxed member holds on A while its body
    # fails on B, or (dually) a diamond member's body holds on B while the
    # diamond fails on A. The dual clause is needed because negation normal
    # form keeps the diamond primitive rather than defined from the box.
    boxes = [g for g in members if isinstance(g, Box)]
    diamonds = [g for g in members if isinstance(g, Diamond)]
    reps = {name: ss[0] for name, ss in class_members.items()}
    rmax = set()
    for a in class_members:
        for b in class_members:
            ok = all(reps[b] in truth[alpha_key(canonicalize(g.body))]
                     for g in boxes if reps[a] in truth[alpha_key(g)])
            ok = ok and all(
                reps[a] in truth[alpha_key(g)]
                for g in diamonds
                if reps[b] in truth[alpha_key(canonicalize(g.body))])
            if ok:
                rmax.add((a, b))
    rmax = frozenset(rmax)

    relation = _apply_strategy(strategy, rmin, tuple(class_members), rmax)
    escaped = sorted(relation - rmax)
    if escaped:
        raise FiltrationError(
            f"strategy {strategy!r} escapes R^max at edge {escaped[0]}")

    atoms = sorted({g.name for g in members if isinstance(g, Atom)})
    valuation = {p: frozenset(class_map[s] for s in model.val(p))
                 for p in atoms}
    quotient = KripkeModel.make(class_members, relation, valuation)
    return FiltrationResult(
        source=model, sigma=tuple(members), classes=class_members,
        class_map=dict(class_map), quotient=quotient,
        rmin=rmin, rmax=rmax, strategy=strategy)


def validate_filtration(model: KripkeModel, sigma, candidate: KripkeModel,
                        class_map) -> tuple:
    """Check the three filtration conditions for a candidate quotient;
    returns (ok, list of violation strings)."""
    members = _sigma_members(sigma)
    reference = build_filtration(model, members, "min")
    violations = []

    if dict(class_map) != reference.class_map:
        violations.append("class map does not match the sigma-equivalence quotient")
    if set(candidate.states) != set(reference.classes):
        violations.append("state set is not the set of sigma-equivalence classes")
    for edge in sorted(reference.rmin - candidate.relation):
        violations.append(f"missing required R^min edge {edge}")
    for edge in sorted(candidate.relation - reference.rmax):
        violations.append(f"edge {edge} exceeds R^max")

    atoms = sorted({g.name for g in members if isinstance(g, Atom)})
    for p in atoms:
        expected = frozenset(reference.class_map[s] for s in model.val(p))
        if candidate.val(p) != expected:
            violations.append(f"valuation clause fails for atom {p!r}")
    return (not violations, violations)


@dataclass
class AgreementReport:
    ok: bool
    checked: int
    skipped: list      # printed non-continuous-fragment members
    violations: list   # (printed formula, state, truth in source, truth in quotient)


def filtration_agreement_check(fr: FiltrationResult,
                               include_nonfragment: bool = False) -> AgreementReport:
    """Compare satisfaction of every clean continuous-fragment sigma member
    between the source model and its quotient.

    Members outside the continuous fragment are skipped and listed; with
    include_nonfragment they are checked as well, which documents the
    fragment boundary (such members may genuinely disagree)."""
    from .textio import print_formula

    skipped = []
    violations = []
    checked = 0
    for g in fr.sigma:
        if not is_clean(g) or (not include_nonfragment
                               and not is_continuous_mucalc(g)):
            skipped.append(print_formula(g))
            continue
        src = eval_algebraic(g, fr.source)
        quo = eval_algebraic(g, fr.quotient)
        for s in fr.source.states:
            checked += 1
            a, b = s in src, fr.class_map[s] in quo
            if a != b:
                violations.append((print_formula(g), s, a, b))
    return AgreementReport(ok=not violations, checked=checked,
                           skipped=skipped, violations=violations)


@dataclass
class TranslationResult:
    model: KripkeModel        # same frame, extended valuation V'
    atom_table: list          # (fresh atom name, fixpoint formula)
    tau: dict                 # alpha key of sigma member -> translated formula
    conditions: dict          # condition name -> bool
    ok: bool


def _translate(f: Formula, table) -> Formula:
    """Replace each maximal fixpoint subformula by its fresh atom."""
    for name, g in table:
        if alpha_eq(f, g):
            return Atom(name)
    if isinstance(f, Binder):
        raise MucalcError(f"fixpoint subformula missing from the atom table")
    kids = [_translate(c, table) for c in _children(f)]
    return _rebuild(f, kids)


def _children(f):
    from .syntax import children
    return children(f)


def _rebuild(f, kids):
    from .syntax import And, Box, Diamond, Or
    if isinstance(f, Or):
        return Or(*kids)
    if isinstance(f, And):
        return And(*kids)
    if isinstance(f, Diamond):
        return Diamond(*kids)
    if isinstance(f, Box):
        return Box(*kids)
    return f


def ml_translation(model: KripkeModel, sigma) -> TranslationResult:
    """Interpret fresh atoms by the meanings of the fixpoint members of
    sigma and replace those members by their atoms, yielding a basic modal
    logic image of sigma that is truth-equivalent on the adjusted model."""
    from .textio import print_formula

    members = _sigma_members(sigma)
    fixpoints = sorted((g for g in members if isinstance(g, Binder)),
                       key=print_formula)
    used = set(model.atoms)
    for g in members:
        used |= free_names(g)
    table = []
    i = 0
    for g in fixpoints:
        i += 1
        while f"t{i}" in used:
            i += 1
        table.append((f"t{i}", g))

    adjusted = model
    for name, g in table:
        adjusted = adjusted.update_valuation(name, eval_algebraic(g, model))

    tau = {alpha_key(g): _translate(g, table) for g in members}
    image = list(tau.values())

    conditions = {}
    # (1) the adjusted valuation agrees with the original on sigma's atoms
    sigma_atoms = {g.name for g in members if isinstance(g, Atom)}
    conditions["valuation_agreement"] = all(
        adjusted.val(p) == model.val(p) for p in sigma_atoms)
    # (2) the frame is untouched (class membership is the caller's check)
    conditions["frame_unchanged"] = (adjusted.states == model.states
                                     and adjusted.relation == model.relation)
    # (3) the image of sigma is FL-closed
    conditions["image_fl_closed"] = is_fl_closed(image)
    # (4) the translation commutes with box
    conditions["commutes_with_box"] = all(
        tau[alpha_key(g)] == Box(tau[alpha_key(canonicalize(g.body))])
        for g in members if isinstance(g, Box))
    # (5) truth equivalence on every member at every state
    equiv = True
    for g in members:
        if eval_algebraic(g, model) != eval_algebraic(tau[alpha_key(g)], adjusted):
            equiv = False
            break
    conditions["truth_equivalence"] = equiv

    return TranslationResult(model=adjusted, atom_table=table, tau=tau,
                             conditions=conditions,
                             ok=all(conditions.values()))


def fmp_search(phi: Formula, cls: FrameClass, witness: KripkeModel) -> FiltrationResult:
    """Finite countermodel in the class from a given refuting witness:
    filtrate the witness through the closure of phi with the class's
    strategy. The quotient refutes phi and has at most 2^|Cl(phi)| states."""
    phi = canonicalize(phi)
    if not is_continuous_mucalc(phi):
        raise InputError("formula is outside the continuous fragment")
    ok, wit = frame_class_check(witness, cls)
    if not ok:
        raise InputError(f"witness model is not in class {cls.value}: {wit}")
    refuted = [s for s in witness.states
               if s not in eval_algebraic(phi, witness)]
    if not refuted:
        raise InputError("witness model does not refute the formula")
    sigma = fl_closure([phi])
    fr = build_filtration(witness, sigma, CLASS_STRATEGY[cls])
    ok, wit = frame_class_check(fr.quotient, cls)
    if not ok:
        raise FiltrationError(f"quotient left class {cls.value}: {wit}")
    if fr.class_map[refuted[0]] in eval_algebraic(phi, fr.quotient):
        raise FiltrationError("quotient fails to refute the formula")
    return fr
