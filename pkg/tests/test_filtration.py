"""Filtration quotients, the agreement harness, translation, and FMP."""
import random

import pytest

from mucalc.errors import InputError
from mucalc.filtration import (
    CLASS_STRATEGY, FiltrationError, build_filtration,
    filtration_agreement_check, fmp_search, ml_translation,
    validate_filtration,
)
from mucalc.gen import random_formula
from mucalc.kripke import FrameClass, KripkeModel, frame_class_check, random_model
from mucalc.semantics import eval_algebraic
from mucalc.syntax import canonicalize, fl_closure, free_names
from mucalc.textio import parse_formula, print_formula


def P(src):
    return canonicalize(parse_formula(src))


def chain2():
    return KripkeModel.make(["s0", "s1"], {("s0", "s1")}, {})


def test_sigma_must_be_closed():
    with pytest.raises(InputError, match="FL-closed"):
        build_filtration(chain2(), [P("<>p")], "min")


def test_min_filtration_of_boundary_example():
    # both states agree on every member, so the quotient is a single
    # reflexive point
    fr = build_filtration(chain2(), fl_closure([P("mu x.[]x")]), "min")
    assert len(fr.quotient.states) == 1
    only = fr.quotient.states[0]
    assert (only, only) in fr.quotient.relation


def test_agreement_skips_nonfragment_members_by_default():
    fr = build_filtration(chain2(), fl_closure([P("mu x.[]x")]), "min")
    rep = filtration_agreement_check(fr)
    assert rep.ok
    assert "mu x1. []x1" in rep.skipped


def test_boundary_example_disagrees_outside_fragment():
    fr = build_filtration(chain2(), fl_closure([P("mu x.[]x")]), "min")
    rep = filtration_agreement_check(fr, include_nonfragment=True)
    assert not rep.ok
    assert ("mu x1. []x1", "s0", True, False) in rep.violations
    assert len(rep.violations) == 4


def test_rmin_is_contained_in_rmax():
    for seed in range(50):
        f = random_formula(seed)
        atoms = tuple(sorted(free_names(f))) or ("p",)
        model = random_model(random.Random(seed), 6, atoms)
        fr = build_filtration(model, fl_closure([f]), "min")
        assert fr.rmin <= fr.rmax, (seed, print_formula(f))


def test_agreement_min_and_max_on_seeded_pairs():
    for seed in range(60):
        f = random_formula(seed)
        atoms = tuple(sorted(free_names(f))) or ("p",)
        model = random_model(random.Random(seed + 5000), 6, atoms)
        sigma = fl_closure([f])
        for strategy in ("min", "max"):
            rep = filtration_agreement_check(
                build_filtration(model, sigma, strategy))
            assert rep.ok, (seed, strategy, rep.violations[:2])


def test_validate_filtration_accepts_the_built_quotient():
    model = random_model(random.Random(11), 5, ("p",))
    sigma = fl_closure([P("mu x.(p | <>x)")])
    fr = build_filtration(model, sigma, "min")
    ok, violations = validate_filtration(model, sigma, fr.quotient, fr.class_map)
    assert ok, violations


def test_validate_filtration_rejects_mutations():
    model = random_model(random.Random(11), 5, ("p",))
    sigma = fl_closure([P("mu x.(p | <>x)")])
    fr = build_filtration(model, sigma, "min")
    q = fr.quotient

    # drop a required R^min edge
    if q.relation:
        smaller = KripkeModel(q.states, frozenset(sorted(q.relation)[1:]),
                              q.valuation)
        ok, violations = validate_filtration(model, sigma, smaller, fr.class_map)
        assert not ok and any("missing required" in v for v in violations)

    # corrupt the valuation
    bad_val = q.update_valuation("p", frozenset())
    if bad_val != q:
        ok, violations = validate_filtration(model, sigma, bad_val, fr.class_map)
        assert not ok and any("valuation" in v for v in violations)

    # corrupt the class map
    bad_map = dict(fr.class_map)
    some = sorted(bad_map)[0]
    bad_map[some] = "{bogus}"
    ok, violations = validate_filtration(model, sigma, q, bad_map)
    assert not ok


def test_validate_rejects_edges_beyond_rmax():
    # sigma = FL({<>p}) on a model with an isolated !p state: adding an edge
    # from that state into a p-state escapes R^max
    model = KripkeModel.make(["s0", "s1"], set(), {"p": ["s1"]})
    sigma = fl_closure([P("<>p")])
    fr = build_filtration(model, sigma, "min")
    extra = frozenset({(fr.class_map["s0"], fr.class_map["s1"])})
    bigger = KripkeModel(fr.quotient.states, fr.quotient.relation | extra,
                         fr.quotient.valuation)
    ok, violations = validate_filtration(model, sigma, bigger, fr.class_map)
    assert not ok and any("exceeds R^max" in v for v in violations)


def test_class_strategies_keep_their_classes():
    for cls, strategy in CLASS_STRATEGY.items():
        for seed in range(20):
            f = random_formula(seed)
            atoms = tuple(sorted(free_names(f))) or ("p",)
            model = random_model(random.Random(seed + 100), 5, atoms, cls)
            try:
                fr = build_filtration(model, fl_closure([f]), strategy)
            except FiltrationError:
                # the closure may escape R^max; that is a reported error,
                # not a silent wrong answer
                continue
            ok, witness = frame_class_check(fr.quotient, cls)
            assert ok, (cls, seed, witness)


def test_ml_translation_example():
    model = KripkeModel.make(
        ["s0", "s1", "s2"], {("s0", "s1"), ("s1", "s2")}, {"p": ["s2"]})
    sigma = fl_closure([P("mu x.(p | <>x)")])
    res = ml_translation(model, sigma)
    assert res.ok, res.conditions
    assert len(res.atom_table) == 1
    name, fixpoint = res.atom_table[0]
    assert print_formula(fixpoint) == "mu x1. p | <>x1"
    from mucalc.syntax import alpha_key
    assert print_formula(res.tau[alpha_key(fixpoint)]) == name
    diamond = P("<>(mu x.(p | <>x))")
    assert print_formula(res.tau[alpha_key(diamond)]) == f"<>{name}"
    # the fresh atom means exactly the fixpoint
    assert res.model.val(name) == eval_algebraic(fixpoint, model)


def test_ml_translation_seeded_instances():
    from mucalc.syntax import Binder, subformulas
    done = 0
    seed = 0
    while done < 25:
        f = random_formula(seed)
        seed += 1
        if not any(isinstance(g, Binder) for g in subformulas(f)):
            continue
        atoms = tuple(sorted(free_names(f))) or ("p",)
        model = random_model(random.Random(seed), 5, atoms)
        res = ml_translation(model, fl_closure([f]))
        assert res.ok, (seed, res.conditions)
        done += 1


def test_fmp_search_bound_and_class():
    f = P("mu x.(p | <>x)")
    witness = KripkeModel.make(["s0"], set(), {"p": []})
    fr = fmp_search(f, FrameClass.K, witness)
    assert len(fr.quotient.states) <= 2 ** len(fl_closure([f]))
    sat = eval_algebraic(f, fr.quotient)
    assert any(s not in sat for s in fr.quotient.states)


def test_fmp_search_input_errors():
    witness = KripkeModel.make(["s0"], set(), {"p": ["s0"]})
    with pytest.raises(InputError, match="continuous fragment"):
        fmp_search(P("mu x.[]x"), FrameClass.K, witness)
    with pytest.raises(InputError, match="does not refute"):
        fmp_search(P("p"), FrameClass.K, witness)
    with pytest.raises(InputError, match="not in class"):
        fmp_search(P("p"), FrameClass.T,
                   KripkeModel.make(["s0"], set(), {"p": []}))
