"""Kripke models, frame classes, enumeration, and sampling."""
import random

import pytest

from mucalc.errors import BudgetExceededError, InputError
from mucalc.kripke import (
    FrameClass, KripkeModel, count_models, enumerate_models,
    equivalence_closure, frame_class_check, random_model, reflexive_closure,
    symmetric_closure, transitive_closure,
)


def chain(n):
    states = [f"s{i}" for i in range(n)]
    return KripkeModel.make(states,
                            {(f"s{i}", f"s{i+1}") for i in range(n - 1)}, {})


def test_make_validates_input():
    with pytest.raises(InputError):
        KripkeModel.make([], set(), {})
    with pytest.raises(InputError):
        KripkeModel.make(["s0"], {("s0", "s9")}, {})
    with pytest.raises(InputError):
        KripkeModel.make(["s0"], set(), {"p": ["s9"]})


def test_frame_class_check_witnesses():
    m = chain(2)
    ok, _ = frame_class_check(m, FrameClass.K)
    assert ok
    ok, witness = frame_class_check(m, FrameClass.T)
    assert not ok and witness == ("reflexive", ("s0",))
    ok, witness = frame_class_check(m, FrameClass.KB)
    assert not ok and witness == ("symmetric", ("s0", "s1"))
    ok, witness = frame_class_check(chain(3), FrameClass.K4)
    assert not ok and witness == ("transitive", ("s0", "s1", "s2"))


def test_closures_produce_their_classes():
    rel = {("s0", "s1")}
    states = ("s0", "s1", "s2")
    assert (reflexive_closure(rel, states)
            == rel | {(s, s) for s in states})
    assert symmetric_closure(rel) == rel | {("s1", "s0")}
    assert transitive_closure({("s0", "s1"), ("s1", "s2")}) \
        == {("s0", "s1"), ("s1", "s2"), ("s0", "s2")}
    eq = equivalence_closure(rel, states)
    m = KripkeModel.make(states, eq, {})
    ok, _ = frame_class_check(m, FrameClass.S5)
    assert ok


def test_count_one_state_one_atom_K():
    assert count_models(1, ["p"], FrameClass.K) == 4


def test_count_one_state_no_atoms_T():
    assert count_models(1, [], FrameClass.T) == 1


def test_count_up_to_two_states_no_atoms_K():
    assert count_models(2, [], FrameClass.K) == 18


def test_enumeration_is_duplicate_free():
    seen = set()
    for m in enumerate_models(2, ["p"], FrameClass.K):
        assert m not in seen
        seen.add(m)
    # 2*2 one-state models plus 2^4 * 2^2 two-state models
    assert len(seen) == 4 + 64


def test_enumeration_budget_refusal_is_upfront():
    gen = enumerate_models(4, ["p", "q"], FrameClass.K, budget=1000)
    with pytest.raises(BudgetExceededError):
        next(gen)


def test_enumerated_frames_lie_in_class():
    for cls in (FrameClass.T, FrameClass.KB, FrameClass.S5):
        for m in enumerate_models(2, [], cls):
            ok, _ = frame_class_check(m, cls)
            assert ok


def test_random_model_stays_in_class():
    rng = random.Random(7)
    for cls in FrameClass:
        for _ in range(25):
            m = random_model(rng, 5, ["p", "q"], cls)
            ok, witness = frame_class_check(m, cls)
            assert ok, (cls, witness)


def test_random_model_deterministic_for_seed():
    a = random_model(random.Random(3), 6, ["p"], FrameClass.K)
    b = random_model(random.Random(3), 6, ["p"], FrameClass.K)
    assert a == b
