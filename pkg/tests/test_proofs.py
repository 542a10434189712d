"""The Hilbert-style derivation checker and its shipped corpus."""
import pytest

from mucalc.proofs import (
    CheckError, check_derivation, corpus_paths, dualize_derivation,
    is_tautology_instance, load_derivation, mutations, soundness_sample,
)
from mucalc.syntax import alpha_eq, canonicalize
from mucalc.textio import parse_formula


def P(src):
    return canonicalize(parse_formula(src))


def accepting_docs():
    for path in corpus_paths():
        if not path.name.startswith("reject_"):
            yield path.name, load_derivation(path)


# ---------------------------------------------------------------------------
# tautology instances
# ---------------------------------------------------------------------------

def test_tautology_instances_accepted():
    for src in ("p | !p", "true", "!p | (q | p)",
                "(mu x.(p | <>x)) | !(mu y.(p | <>y))",
                "([]q & p) | (!p | !([]q))"):
        assert is_tautology_instance(parse_formula(src)), src


def test_non_tautologies_rejected():
    # note <>p | []!p would be accepted: box and diamond complement under
    # the negation-normal-form reading of negation
    for src in ("p", "p | q", "<>p | []p", "<>p | <>!p",
                "(mu x.(p | <>x)) | !p"):
        assert not is_tautology_instance(parse_formula(src)), src


# ---------------------------------------------------------------------------
# corpus
# ---------------------------------------------------------------------------

def test_corpus_is_large_enough():
    names = [p.name for p in corpus_paths()]
    assert len(names) >= 10
    assert any(n.startswith("reject_") for n in names)


def test_accepting_corpus_checks():
    count = 0
    for name, doc in accepting_docs():
        theorem = check_derivation(doc)
        assert theorem.logic == doc["logic"]
        assert len(theorem.derivation_hash) == 16
        count += 1
    assert count >= 10


def test_rejection_corpus_rejects():
    rejected = 0
    for path in corpus_paths():
        if path.name.startswith("reject_"):
            with pytest.raises(CheckError):
                check_derivation(load_derivation(path))
            rejected += 1
    assert rejected >= 2


def test_con_x_side_condition_rejection_message():
    path = [p for p in corpus_paths() if p.name == "reject_prefix_box.drv"][0]
    with pytest.raises(CheckError, match="not continuous"):
        check_derivation(load_derivation(path))


def test_every_mutation_is_rejected():
    for name, doc in accepting_docs():
        for k, what, mutant in mutations(doc):
            with pytest.raises(CheckError):
                check_derivation(mutant)


def test_duals_of_corpus_theorems_check():
    for name, doc in accepting_docs():
        dual = dualize_derivation(doc)
        theorem = check_derivation(dual)
        assert theorem.logic == doc["logic"]


def test_soundness_sampling_finds_no_refutation():
    for name, doc in accepting_docs():
        theorem = check_derivation(doc)
        rep = soundness_sample(theorem, n=120, seed=1)
        assert rep.ok, (name, rep.refutations[:1])


# ---------------------------------------------------------------------------
# step-level validation
# ---------------------------------------------------------------------------

def drv(logic, *steps):
    return {"logic": logic, "steps": list(steps)}


def test_diamond_prefix_theorem_statement():
    path = [p for p in corpus_paths() if p.name == "diamond_prefix.drv"][0]
    theorem = check_derivation(load_derivation(path))
    assert alpha_eq(theorem.formula, P("<>p -> mu x.(p | <>x)"))


def test_axiom_t_requires_the_logic():
    step = {"rule": "axiom", "schema": "T", "body": "p", "formula": "<>!p | p"}
    with pytest.raises(CheckError, match="not available"):
        check_derivation(drv("K", step))
    assert check_derivation(drv("T", step))


def test_stated_formula_must_match_schema():
    step = {"rule": "axiom", "schema": "normality", "formula": "[]p"}
    with pytest.raises(CheckError):
        check_derivation(drv("K", step))


def test_mp_checks_the_implication_shape():
    good = drv("K",
               {"rule": "taut", "formula": "p | !p"},
               {"rule": "taut", "formula": "!(p | !p) | true"},
               {"rule": "mp", "refs": [0, 1], "formula": "true"})
    assert check_derivation(good)
    bad = drv("K",
              {"rule": "taut", "formula": "p | !p"},
              {"rule": "taut", "formula": "!(q | !q) | true"},
              {"rule": "mp", "refs": [0, 1], "formula": "true"})
    with pytest.raises(CheckError):
        check_derivation(bad)


def test_subst_rejects_bound_atom():
    doc = drv("K",
              {"rule": "axiom", "schema": "prefix", "var": "x",
               "body": "p | <>x",
               "formula": "!(p | <>(mu x.(p | <>x))) | (mu x.(p | <>x))"},
              {"rule": "subst", "refs": [0], "atom": "x", "with": "q",
               "formula": "!(p | <>(mu x.(p | <>x))) | (mu x.(p | <>x))"})
    with pytest.raises(CheckError):
        check_derivation(doc)


def test_lfp_requires_the_premise_implication():
    doc = drv("K",
              {"rule": "taut", "formula": "p | !p"},
              {"rule": "lfp", "refs": [0], "var": "x", "body": "x",
               "formula": "(nu x. x) | false"})
    with pytest.raises(CheckError):
        check_derivation(doc)


def test_forward_references_rejected():
    doc = drv("K",
              {"rule": "mp", "refs": [1, 2], "formula": "true"},
              {"rule": "taut", "formula": "p | !p"},
              {"rule": "taut", "formula": "!(p | !p) | true"})
    with pytest.raises(CheckError):
        check_derivation(doc)
