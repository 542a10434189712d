"""Satisfiability oracle, Sigma-atoms, canonical models, completeness."""
import pytest

from mucalc.canonical import (
    NoAtomsError, VerdictCache, build_canonical, completeness_pipeline,
    distinctness_check, enumerate_atoms, existence_check, name_expansion,
    refute, sat_search, truth_lemma_check,
)
from mucalc.errors import InputError, UnknownVerdictError
from mucalc.kripke import FrameClass, frame_class_check
from mucalc.semantics import eval_algebraic
from mucalc.syntax import canonicalize, fl_closure
from mucalc.textio import parse_formula, print_formula


def P(src):
    return canonicalize(parse_formula(src))


# ---------------------------------------------------------------------------
# the oracle
# ---------------------------------------------------------------------------

def test_refuter_on_simple_contradictions():
    assert refute(P("p & !p"), FrameClass.K)
    assert refute(P("<>p & []!p"), FrameClass.K)
    assert refute(P("(nu x.(p & []x)) & !p"), FrameClass.K)
    assert not refute(P("p"), FrameClass.K)


def test_refuter_uses_class_axioms():
    # []p & !p is satisfiable in K but clashes under reflexivity
    f = P("[]p & !p")
    assert not refute(f, FrameClass.K)
    assert refute(f, FrameClass.T)
    # p & <>[]!p is satisfiable in K but not under symmetry
    g = P("p & <>[]!p")
    assert not refute(g, FrameClass.K)
    assert refute(g, FrameClass.KB)


def test_sat_search_unsat_by_refuter():
    v = sat_search(P("p & !p"), FrameClass.K)
    assert v.status == "UNSAT" and v.method == "refuter"


def test_sat_search_sat_with_replayable_witness():
    v = sat_search(P("p & []!p"), FrameClass.K)
    assert v.status == "SAT"
    assert v.witness_state in eval_algebraic(P("p & []!p"), v.witness)


def test_sat_search_exhaustive_unsat_certificate():
    # unsatisfiable and unrefutable by the tableau, but the finite model
    # property bound 2^|Cl| = 4 lies within the enumeration bounds, so
    # exhausting them certifies UNSAT
    v = sat_search(P("mu x.<>x"), FrameClass.K)
    assert v.status == "UNSAT" and v.method == "exhaustive"


def test_sat_search_honest_unknown():
    # unsatisfiable, but the closure is too large for exhaustive
    # certification and refuting needs a well-foundedness argument the
    # bounded refuter does not make
    v = sat_search(P("mu x.((p | !p) & <>x)"), FrameClass.K)
    assert v.status == "UNKNOWN" and v.method == "bounds-reached"


def test_verdict_cache_round_trip(tmp_path, monkeypatch):
    monkeypatch.setenv("MUCALC_CACHE_DIR", str(tmp_path))
    cache = VerdictCache()
    f = P("p & []!p")
    first = sat_search(f, FrameClass.K, cache=cache)
    assert list(tmp_path.iterdir())
    second = sat_search(f, FrameClass.K, cache=VerdictCache())
    assert (first.status, first.witness_state) == (second.status, second.witness_state)
    assert first.witness == second.witness


# ---------------------------------------------------------------------------
# Sigma-atoms
# ---------------------------------------------------------------------------

def test_atoms_for_atomic_sigma():
    sigma = fl_closure([P("p")], with_negations=True)
    atoms, warnings = enumerate_atoms(sigma, "K")
    assert not warnings
    assert sorted(" & ".join(print_formula(g) for g in a.members)
                  for a in atoms) == ["!p", "p"]


def test_atoms_for_diamond_sigma():
    sigma = fl_closure([P("<>p")], with_negations=True)
    atoms, warnings = enumerate_atoms(sigma, "K")
    assert not warnings
    found = sorted(" & ".join(print_formula(g) for g in a.members)
                   for a in atoms)
    assert found == ["!p & <>p", "!p & []!p", "<>p & p", "[]!p & p"]


def test_atoms_respect_the_logic():
    # under T, the atom {p, []!p} is incoherent (reflexivity forces !p)
    sigma = fl_closure([P("<>p")], with_negations=True)
    atoms, _ = enumerate_atoms(sigma, "T")
    assert len(atoms) == 3
    assert not any(a.contains(P("p")) and a.contains(P("[]!p")) for a in atoms)


def test_atoms_unknown_policies(monkeypatch):
    # a sigma whose candidate atoms include an UNKNOWN characteristic formula
    sigma = fl_closure([P("mu x.<>x")], with_negations=True)
    with pytest.raises(UnknownVerdictError):
        enumerate_atoms(sigma, "K", unknown="fail")
    excluded, warnings = enumerate_atoms(sigma, "K", unknown="exclude")
    included, warnings2 = enumerate_atoms(sigma, "K", unknown="include")
    assert warnings and warnings2
    assert len(included) > len(excluded)


# ---------------------------------------------------------------------------
# the canonical model and its three lemma checks
# ---------------------------------------------------------------------------

def diamond_model(logic="K"):
    sigma = fl_closure([P("<>p")], with_negations=True)
    return build_canonical(sigma, logic)


def test_build_canonical_relation_examples():
    cm = diamond_model()
    boxed = [a for a in cm.atoms
             if a.contains(P("p")) and a.contains(P("[]!p"))][0]
    successors = [b for (x, b) in cm.model.relation if x == boxed.name]
    assert all(not cm.atom(b).contains(P("p")) for b in successors)
    witness = [a for a in cm.atoms
               if a.contains(P("!p")) and a.contains(P("<>p"))][0]
    succ = [b for (x, b) in cm.model.relation if x == witness.name]
    assert any(cm.atom(b).contains(P("p")) for b in succ)


def test_existence_distinctness_truth_on_diamond_sigma():
    cm = diamond_model()
    for rep in (existence_check(cm), distinctness_check(cm),
                truth_lemma_check(cm)):
        assert rep.ok, (rep.name, rep.violations)


def test_canonical_suite_all_sigmas_and_logics():
    for src in ("p", "<>p", "mu x.(p | <>x)"):
        sigma = fl_closure([P(src)], with_negations=True)
        for logic in ("K", "T", "KB"):
            cm = build_canonical(sigma, logic, unknown="fail")
            assert not cm.warnings
            ok, witness = frame_class_check(cm.model, FrameClass[logic])
            assert ok, (src, logic, witness)
            assert truth_lemma_check(cm).ok, (src, logic)


def test_name_expansion_full_disjunction():
    xi = P("mu x.(p | <>x)")
    cm = build_canonical(fl_closure([xi], with_negations=True), "K")
    from mucalc.syntax import Atom
    out = name_expansion(xi, Atom("x1"), cm)
    # U = the atoms satisfying the fixpoint; here that is every atom with
    # p or a path to p, and the result is the disjunction of their psi
    sat = eval_algebraic(xi, cm.model)
    assert sat  # non-trivial
    assert "|" in print_formula(out) or len(sat) == 1


# ---------------------------------------------------------------------------
# completeness pipeline
# ---------------------------------------------------------------------------

def test_pipeline_sat_with_witness_atom():
    res = completeness_pipeline(P("<>p"), "K")
    assert res.status == "SAT"
    atom = res.canonical.atom(res.atom)
    assert atom.contains(P("<>p"))
    assert res.atom in eval_algebraic(P("<>p"), res.canonical.model)


def test_pipeline_inconsistent():
    assert completeness_pipeline(P("p & !p"), "K").status == "INCONSISTENT"
    assert completeness_pipeline(P("(nu x.(p & []x)) & !p"), "KB").status \
        == "INCONSISTENT"


def test_pipeline_rejects_nonfragment_input():
    with pytest.raises(InputError):
        completeness_pipeline(P("mu x.[]x"), "K")


def test_pipeline_propagates_unknown():
    with pytest.raises(UnknownVerdictError):
        completeness_pipeline(P("mu x.<>x"), "K")
