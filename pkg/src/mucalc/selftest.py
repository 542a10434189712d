"""Self-verification suite: the acceptance checks behind `mucalc selftest`.

Every check produces deterministic report lines (no timestamps, no timings),
so the full report is byte-identical across runs with the same seed and
across --jobs settings: parallel sweeps are chunked on fixed boundaries and
merged in chunk order.
"""
from __future__ import annotations

import random
from concurrent.futures import ProcessPoolExecutor

from .canonical import build_canonical, completeness_pipeline
from .canonical import distinctness_check, existence_check, truth_lemma_check
from .filtration import build_filtration, filtration_agreement_check, fmp_search
from .gen import random_formula
from .kripke import FrameClass, KripkeModel, enumerate_models, random_model
from .proofs import corpus_paths, load_derivation  # noqa: F401  (re-export)
from .proofs import check_derivation, dualize_derivation, mutations, soundness_sample
from .proofs import CheckError
from .semantics import model_check_equiv
from .syntax import canonicalize, classify_fragment, fl_closure, free_names
from .textio import parse_formula, print_formula

_CHUNKS = 20  # fixed chunk count; independent of --jobs for determinism


def _chunk_bounds(total):
    size, extra = divmod(total, _CHUNKS)
    lo = 0
    for i in range(_CHUNKS):
        hi = lo + size + (1 if i < extra else 0)
        yield lo, hi
        lo = hi


def _map_chunks(worker, params, jobs):
    if jobs <= 1:
        return [worker(p) for p in params]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(worker, params))


# ---------------------------------------------------------------------------
# criterion 1: game and algebraic semantics agree at every position
# ---------------------------------------------------------------------------

def _crit1_chunk(param):
    seed, lo, hi = param
    base = seed * 1_000_003
    mismatches = []
    for i in range(lo, hi):
        f = random_formula(base + 2 * i)
        model = random_model(random.Random(base + 2 * i + 1), 6, ("p", "q", "r"))
        rep = model_check_equiv(f, model)
        if not rep.ok:
            mismatches.append((i, print_formula(f), rep.mismatches[:1]))
    return mismatches


def semantics_equivalence(seed, pairs=1000, jobs=1):
    params = [(seed, lo, hi) for lo, hi in _chunk_bounds(pairs)]
    mismatches = [m for chunk in _map_chunks(_crit1_chunk, params, jobs)
                  for m in chunk]
    line = f"criterion 1: semantics oracle equivalence: pairs={pairs} mismatches={len(mismatches)}"
    return (not mismatches, [line] + [f"  mismatch {m!r}" for m in mismatches])


# ---------------------------------------------------------------------------
# criterion 2: filtration agreement, min and max strategies
# ---------------------------------------------------------------------------

def _crit2_chunk(param):
    seed, lo, hi = param
    base = seed * 2_000_003
    violations = []
    for i in range(lo, hi):
        j = 0
        while True:
            f = random_formula(base + 31 * i + j)
            sigma = fl_closure([f])
            if len(sigma) <= 24:
                break
            j += 1
        atoms = tuple(sorted(free_names(f))) or ("p",)
        model = random_model(random.Random(base + 31 * i + 29), 8, atoms)
        for strategy in ("min", "max"):
            fr = build_filtration(model, sigma, strategy)
            rep = filtration_agreement_check(fr)
            if not rep.ok:
                violations.append((i, strategy, print_formula(f),
                                   rep.violations[:1]))
    return violations


def filtration_theorem(seed, pairs=500, jobs=1):
    params = [(seed, lo, hi) for lo, hi in _chunk_bounds(pairs)]
    violations = [v for chunk in _map_chunks(_crit2_chunk, params, jobs)
                  for v in chunk]
    line = f"criterion 2: filtration theorem: pairs={pairs} strategies=min,max violations={len(violations)}"
    return (not violations, [line] + [f"  violation {v!r}" for v in violations])


# ---------------------------------------------------------------------------
# criterion 3: pinned fragment-boundary regression (mu x.[]x on the 2-chain)
# ---------------------------------------------------------------------------

def boundary_regression():
    f = canonicalize(parse_formula("mu x.[]x"))
    verdict, in_fragment = classify_fragment(f, set())
    model = KripkeModel.make(("s0", "s1"), {("s0", "s1")}, {})
    fr = build_filtration(model, fl_closure([f]), "min")
    rep = filtration_agreement_check(fr, include_nonfragment=True)
    lines = [
        "criterion 3: fragment boundary: formula=mu x1. []x1 "
        f"classify={verdict.name} mucalc={in_fragment}",
        f"criterion 3: quotient states={len(fr.quotient.states)} "
        f"violations={sorted(rep.violations)!r}",
    ]
    ok = (not in_fragment and len(fr.quotient.states) == 1
          and len(rep.violations) == 4 and not rep.ok)
    return ok, lines


# ---------------------------------------------------------------------------
# criterion 4: finite model property bound on the fmp corpus
# ---------------------------------------------------------------------------

FMP_CORPUS = (
    ("p", "K"), ("p", "T"), ("p", "S5"),
    ("p | q", "K"), ("<>p", "K"), ("<>p", "S5"),
    ("[]p", "T"), ("p & q", "KB"),
    ("mu x.(p | <>x)", "K"), ("mu x.(p | <>x)", "KB"),
    ("nu x.(p & []x)", "T"), ("nu x.(p & []x)", "K4"),
)


def _refuting_witness(f, cls):
    from .semantics import eval_algebraic
    atoms = tuple(sorted(free_names(f))) or ("p",)
    for model in enumerate_models(3, atoms, cls):
        sat = eval_algebraic(f, model)
        if any(s not in sat for s in model.states):
            return model
    raise AssertionError(f"no small refuting witness for {print_formula(f)}")


def fmp_bound():
    failures = []
    for src, logic in FMP_CORPUS:
        f = canonicalize(parse_formula(src))
        cls = FrameClass[logic]
        witness = _refuting_witness(f, cls)
        fr = fmp_search(f, cls, witness)
        bound = 2 ** len(fl_closure([f]))
        if len(fr.quotient.states) > bound:
            failures.append((src, logic, "bound"))
    line = (f"criterion 4: fmp bound: instances={len(FMP_CORPUS)} "
            f"violations={len(failures)}")
    return (not failures, [line] + [f"  failure {x!r}" for x in failures])


# ---------------------------------------------------------------------------
# criterion 5: translation lemma conditions
# ---------------------------------------------------------------------------

def _crit5_chunk(param):
    seed, lo, hi = param
    from .filtration import ml_translation
    from .syntax import Binder, subformulas
    base = seed * 3_000_017
    failures = []
    for i in range(lo, hi):
        j = 0
        while True:
            f = random_formula(base + 37 * i + j)
            if any(isinstance(g, Binder) for g in subformulas(f)):
                break
            j += 1
        sigma = fl_closure([f])
        atoms = tuple(sorted(free_names(f))) or ("p",)
        model = random_model(random.Random(base + 37 * i + 36), 5, atoms)
        res = ml_translation(model, sigma)
        if not res.ok:
            bad = sorted(k for k, v in res.conditions.items() if not v)
            failures.append((i, print_formula(f), bad))
    return failures


def translation_lemmas(seed, instances=100, jobs=1):
    params = [(seed, lo, hi) for lo, hi in _chunk_bounds(instances)]
    failures = [x for chunk in _map_chunks(_crit5_chunk, params, jobs)
                for x in chunk]
    line = (f"criterion 5: translation lemmas: instances={instances} "
            f"violations={len(failures)}")
    return (not failures, [line] + [f"  failure {x!r}" for x in failures])


# ---------------------------------------------------------------------------
# criterion 6: proof kernel corpus, mutations, soundness sampling
# ---------------------------------------------------------------------------

def proof_kernel(seed, soundness_n=500):
    problems = []
    accepted = rejected = mutants = 0
    rules = set()
    axioms = set()
    for path in corpus_paths():
        doc = load_derivation(path)
        name = path.name
        expect_reject = name.startswith("reject_")
        try:
            thm = check_derivation(doc)
        except CheckError as e:
            if expect_reject:
                rejected += 1
            else:
                problems.append((name, f"unexpected rejection: {e}"))
            continue
        if expect_reject:
            problems.append((name, "rejection corpus entry was accepted"))
            continue
        accepted += 1
        for step in doc["steps"]:
            rules.add(step["rule"])
            if step["rule"] == "axiom":
                axioms.add(step["schema"])
        for k, what, mutant in mutations(doc):
            mutants += 1
            try:
                check_derivation(mutant)
                problems.append((name, f"mutation accepted at step {k}: {what}"))
            except CheckError:
                pass
        try:
            check_derivation(dualize_derivation(doc))
        except CheckError as e:
            problems.append((name, f"dual failed: {e}"))
        rep = soundness_sample(thm, n=soundness_n, seed=seed)
        if not rep.ok:
            problems.append((name, f"soundness refutation {rep.refutations[:1]!r}"))
    lines = [
        f"criterion 6: proof kernel: accepted={accepted} rejected={rejected} "
        f"mutants={mutants} soundness_n={soundness_n} problems={len(problems)}",
        f"criterion 6: rules={','.join(sorted(rules))}",
        f"criterion 6: axioms={','.join(sorted(axioms))}",
    ]
    required_rules = {"taut", "axiom", "mp", "mono_dia", "mono_box",
                      "subst", "lfp", "gfp"}
    required_axioms = {"normality", "additivity", "dual_additivity",
                       "prefix", "postfix", "T", "B", "4"}
    if not required_rules <= rules:
        problems.append(("corpus", f"missing rules {sorted(required_rules - rules)}"))
    if not required_axioms <= axioms:
        problems.append(("corpus", f"missing axioms {sorted(required_axioms - axioms)}"))
    if accepted < 10 or rejected < 1:
        problems.append(("corpus", "too few derivations"))
    return (not problems, lines + [f"  problem {p!r}" for p in problems])


# ---------------------------------------------------------------------------
# criterion 7: canonical model suite
# ---------------------------------------------------------------------------

CANONICAL_SIGMAS = ("p", "<>p", "mu x.(p | <>x)")
CANONICAL_LOGICS = ("K", "T", "KB")


def canonical_suite():
    failures = []
    lines = []
    for src in CANONICAL_SIGMAS:
        sigma = fl_closure([parse_formula(src)], with_negations=True)
        for logic in CANONICAL_LOGICS:
            cm = build_canonical(sigma, logic, unknown="fail")
            checks = [existence_check(cm), distinctness_check(cm),
                      truth_lemma_check(cm)]
            status = ",".join(f"{c.name}={'ok' if c.ok else 'FAIL'}"
                              for c in checks)
            lines.append(f"criterion 7: sigma=~FL({{{src}}}) logic={logic} "
                         f"atoms={len(cm.atoms)} {status}")
            for c in checks:
                if not c.ok:
                    failures.append((src, logic, c.name, c.violations[:1]))
    return (not failures, lines + [f"  failure {x!r}" for x in failures])


# ---------------------------------------------------------------------------
# criterion 8: completeness pipeline on the labelled corpus
# ---------------------------------------------------------------------------

# Labels are fixed constants derived before wiring up the pipeline, from the
# independent refuter plus exhaustive enumeration of models with <= 3 states.
SAT_CORPUS = (
    ("p", "SAT", "SAT"),
    ("p & !p", "UNSAT", "UNSAT"),
    ("p & []!p", "SAT", "SAT"),
    ("p & <>p", "SAT", "SAT"),
    ("p & []!p & <>p", "UNSAT", "UNSAT"),
    ("<>p & []!p & []p", "UNSAT", "UNSAT"),
    ("mu x.(p | <>x)", "SAT", "SAT"),
    ("nu x.(p & []x)", "SAT", "SAT"),
    ("[]false", "SAT", "SAT"),
    ("[]false & <>true", "UNSAT", "UNSAT"),
    ("(nu x.(p & []x)) & !p", "UNSAT", "UNSAT"),
    ("mu x.(q | <>x)", "SAT", "SAT"),
    ("q & <>q & []q", "SAT", "SAT"),
    ("<>p & <>!p", "SAT", "SAT"),
    ("(mu x.(p | <>x)) & !p", "SAT", "SAT"),
    ("p <-> !p", "UNSAT", "UNSAT"),
    ("(p -> q) & p & !q", "UNSAT", "UNSAT"),
    ("(p | q) & (!p | q) & !q", "UNSAT", "UNSAT"),
    ("q & [](!q | p)", "SAT", "SAT"),
    ("(mu x.(p | <>x)) & (nu x.(!p & []x))", "UNSAT", "UNSAT"),
)


def completeness_corpus():
    disagreements = []
    for src, k_label, kb_label in SAT_CORPUS:
        f = parse_formula(src)
        for logic, label in (("K", k_label), ("KB", kb_label)):
            res = completeness_pipeline(f, logic)
            want = "SAT" if label == "SAT" else "INCONSISTENT"
            if res.status != want:
                disagreements.append((src, logic, label, res.status))
    line = (f"criterion 8: completeness pipeline: corpus={len(SAT_CORPUS)} "
            f"logics=K,KB disagreements={len(disagreements)}")
    return (not disagreements,
            [line] + [f"  disagreement {x!r}" for x in disagreements])


# ---------------------------------------------------------------------------
# full report
# ---------------------------------------------------------------------------

def run_selftest(seed=42, jobs=1):
    """(ok, report text). The text is byte-identical for a fixed seed,
    independent of the jobs setting."""
    sections = [
        semantics_equivalence(seed, jobs=jobs),
        filtration_theorem(seed, jobs=jobs),
        boundary_regression(),
        fmp_bound(),
        translation_lemmas(seed, jobs=jobs),
        proof_kernel(seed),
        canonical_suite(),
        completeness_corpus(),
    ]
    ok = all(s_ok for s_ok, _ in sections)
    lines = [f"mucalc selftest seed={seed}"]
    for s_ok, s_lines in sections:
        lines.extend(s_lines)
    lines.append(f"result: {'PASS' if ok else 'FAIL'}")
    return ok, "\n".join(lines) + "\n"
