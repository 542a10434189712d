"""The nine acceptance criteria, one test each."""
import subprocess
import sys
import time

from mucalc import selftest


def timed(fn, *args, **kwargs):
    t0 = time.monotonic()
    out = fn(*args, **kwargs)
    return out, time.monotonic() - t0


def test_criterion_1_semantics_oracle_equivalence():
    (ok, lines), elapsed = timed(selftest.semantics_equivalence, 42, 1000)
    assert ok, lines
    assert elapsed < 120


def test_criterion_2_filtration_theorem():
    (ok, lines), elapsed = timed(selftest.filtration_theorem, 42, 500)
    assert ok, lines
    assert elapsed < 300


def test_criterion_3_fragment_boundary_pinned_bytes():
    ok, lines = selftest.boundary_regression()
    assert ok
    expected = (
        "criterion 3: fragment boundary: formula=mu x1. []x1 "
        "classify=NEITHER mucalc=False\n"
        "criterion 3: quotient states=1 violations="
        "[('[](mu x1. []x1)', 's0', True, False), "
        "('[](mu x1. []x1)', 's1', True, False), "
        "('mu x1. []x1', 's0', True, False), "
        "('mu x1. []x1', 's1', True, False)]"
    )
    assert "\n".join(lines) == expected


def test_criterion_4_fmp_bound():
    ok, lines = selftest.fmp_bound()
    assert ok, lines


def test_criterion_5_translation_lemmas():
    ok, lines = selftest.translation_lemmas(42, 100)
    assert ok, lines


def test_criterion_6_proof_kernel():
    (ok, lines), elapsed = timed(selftest.proof_kernel, 42, 500)
    assert ok, lines
    assert elapsed < 180


def test_criterion_7_canonical_suite():
    (ok, lines), elapsed = timed(selftest.canonical_suite)
    assert ok, lines
    assert elapsed < 600


def test_criterion_8_completeness_pipeline():
    ok, lines = selftest.completeness_corpus()
    assert ok, lines


def run_cli_selftest(*extra):
    proc = subprocess.run(
        [sys.executable, "-m", "mucalc.cli", "selftest", "--seed", "42",
         *extra],
        capture_output=True)
    assert proc.returncode == 0, proc.stdout.decode() + proc.stderr.decode()
    return proc.stdout


def test_criterion_9_selftest_determinism():
    first = run_cli_selftest("--jobs", "1")
    second = run_cli_selftest("--jobs", "1")
    parallel = run_cli_selftest("--jobs", "4")
    assert first == second
    assert first == parallel
    assert b"result: PASS" in first
