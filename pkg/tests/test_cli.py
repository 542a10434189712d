"""The mucalc command line: subcommands, exit codes, witness replay."""
import json

import pytest

from mucalc.cli import dispatch


@pytest.fixture
def workdir(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    return tmp_path


def write(workdir, name, text):
    path = workdir / name
    path.write_text(text)
    return str(path)


CHAIN3 = json.dumps({"states": ["s0", "s1", "s2"],
                     "edges": [["s0", "s1"], ["s1", "s2"]],
                     "valuation": {"p": ["s2"]}})
CHAIN2 = json.dumps({"states": ["s0", "s1"],
                     "edges": [["s0", "s1"]], "valuation": {}})


def test_fmt(workdir, capsys):
    f = write(workdir, "f.mcf", "mu foo.(p|<>foo)\n")
    assert dispatch(["fmt", f]) == 0
    assert capsys.readouterr().out == "mu x1. p | <>x1\n"


def test_fmt_parse_error_exit_2(workdir, capsys):
    f = write(workdir, "f.mcf", "p &\n")
    assert dispatch(["fmt", f]) == 2


def test_classify_json(workdir, capsys):
    f = write(workdir, "f.mcf", "[]x\n")
    assert dispatch(["classify", f, "--vars", "x", "--json"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["fragment"] == "IN_COCON_X" and doc["mucalc"] is True


def test_closure(workdir, capsys):
    f = write(workdir, "f.mcf", "<>p\n")
    assert dispatch(["closure", f, "--neg", "--json"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["size"] == 4


def test_mc_both_engines_agree(workdir, capsys):
    m = write(workdir, "m.kmj", CHAIN3)
    f = write(workdir, "f.mcf", "mu x.(p | <>x)\n")
    assert dispatch(["mc", "--model", m, "--formula", f,
                     "--engine", "both"]) == 0
    out = capsys.readouterr().out
    assert "engines_agree=True" in out and "sat={s0,s1,s2}" in out


def test_filtrate_check_boundary_exit_1_and_witness(workdir, capsys):
    m = write(workdir, "m.kmj", CHAIN2)
    f = write(workdir, "f.mcf", "mu x.[]x\n")
    assert dispatch(["filtrate", "--model", m, "--sigma", f, "--check"]) == 1
    witness = json.loads((workdir / "mucalc-witness.json").read_text())
    assert witness["subcommand"] == "filtrate"
    assert len(witness["violations"]) == 4
    # the witness replays to the same failure
    assert dispatch(["filtrate", "--model", witness["model"],
                     "--sigma", witness["sigma"],
                     "--strategy", witness["strategy"], "--check"]) == 1


def test_filtrate_strategy_escape_exit_1(workdir):
    # an isolated !p state plus a p state: the equivalence closure adds an
    # edge that escapes R^max for sigma = FL({<>p})
    m = write(workdir, "m.kmj", json.dumps(
        {"states": ["s0", "s1"], "edges": [], "valuation": {"p": ["s1"]}}))
    f = write(workdir, "f.mcf", "<>p\n")
    assert dispatch(["filtrate", "--model", m, "--sigma", f,
                     "--strategy", "equivalence"]) == 1


def test_fmp(workdir, capsys):
    m = write(workdir, "w.kmj", json.dumps(
        {"states": ["s0"], "edges": [], "valuation": {"p": []}}))
    f = write(workdir, "f.mcf", "mu x.(p | <>x)\n")
    assert dispatch(["fmp", "--formula", f, "--class", "K",
                     "--witness", m, "--json"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["states"] <= doc["bound"]


def test_sat_exit_codes(workdir, capsys):
    f = write(workdir, "f.mcf", "p & []!p\n")
    assert dispatch(["sat", "--formula", f, "--class", "K"]) == 0
    g = write(workdir, "g.mcf", "mu x.((p | !p) & <>x)\n")
    assert dispatch(["sat", "--formula", g, "--class", "K"]) == 3


def test_canonical_check_all(workdir, capsys):
    f = write(workdir, "s.mcf", "<>p\n")
    assert dispatch(["canonical", "--sigma", f, "--logic", "K",
                     "--check-all"]) == 0
    out = capsys.readouterr().out
    assert "4 atoms" in out and "truth_lemma: ok=True" in out


def test_canonical_unknown_exit_3(workdir):
    f = write(workdir, "s.mcf", "mu x.<>x\n")
    assert dispatch(["canonical", "--sigma", f, "--logic", "K"]) == 3


def test_prove_corpus(workdir, capsys):
    from mucalc.proofs import corpus_paths
    good = [p for p in corpus_paths() if p.name == "diamond_prefix.drv"][0]
    assert dispatch(["prove", str(good)]) == 0
    assert "theorem (K)" in capsys.readouterr().out
    bad = [p for p in corpus_paths() if p.name == "reject_dangling.drv"][0]
    assert dispatch(["prove", str(bad)]) == 1


def test_prove_bad_json_exit_2(workdir):
    f = write(workdir, "x.drv", "{not json")
    assert dispatch(["prove", f]) == 2


def test_missing_file_exit_2(workdir):
    assert dispatch(["fmt", "no-such-file.mcf"]) == 2
