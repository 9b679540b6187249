import subprocess
import sys
from pathlib import Path

import pytest

from pbcalc import cli

DATA = Path(cli.__file__).parent / "data"


def run(capsys, *argv):
    code = cli.main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text)
    return p


def test_parse_approx_neg(tmp_path, capsys):
    f = write(tmp_path, "f.pb", "(and (le (norm x1) 1) (ge (norm x2) 1))")
    assert run(capsys, "parse", f)[1].strip() == "(and (le (norm x1) 1) (ge (norm x2) 1))"
    assert run(capsys, "approx", "--n", 2, f)[1].strip() == \
        "(and (le (norm x1) 3/2) (ge (norm x2) 1/2))"
    assert run(capsys, "neg", "--n", 2, f)[1].strip() == \
        "(or (ge (norm x1) 3/2) (le (norm x2) 1/2))"


def test_syntax_error_exit_code(tmp_path, capsys):
    f = write(tmp_path, "bad.pb", "(le (norm x1) 1")
    code, _, err = run(capsys, "parse", f)
    assert code == 2 and "pbcalc: error: 1:1" in err
    code, _, err = run(capsys, "parse", tmp_path / "missing.pb")
    assert code == 2 and "error" in err


def test_branch_approx(tmp_path, capsys):
    f = write(tmp_path, "f.la", "(not (le (norm x1) 1))")
    b = write(tmp_path, "h.br", "(neg-const 3)")
    code, out, _ = run(capsys, "branch-approx", "--n", 2, "--branch", b, f)
    assert code == 0 and out.strip() == "(and (ge (norm x1) 5/6) (ge (norm x1) 5/6))"


def test_decode_almost(tmp_path, capsys):
    s = write(tmp_path, "s.pb", "(le (norm (c)) 1)")
    t = write(tmp_path, "t.pb", "(le (norm (c)) 2)")
    code, out, _ = run(capsys, "decode-almost", "--n", 2, "--m", 4, s, t)
    assert code == 0 and "(le (norm (c)) 5/4)" in out and "(le (norm (c)) 5/2)" in out


def test_structure_file_is_not_a_formula(capsys):
    line5 = DATA / "reflexivity" / "line5.struct"
    code, _, err = run(capsys, "eval", line5, line5)
    assert code == 2 and "pbcalc: error:" in err


def test_eval_with_assignment(tmp_path, capsys):
    line5 = DATA / "reflexivity" / "line5.struct"
    f = write(tmp_path, "f.pb", "(exists (y 1) (ge (norm (+ y (scale -1 x1))) 1))")
    code, out, _ = run(capsys, "eval", line5, f, "--assign", "x1=0")
    assert code == 0 and out.strip() == "true"
    g = write(tmp_path, "g.pb", "(forall (y 1) (le (norm y) 1/2))")
    code, out, _ = run(capsys, "eval", line5, g)
    assert code == 1 and out.startswith("false") and "y = " in out
    h = write(tmp_path, "h.pb", "(le (norm x1) 1)")
    code, out, _ = run(capsys, "ap", "--N", 4, line5, h, "--assign", "x1=1")
    assert code == 0 and out.strip() == "HoldsToDepth(4)"


def test_ap_with_reflexivity_branch(capsys):
    d = DATA / "reflexivity"
    code, out, _ = run(capsys, "ap", "--N", 2, "--branch", d / "branch.br",
                       d / "line5.struct", d / "sentence.pb")
    assert code == 0 and out.strip() == "HoldsToDepth(2)"


def test_check_structure(tmp_path, capsys):
    st = write(tmp_path, "s.struct", "[space] dim=1 norm=lp:1\n[carrier]\n0\n1\n-1\n"
                                     "[fn D affine]\n2\n0\n")
    good = write(tmp_path, "good.sig", "[symbols]\nfn D 1\n[bounds]\nD 1 -> 2\n")
    bad = write(tmp_path, "bad.sig", "[symbols]\nfn D 1\n[bounds]\nD 1 -> 1\n")
    assert run(capsys, "check-structure", st, good)[0] == 0
    code, out, _ = run(capsys, "check-structure", st, bad)
    assert code == 1 and "bound" in out


def test_example_emit_matches_bundled(tmp_path, capsys):
    for name in ("reflexivity", "ulam", "behrends", "krivine"):
        out = tmp_path / name
        assert run(capsys, "example", name, "--emit", out)[0] == 0
        for f in (DATA / name).rglob("*"):
            if f.is_file():
                assert (out / f.relative_to(DATA / name)).read_text() == f.read_text(), f


def test_search_uniform_on_ulam(capsys):
    d = DATA / "ulam"
    code, out, _ = run(capsys, "search-uniform", "--n", 2, "--m-max", 16,
                       d / "sigma.pb", d / "theta.pb", d / "structures")
    assert code == 0 and "least m = " in out and "re-verification" in out
    assert "0 counterexamples" in out


def test_krivine_search_cli(capsys):
    code, out, _ = run(capsys, "krivine-search", DATA / "krivine" / "unit_basis_l1_4.struct",
                       "--n", 2, "--eps", "1/10", "--depth", 25)
    assert code == 0 and out.startswith("best: p = 1,") and "distortion = 1," in out


def test_estimate_w_cli(capsys):
    code, out, _ = run(capsys, "estimate-w", "--n", 1, "--p", "1", "--eps", "1", "--analytic")
    assert code == 0 and "w = 3" in out and "analytic fallback w = 2" in out


def test_suite_small(capsys):
    code, out, _ = run(capsys, "suite", "--scale", "1/20", "--no-timings")
    assert code == 0 and "time:" not in out and "FAIL" not in out


def test_console_script_help():
    r = subprocess.run([sys.executable, "-m", "pbcalc.cli", "--help"], capture_output=True,
                       text=True, check=True)
    assert "decode-almost" in r.stdout and "krivine-search" in r.stdout


def test_missing_subcommand():
    with pytest.raises(SystemExit):
        cli.main([])
