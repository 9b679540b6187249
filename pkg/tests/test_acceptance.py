"""Acceptance criteria 1-9; each test prints one PASS/FAIL line with its timing and limit."""
import time
from pathlib import Path

import pytest

from audit import float_findings, source_files
from fuzzgen import GrammarFuzzer
from goldens import TRANSFORM_GOLDENS, behrends_almost_fixture, ulam_almost_fixture
from pbcalc import structfile
from pbcalc.approx import approximate, weak_negation
from pbcalc.grammar import parse_formula, parse_pb, print_formula
from pbcalc.la import decode_almost, search_uniform_index, verify_uniform_index
from pbcalc.radical import RadicalValue
from pbcalc.suite import fuzz_structures, run_all, run_coherence, run_exclusion, run_natural, \
    run_negando
from pbcalc.syntax import INF
from pbcalc.workbench import (
    KrivineQuery, build_behrends, build_ulam, krivine_search, ulam_family, unit_basis_structure,
    unit_vectors,
)

MS = 1_000_000
DATA = Path(structfile.__file__).parent / "data"


@pytest.fixture
def report(capsys):
    def emit(number, title, ok, elapsed_ns, limit_s, detail=""):
        in_time = elapsed_ns <= limit_s * 1000 * MS
        mark = "PASS" if ok and in_time else "FAIL"
        line = (f"criterion {number} {mark}: {title} "
                f"[{elapsed_ns // MS} ms, limit {limit_s} s]{' ' + detail if detail else ''}")
        with capsys.disabled():
            print(f"\n{line}")
        assert ok, line
        assert in_time, line
    return emit


def test_criterion_1_transform_fixtures(report):
    t0 = time.perf_counter_ns()
    bad = []
    for kind, n, text, want in TRANSFORM_GOLDENS:
        fn = approximate if kind == "approx" else weak_negation
        got = print_formula(fn(parse_pb(text), n))
        if got != want:
            bad.append(f"{kind} {n} {text}: {got}")
    report(1, f"{len(TRANSFORM_GOLDENS)} transform goldens token-for-token",
           len(TRANSFORM_GOLDENS) == 12 and not bad, time.perf_counter_ns() - t0, 1,
           "; ".join(bad))


STRUCTURES = fuzz_structures()


def test_criterion_2_natural(report):
    res = run_natural(seed=0, count=500, structures=STRUCTURES)
    report(2, f"natural over 500 formulas x 6 structures x n=1..5 ({res.passed} cases)",
           res.ok and res.passed == 500 * 6 * 5, res.elapsed_ns, 120, "; ".join(res.witnesses))


def test_criterion_3_negando(report):
    res = run_negando(seed=0, count=500, structures=STRUCTURES)
    report(3, f"negando over 500 formulas x 6 structures x n=1..5 ({res.passed} cases)",
           res.ok and res.passed == 500 * 6 * 5, res.elapsed_ns, 120, "; ".join(res.witnesses))


def test_criterion_4_branch_coherence_and_exclusion(report):
    coh = run_coherence(seed=0, count=100, structures=STRUCTURES)
    exc = run_exclusion(seed=0, count=100, structures=STRUCTURES, N=6)
    ok = coh.ok and exc.ok and coh.passed == 600 and exc.passed > 0
    report(4, f"coherence on 100 LA formulas ({coh.passed} cases), exclusion at N=6 "
              f"({exc.passed} cases)", ok, coh.elapsed_ns + exc.elapsed_ns, 180,
           "; ".join(coh.witnesses + exc.witnesses + exc.notes))


def test_criterion_5_almost_version_fixtures(report):
    t0 = time.perf_counter_ns()
    bad = []
    _, us, ut, _ = build_ulam(1)
    _, bs, bt, _ = build_behrends(1, 2, 2)
    for n, m in [(1, 1), (2, 3), (3, 2), (4, 6)]:
        for name, s, t, fixture in (("ulam", us, ut, ulam_almost_fixture),
                                    ("behrends", bs, bt, behrends_almost_fixture)):
            sch = decode_almost(s, t, n, m)
            if (sch.hypothesis, sch.conclusion) != fixture(n, m):
                bad.append(f"{name} n={n} m={m}")
    report(5, "decode_almost AST equals the hand-built margin fixtures (Ulam, Behrends)",
           not bad, time.perf_counter_ns() - t0, 1, ", ".join(bad))


def test_criterion_6_uniform_index(report):
    t0 = time.perf_counter_ns()
    fam = ulam_family()
    _, sigma, theta, _ = build_ulam(1)
    shape_ok = all(E.dim <= 2 and len(E.carrier) <= 25 for E in fam)
    res = search_uniform_index(sigma, theta, 4, fam, 64)
    bad = verify_uniform_index(sigma, theta, 4, res.m, fam) if res.found else ["not found"]
    report(6, f"uniform index over {len(fam)} Ulam structures at n=4: m = {res.m}, "
              f"{len(bad)} counterexamples on re-verification",
           shape_ok and res.found and not bad, time.perf_counter_ns() - t0, 300)


def test_criterion_7_krivine(report):
    t0 = time.perf_counter_ns()
    one = RadicalValue(1, 1)
    picks = []
    for p in (1, 2, INF):
        q = KrivineQuery(unit_vectors(4), 2, [1, 2, INF], 1, coeff_depth=25)
        best = krivine_search(unit_basis_structure(4, p), q).best
        picks.append((p, best.p, best.distortion == one and best.checked >= 25))
    ok = all(want == got and exact for want, got, exact in picks)
    shown = ", ".join(f"l{'inf' if w is INF else w} -> {'inf' if g is INF else g}"
                      for w, g, _ in picks)
    report(7, f"Krivine search picks p with distortion exactly 1 ({shown})", ok,
           time.perf_counter_ns() - t0, 120)


def test_criterion_8_exactness(report):
    t0 = time.perf_counter_ns()
    findings = [f for path in source_files() for f in float_findings(path)]
    first = run_all(seed=0).render(timings=False)
    second = run_all(seed=0).render(timings=False)
    ok = not findings and first == second and first.endswith("overall: PASS")
    report(8, "no approximate numerics in the build; full battery bit-reproducible", ok,
           time.perf_counter_ns() - t0, 300, "; ".join(findings))


def test_criterion_9_parser_round_trips(report):
    t0 = time.perf_counter_ns()
    bad = 0
    for seed in range(1000):
        phi = GrammarFuzzer(seed).formula()
        text = print_formula(phi)
        back = parse_formula(text)
        if back != phi or print_formula(back) != text:
            bad += 1
    files = sorted(DATA.rglob("*.struct"))
    sbad = [f.name for f in files
            if structfile.dumps(structfile.loads(f.read_text())) != f.read_text()]
    report(9, f"1000 fuzzed formulas ({bad} mismatches), {len(files)} structure files "
              f"({len(sbad)} mismatches)", bad == 0 and not sbad and files,
           time.perf_counter_ns() - t0, 30)
