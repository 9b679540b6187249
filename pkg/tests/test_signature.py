from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from pbcalc.evaluator import Affine, FiniteNormedStructure, FnTable, NormPower
from pbcalc.signature import (
    Signature, SymbolDecl, check_structure_conformance, format_signature, parse_signature,
    validate_term,
)
from pbcalc.syntax import Apply, Var, Zero
from pbcalc.workbench import grid_structure

F = Fraction
x1, x2 = Var("x", 1), Var("x", 2)


def test_validate_term_examples():
    sig = Signature().add(SymbolDecl("T", 1))
    assert validate_term(sig, Apply("T", (x1,))) == []
    assert any("arity" in d for d in validate_term(sig, Apply("T", (x1, x2))))
    assert validate_term(Signature(), Zero()) == []
    assert any("unknown" in d for d in validate_term(sig, Apply("S", (x1,))))


def test_projection_has_no_violations():
    # orthogonal projection onto the line spanned by (1, 1, 0)
    h = F(1, 2)
    P = Affine(((h, h, F(0)), (h, h, F(0)), (F(0),) * 3), (F(0),) * 3)
    E = grid_structure(3, 2, F(1, 2), 1, limit=27, functions={"P": P})
    sig = Signature().add(SymbolDecl("P", 1, bounds={1: 1}, moduli={(1, F(1)): F(1)}))
    rep = check_structure_conformance(sig, E)
    assert rep.ok and rep.checked > 27


def test_table_bound_violation_has_witness():
    pts = [(F(v),) for v in (-3, -1, 0, 1, 3)]
    table = {(F(0),): (F(0),), (F(1),): (F(3),), (F(-1),): (F(0),)}
    E = FiniteNormedStructure(1, 1, pts, functions={"g": FnTable(table, 1)})
    rep = check_structure_conformance(Signature().add(SymbolDecl("g", 1, bounds={1: 2})), E)
    assert [v.kind for v in rep.violations] == ["bound"]
    assert "(1) -> 3" in str(rep.violations[0])


def _line(step, radius):
    k = int(radius / step)
    return [(F(i) * step,) for i in range(-k, k + 1)]


def _brute_modulus_violations(points, f, N, eps, delta):
    # direct oracle: unordered pairs inside the open N-ball
    inside = [p[0] for p in points if abs(p[0]) < N]
    out = 0
    for i, a in enumerate(inside):
        for b in inside[i + 1:]:
            if abs(a - b) < delta and abs(f(a) - f(b)) >= eps:
                out += 1
    return out


@pytest.mark.parametrize("rule, expect_bad", [(F(1), True), (F(1, 2), False)])
def test_scaling_modulus(rule, expect_bad):
    pts = _line(F(1, 4), 2)
    E = FiniteNormedStructure(1, 1, pts, functions={"D": Affine(((F(2),),), (F(0),))})
    sig = Signature(levels=(1,)).add(SymbolDecl("D", 1, modulus_rule=rule))
    rep = check_structure_conformance(sig, E)
    mods = [v for v in rep.violations if v.kind == "modulus"]
    want = sum(_brute_modulus_violations(pts, lambda a: 2 * a, 1, e, rule * e) for e in sig.epsilons)
    assert len(mods) == want
    assert bool(mods) == expect_bad


def test_relation_bounds_and_missing_symbols():
    E = grid_structure(1, 1, F(1, 2), 2, relations={"f": NormPower(2)})
    sig = Signature(levels=(1, 2)).add(SymbolDecl("f", 1, "rel", bounds={1: 1, 2: 3}))
    rep = check_structure_conformance(sig, E)
    assert [v.kind for v in rep.violations] == ["bound", "bound"]    # ||x|| = 2 gives 4 > 3
    rep = check_structure_conformance(Signature().add(SymbolDecl("h", 1)), E)
    assert [v.kind for v in rep.violations] == ["missing"]


@settings(max_examples=30, deadline=None)
@given(st.sets(st.integers(min_value=1, max_value=8), max_size=8))
def test_conformance_monotone_under_shrinking(keep):
    pts = _line(F(1, 4), 2)
    f = Affine(((F(2),),), (F(0),))
    sig = Signature(levels=(1, 2)).add(SymbolDecl("D", 1, bounds={1: 1, 2: 3}, modulus_rule=F(1)))
    full = {str(v) for v in check_structure_conformance(
        sig, FiniteNormedStructure(1, 1, pts, functions={"D": f})).violations}
    sub = [p for p in pts if abs(p[0]) * 4 in keep or p[0] == 0]
    part = {str(v) for v in check_structure_conformance(
        sig, FiniteNormedStructure(1, 1, sub, functions={"D": f})).violations}
    assert part <= full


def test_declaration_validation():
    with pytest.raises(ValueError):
        SymbolDecl("T", -1)
    with pytest.raises(ValueError):
        SymbolDecl("T", 1, moduli={(1, F(1)): F(0)})
    with pytest.raises(ValueError):
        Signature().add(SymbolDecl("T", 1)).add(SymbolDecl("T", 2, "rel"))


def test_moduli_normalized_and_rules():
    d = SymbolDecl("T", 1, bounds={1: 2}, bound_rule=(3, 1),
                   moduli={(1, F(1, 4)): F(1, 2), (1, F(1, 2)): F(1, 8)}, modulus_rule=F(1, 3))
    assert d.bound(1) == 2 and d.bound(5) == 16
    # a delta valid for 1/4 is valid for 1/2 as well
    assert d.modulus(1, F(1, 2)) == F(1, 2)
    assert d.modulus(2, F(1, 2)) == F(1, 6)


def test_signature_text_round_trip():
    text = ("[symbols]\nfn T 1\nrel R 2\n[bounds]\nT 1 -> 2\nT default 1 1\nR 1 -> 4\n"
            "[moduli]\nT 1 1/2 -> 1/4\nR default 1/2\n[grid]\nlevels = 1 2\neps = 1/2 1\n")
    sig = parse_signature(text)
    assert sig.function_arity("T") == 1 and sig.relation_arity("R") == 2
    assert sig.levels == (1, 2) and sig.epsilons == (F(1, 2), F(1))
    assert parse_signature(format_signature(sig)) == sig
    with pytest.raises(ValueError, match="undeclared"):
        parse_signature("[symbols]\nfn T 1\n[bounds]\nS 1 -> 2\n")
