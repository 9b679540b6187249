import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from goldens import TRANSFORM_GOLDENS
from pbcalc.approx import approximate, compare_le, norm_side, weak_negation
from pbcalc.evaluator import evaluate
from pbcalc.grammar import parse_pb, print_formula
from pbcalc.suite import PBFuzzer, fuzz_structures
from pbcalc.syntax import (
    CountableAnd, NormGE, NormLE, Or, Rationals, Ref, RelGE, RelLE, Var, is_finitary,
)

F = Fraction
STRUCTURES = fuzz_structures()


@pytest.mark.parametrize("kind, n, text, want", TRANSFORM_GOLDENS)
def test_goldens(kind, n, text, want):
    fn = approximate if kind == "approx" else weak_negation
    assert print_formula(fn(parse_pb(text), n)) == want


def test_worked_examples():
    assert print_formula(approximate(parse_pb("(ge (norm x1) 0)"), 7)) == "(ge (norm x1) -1/7)"
    assert print_formula(weak_negation(parse_pb("(le (norm x1) 1)"), 4)) == "(ge (norm x1) 5/4)"
    a, b = parse_pb("(le (norm x1) 1)"), parse_pb("(ge (norm x2) 1)")
    assert weak_negation(Or((a, b)), 3) == parse_pb(
        f"(and {print_formula(weak_negation(a, 3))} {print_formula(weak_negation(b, 3))})")


def test_level_must_be_positive():
    phi = parse_pb("(le (norm x1) 1)")
    with pytest.raises(ValueError):
        approximate(phi, 0)
    with pytest.raises(ValueError):
        weak_negation(phi, 0)


def test_comparison_builder_shape():
    x = Var("x", 1)
    phi = compare_le(norm_side(x), norm_side(Var("x", 2)))
    assert phi == CountableAnd("q", Rationals(), Or((NormLE(x, Ref("q")), NormGE(Var("x", 2), Ref("q")))))


def _atom_bounds(phi, out):
    if isinstance(phi, NormLE | NormGE | RelLE | RelGE):
        out.append((type(phi).__name__, phi.bound))
    elif hasattr(phi, "parts"):
        for p in phi.parts:
            _atom_bounds(p, out)
    elif hasattr(phi, "body"):
        out.append(("quant", phi.bound))
        _atom_bounds(phi.body, out)
    return out


@settings(max_examples=60, deadline=None)
@given(st.integers(min_value=0, max_value=10 ** 9), st.integers(min_value=1, max_value=6))
def test_outputs_finitary_and_slack_monotone(seed, n):
    phi = PBFuzzer(random.Random(seed), countable=0).formula()
    a, b = approximate(phi, n), approximate(phi, n + 1)
    assert is_finitary(a) and is_finitary(weak_negation(phi, n))
    for (ka, ra), (kb, rb) in zip(_atom_bounds(a, []), _atom_bounds(b, [])):
        assert ka == kb
        if ka in ("NormLE", "RelLE"):
            assert rb <= ra
        elif ka in ("NormGE", "RelGE"):
            assert rb >= ra


@settings(max_examples=40, deadline=None)
@given(st.integers(min_value=0, max_value=10 ** 9), st.sampled_from(range(len(STRUCTURES))),
       st.integers(min_value=1, max_value=4))
def test_natural_and_negando_sampled(seed, idx, n):
    E = STRUCTURES[idx]
    phi = PBFuzzer(random.Random(seed)).formula()
    hi, lo = evaluate(E, approximate(phi, n + 1)), evaluate(E, approximate(phi, n))
    assert not hi or lo
    if is_finitary(phi) and evaluate(E, phi):
        assert lo
    if not lo:
        assert evaluate(E, weak_negation(phi, n + 1))
