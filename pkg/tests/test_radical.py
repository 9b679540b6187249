from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from pbcalc.radical import (
    Cmp, RadicalValue, Shifted, add_real, compare_radical, compare_radicals, compare_real,
    exact_root, iroot, scale_real,
)

rationals = st.fractions(min_value=0, max_value=50, max_denominator=12)
roots = st.integers(min_value=1, max_value=5)


def test_worked_examples():
    assert compare_radical(RadicalValue(8, 3), 2) == Cmp.EQ
    assert compare_radical(RadicalValue(2, 2), Fraction(3, 2)) == Cmp.LT
    assert compare_radical(RadicalValue(5, 1), -1) == Cmp.GT


def test_canonical_form():
    assert RadicalValue(1, 2) == RadicalValue(1, 1)
    assert str(RadicalValue(8, 6)) == "2^(1/2)"
    assert RadicalValue(Fraction(4, 9), 2).rational() == Fraction(2, 3)
    assert RadicalValue(2, 2).rational() is None


def test_rejects_bad_input():
    with pytest.raises(ValueError):
        RadicalValue(-1, 2)
    with pytest.raises(ValueError):
        RadicalValue(1, 0)
    with pytest.raises(ValueError):
        iroot(-1, 2)


@given(st.integers(min_value=0, max_value=10 ** 30), st.integers(min_value=1, max_value=7))
def test_iroot_oracle(n, k):
    r = iroot(n, k)
    assert r ** k <= n < (r + 1) ** k


@given(rationals, roots, rationals)
def test_compare_against_rational_oracle(base, root, q):
    # oracle: compare base with q**root directly
    want = (base > q ** root) - (base < q ** root)
    assert compare_radical(RadicalValue(base, root), q) == want


@given(rationals, roots, rationals, roots)
def test_compare_two_radicals_oracle(a, p, b, q):
    want = (a ** q > b ** p) - (a ** q < b ** p)
    assert compare_radicals(RadicalValue(a, p), RadicalValue(b, q)) == want


@given(rationals, roots, rationals, roots)
def test_product_and_quotient_exact(a, p, b, q):
    x, y = RadicalValue(a, p), RadicalValue(b, q)
    prod = x * y
    # (xy)^(pq) = a^q b^p
    assert compare_radicals(prod, RadicalValue(a ** q * b ** p, p * q)) == Cmp.EQ
    if b:
        assert compare_radicals(prod / y, x) == Cmp.EQ


@given(rationals, roots, st.integers(min_value=1, max_value=40))
def test_bracket(base, root, bits):
    lo, hi = RadicalValue(base, root).bracket(bits)
    assert hi - lo == Fraction(1, 2 ** bits)
    assert lo ** root <= base < hi ** root


@given(rationals, st.integers(min_value=1, max_value=4))
def test_exact_root_roundtrip(q, k):
    assert exact_root(q ** k, k) == q


def test_shifted_comparisons():
    s2 = RadicalValue(2, 2)
    # sqrt2 + 1 vs 5/2: 1.414 + 1 < 2.5
    assert compare_real(add_real(s2, 1), Fraction(5, 2)) == Cmp.LT
    assert compare_real(add_real(s2, 1), Fraction(12, 5)) == Cmp.GT
    # sqrt2 vs sqrt3 - 1/4 (1.414 vs 1.482)
    assert compare_real(s2, add_real(RadicalValue(3, 2), Fraction(-1, 4))) == Cmp.LT
    assert compare_real(scale_real(s2, 2), RadicalValue(8, 2)) == Cmp.EQ
    assert isinstance(add_real(s2, 1), Shifted)
    assert add_real(RadicalValue(4, 2), 1) == Fraction(3)
