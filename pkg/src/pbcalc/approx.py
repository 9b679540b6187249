"""The n-approximation and the weak approximate negation of PB formulas.

Both transforms are plain structural recursions and both land in the
finitary fragment: countable conjunctions are cut to their first ``n``
instances in the canonical enumeration of their index domain.
"""
from __future__ import annotations

from dataclasses import replace
from fractions import Fraction

from .syntax import (
    And, CountableAnd, Exists, Forall, NormGE, NormLE, Or, Rationals, Ref, RelGE, RelLE,
    SeqAnd, SyntaxErrorPB, instances, is_literal, shift, value_refs,
)


def _level(n: int) -> Fraction:
    if not isinstance(n, int) or n < 1:
        raise ValueError(f"approximation level must be a positive integer, got {n!r}")
    return Fraction(1, n)


def approximate(phi, n: int):
    """phi_n: relax every atom and quantifier bound by 1/n, cut countable conjunctions at n."""
    eps = _level(n)
    return _approx(phi, n, eps)


def _approx(phi, n, eps):
    if isinstance(phi, NormLE | RelLE):
        return replace(phi, bound=shift(phi.bound, eps))
    if isinstance(phi, NormGE | RelGE):
        return replace(phi, bound=shift(phi.bound, -eps))
    if isinstance(phi, And | Or):
        return type(phi)(tuple(_approx(p, n, eps) for p in phi.parts))
    if isinstance(phi, CountableAnd | SeqAnd):
        return And(tuple(_approx(p, n, eps) for p in instances(phi, n)))
    if isinstance(phi, Exists):
        return Exists(phi.var, shift(phi.bound, eps), _approx(phi.body, n, eps))
    if isinstance(phi, Forall):
        return Forall(phi.var, shift(phi.bound, -eps), _approx(phi.body, n, eps))
    raise TypeError(f"approximate expects a PB formula, got {type(phi).__name__}")


def _clamped(bound):
    """Bound for the forall-to-exists clause; negative radii become the ball {0}."""
    if is_literal(bound) and bound < 0:
        return Fraction(0)
    if value_refs(bound):
        raise SyntaxErrorPB("weak negation of an uninstantiated quantifier bound")
    return bound


def weak_negation(phi, n: int):
    """neg(phi, n): the finitary dual of phi with margin 1/n."""
    eps = _level(n)
    return _neg(phi, n, eps)


def _neg(phi, n, eps):
    if isinstance(phi, NormLE):
        return NormGE(phi.term, shift(phi.bound, eps))
    if isinstance(phi, NormGE):
        return NormLE(phi.term, shift(phi.bound, -eps))
    if isinstance(phi, RelLE):
        return RelGE(phi.rel, shift(phi.bound, eps))
    if isinstance(phi, RelGE):
        return RelLE(phi.rel, shift(phi.bound, -eps))
    if isinstance(phi, And):
        return Or(tuple(_neg(p, n, eps) for p in phi.parts))
    if isinstance(phi, Or):
        return And(tuple(_neg(p, n, eps) for p in phi.parts))
    if isinstance(phi, CountableAnd | SeqAnd):
        return Or(tuple(_neg(p, n, eps) for p in instances(phi, n)))
    if isinstance(phi, Exists):
        return Forall(phi.var, shift(phi.bound, eps), _neg(phi.body, n, eps))
    if isinstance(phi, Forall):
        return Exists(phi.var, _clamped(shift(phi.bound, -eps)), _neg(phi.body, n, eps))
    raise TypeError(f"weak_negation expects a PB formula, got {type(phi).__name__}")


# ---------------------------------------------------------------------------
# comparisons between two real-valued quantities


class Side:
    """One side of a real comparison: the norm of a term or a relation value."""

    def __init__(self, obj, norm: bool):
        self.obj, self.norm = obj, norm

    def le(self, r):
        return NormLE(self.obj, r) if self.norm else RelLE(self.obj, r)

    def ge(self, r):
        return NormGE(self.obj, r) if self.norm else RelGE(self.obj, r)


def norm_side(term) -> Side:
    return Side(term, True)


def rel_side(rel) -> Side:
    return Side(rel, False)


def compare_le(lhs: Side, rhs: Side, binder: str = "q"):
    """lhs <= rhs as the countable conjunction over q in Q of (lhs <= q or rhs >= q)."""
    q = Ref(binder)
    return CountableAnd(binder, Rationals(), Or((lhs.le(q), rhs.ge(q))))


def compare_ge(lhs: Side, rhs: Side, binder: str = "q"):
    return compare_le(rhs, lhs, binder)


def compare_eq(lhs: Side, rhs: Side, binder: str = "q"):
    return And((compare_le(lhs, rhs, binder), compare_ge(lhs, rhs, binder)))
