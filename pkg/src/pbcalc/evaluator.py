"""Exact evaluation of finitary PB formulas over finite rational normed structures.

Quantifiers range over the structure's finite carrier (an epsilon-net
reading of the bounded quantifiers); terms are evaluated in the ambient
rational space.  Norm values are :class:`RadicalValue` instances and every
comparison is an integer computation.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .radical import RadicalValue, compare_radical, compare_real
from .syntax import (
    INF, And, Apply, CountableAnd, Exists, Forall, Infinity, NormGE, NormLE, Or,
    RelGE, RelLE, RelLin, Scale, SeqAnd, Sum, SumRange, Var, Zero, eval_value, simplify,
)


class EvalError(ValueError):
    """Evaluation cannot proceed (unassigned variable, table miss, infinitary node)."""


class CoherenceViolation(AssertionError):
    """A higher approximation level held after a lower one failed."""


Vector = tuple


def vec(*xs) -> Vector:
    return tuple(Fraction(x) for x in xs)


def vadd(a: Vector, b: Vector) -> Vector:
    return tuple(x + y for x, y in zip(a, b))


def vscale(c: Fraction, a: Vector) -> Vector:
    return tuple(c * x for x in a)


def vneg(a: Vector) -> Vector:
    return tuple(-x for x in a)


def fmt_vec(v: Vector) -> str:
    return " ".join(str(x) for x in v)


@dataclass(frozen=True)
class Affine:
    """x -> matrix @ x + offset."""
    matrix: tuple
    offset: tuple

    def __call__(self, x: Vector) -> Vector:
        return tuple(sum((a * b for a, b in zip(row, x)), Fraction(0)) + o
                     for row, o in zip(self.matrix, self.offset))


@dataclass(frozen=True)
class FnTable:
    mapping: dict = field(hash=False)
    arity: int = 1


@dataclass(frozen=True)
class NormPower:
    exponent: int


@dataclass(frozen=True)
class RelTable:
    mapping: dict = field(hash=False)
    arity: int = 1


class FiniteNormedStructure:
    """A finite carrier of rational vectors in ``dim`` dimensions with an l_p norm."""

    def __init__(self, dim: int, p, carrier, functions=None, relations=None,
                 constants=None, name: str = "", signature=None):
        if dim < 1:
            raise ValueError("dimension must be positive")
        if not (p is INF or (isinstance(p, int) and p >= 1)):
            raise ValueError(f"norm must be lp with integer p >= 1 or linf, got {p!r}")
        self.dim, self.p, self.name = dim, p, name
        pts = []
        seen = set()
        for c in carrier:
            c = tuple(Fraction(x) for x in c)
            if len(c) != dim:
                raise ValueError(f"carrier point {c} has wrong dimension")
            if c not in seen:
                seen.add(c)
                pts.append(c)
        zero = (Fraction(0),) * dim
        if zero not in seen:
            raise ValueError("carrier must contain the zero vector")
        for c in pts:
            if vneg(c) not in seen:
                raise ValueError(f"carrier is not closed under negation: {fmt_vec(c)}")
        self.carrier = tuple(pts)
        self.functions = dict(functions or {})
        self.relations = dict(relations or {})
        self.constants = {k: tuple(Fraction(x) for x in v) for k, v in (constants or {}).items()}
        self.signature = signature
        for nm, rel in self.relations.items():
            if isinstance(rel, NormPower) and p is not INF and rel.exponent % p:
                raise ValueError(f"relation {nm}: exponent {rel.exponent} is not a multiple of p={p}")
        for nm, f in self.functions.items():
            if isinstance(f, Affine) and (len(f.matrix) != dim or len(f.offset) != dim):
                raise ValueError(f"function {nm}: affine map has wrong shape")
        self._norms: dict = {}
        self._balls: dict = {}

    # -- norms ---------------------------------------------------------------
    def norm(self, v: Vector) -> RadicalValue:
        r = self._norms.get(v)
        if r is None:
            if self.p is INF:
                r = RadicalValue(max((abs(x) for x in v), default=Fraction(0)), 1)
            else:
                r = RadicalValue(sum((abs(x) ** self.p for x in v), Fraction(0)), self.p)
            self._norms[v] = r
        return r

    def norm_power(self, v: Vector, k: int) -> Fraction:
        if self.p is INF:
            return max((abs(x) for x in v), default=Fraction(0)) ** k
        if k % self.p:
            raise EvalError(f"||x||^{k} is not rational in l_{self.p}")
        return sum((abs(x) ** self.p for x in v), Fraction(0)) ** (k // self.p)

    def ball(self, r) -> tuple:
        """Carrier points of norm <= r."""
        pts = self._balls.get(r)
        if pts is None:
            if isinstance(r, Fraction | int):
                pts = tuple(c for c in self.carrier if compare_radical(self.norm(c), r) <= 0)
            else:
                pts = tuple(c for c in self.carrier if compare_real(self.norm(c), r) <= 0)
            self._balls[r] = pts
        return pts

    @property
    def zero(self) -> Vector:
        return (Fraction(0),) * self.dim

    def function_arities(self) -> dict:
        out = {k: 0 for k in self.constants}
        for k, f in self.functions.items():
            out[k] = 1 if isinstance(f, Affine) else f.arity
        return out

    def relation_arities(self) -> dict:
        return {k: 1 if isinstance(r, NormPower) else r.arity for k, r in self.relations.items()}

    def __eq__(self, other):
        if not isinstance(other, FiniteNormedStructure):
            return NotImplemented
        return (self.dim, self.p, set(self.carrier), self.constants, self.name) == \
            (other.dim, other.p, set(other.carrier), other.constants, other.name) and \
            _interp_eq(self.functions, other.functions) and \
            _interp_eq(self.relations, other.relations)

    def __repr__(self):
        norm = "linf" if self.p is INF else f"l{self.p}"
        return f"<FiniteNormedStructure {self.name or '?'} dim={self.dim} {norm} |carrier|={len(self.carrier)}>"


def _interp_eq(a: dict, b: dict) -> bool:
    if a.keys() != b.keys():
        return False
    for k in a:
        x, y = a[k], b[k]
        if type(x) is not type(y):
            return False
        if isinstance(x, FnTable | RelTable):
            if x.mapping != y.mapping or x.arity != y.arity:
                return False
        elif x != y:
            return False
    return True


# ---------------------------------------------------------------------------
# term and relation evaluation


def _coeff(c) -> Fraction:
    v = eval_value(c)
    if isinstance(v, int | Fraction) and not isinstance(v, bool):
        return Fraction(v)
    raise EvalError(f"scalar coefficient {v!r} is not a rational")


def eval_term(E: FiniteNormedStructure, t, env: dict) -> Vector:
    if isinstance(t, Var):
        try:
            return env[t.key]
        except KeyError:
            raise EvalError(f"unassigned variable {t.name}{t.index or ''}") from None
    if isinstance(t, Sum):
        return vadd(eval_term(E, t.left, env), eval_term(E, t.right, env))
    if isinstance(t, Scale):
        return vscale(_coeff(t.coeff), eval_term(E, t.arg, env))
    if isinstance(t, Zero):
        return E.zero
    if isinstance(t, Apply):
        if not t.args:
            if t.symbol in E.constants:
                return E.constants[t.symbol]
            f = E.functions.get(t.symbol)
            if isinstance(f, FnTable) and f.arity == 0:
                return f.mapping[()]
            raise EvalError(f"constant {t.symbol!r} is not interpreted")
        f = E.functions.get(t.symbol)
        if f is None:
            raise EvalError(f"function {t.symbol!r} is not interpreted")
        args = tuple(eval_term(E, a, env) for a in t.args)
        if isinstance(f, Affine):
            if len(args) != 1:
                raise EvalError(f"affine function {t.symbol} is unary")
            return f(args[0])
        key = args[0] if f.arity == 1 else args
        try:
            return f.mapping[key]
        except KeyError:
            from .grammar import fmt_term
            pts = " | ".join(fmt_vec(a) for a in args)
            raise EvalError(f"table for {t.symbol} undefined at {pts} (term {fmt_term(t)})") from None
    if isinstance(t, SumRange):
        raise EvalError("unexpanded sum template; instantiate first")
    raise TypeError(f"not a term: {t!r}")


def eval_rel(E: FiniteNormedStructure, r, env: dict) -> Fraction:
    if isinstance(r, RelLin):
        return sum((_coeff(c) * eval_rel(E, a, env) for c, a in r.items), Fraction(0))
    rel = E.relations.get(r.symbol)
    if rel is None:
        raise EvalError(f"relation {r.symbol!r} is not interpreted")
    args = tuple(eval_term(E, a, env) for a in r.args)
    if isinstance(rel, NormPower):
        if len(args) != 1:
            raise EvalError(f"norm-power relation {r.symbol} is unary")
        return E.norm_power(args[0], rel.exponent)
    key = args[0] if rel.arity == 1 else args
    try:
        return rel.mapping[key]
    except KeyError:
        pts = " | ".join(fmt_vec(a) for a in args)
        raise EvalError(f"relation table {r.symbol} undefined at {pts}") from None


_BOUNDS: dict = {}


def bound_value(b):
    if isinstance(b, Fraction):
        return b
    if isinstance(b, int):
        return Fraction(b)
    v = _BOUNDS.get(b)
    if v is None:
        v = eval_value(b)
        if isinstance(v, Infinity | tuple):
            raise EvalError(f"bound {v!r} is not a real number")
        _BOUNDS[b] = v
    return v


def _norm_cmp(E, t, env, b) -> int:
    nv = E.norm(eval_term(E, t, env))
    bv = bound_value(b)
    if isinstance(bv, Fraction):
        return compare_radical(nv, bv)
    return compare_real(nv, bv)


def evaluate(E: FiniteNormedStructure, phi, assignment: dict | None = None) -> bool:
    """E |= phi[assignment] for a finitary PB formula, quantifiers over the carrier."""
    env = {}
    for k, v in (assignment or {}).items():
        key = k.key if isinstance(k, Var) else k
        env[key] = tuple(Fraction(x) for x in v)
    return _eval(E, simplify(phi), env)


def _eval(E, phi, env) -> bool:
    if isinstance(phi, NormLE):
        return _norm_cmp(E, phi.term, env, phi.bound) <= 0
    if isinstance(phi, NormGE):
        return _norm_cmp(E, phi.term, env, phi.bound) >= 0
    if isinstance(phi, And):
        return all(_eval(E, p, env) for p in phi.parts)
    if isinstance(phi, Or):
        return any(_eval(E, p, env) for p in phi.parts)
    if isinstance(phi, Exists | Forall):
        key = phi.var.key
        pts = E.ball(bound_value(phi.bound))
        body = phi.body
        if isinstance(phi, Exists):
            return any(_eval(E, body, {**env, key: c}) for c in pts)
        return all(_eval(E, body, {**env, key: c}) for c in pts)
    if isinstance(phi, RelLE | RelGE):
        v = eval_rel(E, phi.rel, env)
        c = compare_real(v, bound_value(phi.bound))
        return c <= 0 if isinstance(phi, RelLE) else c >= 0
    if isinstance(phi, CountableAnd | SeqAnd):
        raise EvalError("countable conjunction reached the evaluator; approximate first")
    raise TypeError(f"evaluate expects a finitary PB formula, got {type(phi).__name__}")


def explain_failure(E, phi, assignment: dict | None = None, limit: int = 12) -> list[str]:
    """A short trail of why phi is false: counterexample points and failing atoms."""
    from .grammar import fmt_term, print_formula
    env = {(k.key if isinstance(k, Var) else k): v for k, v in (assignment or {}).items()}
    out: list[str] = []
    node = simplify(phi)
    while len(out) < limit:
        if isinstance(node, NormLE | NormGE):
            val = E.norm(eval_term(E, node.term, env))
            out.append(f"||{fmt_term(node.term)}|| = {val} fails {print_formula(node)}")
            return out
        if isinstance(node, RelLE | RelGE):
            out.append(f"{eval_rel(E, node.rel, env)} fails {print_formula(node)}")
            return out
        if isinstance(node, And):
            nxt = next((p for p in node.parts if not _eval(E, p, env)), None)
            if nxt is None:
                return out
            node = nxt
            continue
        if isinstance(node, Or):
            out.append(f"all {len(node.parts)} disjuncts fail")
            return out
        if isinstance(node, Forall):
            for c in E.ball(bound_value(node.bound)):
                env2 = {**env, node.var.key: c}
                if not _eval(E, node.body, env2):
                    out.append(f"{fmt_term(node.var)} = {fmt_vec(c)}")
                    env, node = env2, node.body
                    break
            else:
                return out
            continue
        if isinstance(node, Exists):
            out.append(f"no {fmt_term(node.var)} with norm <= {bound_value(node.bound)} works")
            return out
        return out
    return out


# ---------------------------------------------------------------------------
# prefix semantics for approximate truth


@dataclass
class PrefixVerdict:
    depth: int
    fails_at: int | None = None
    witness: list = field(default_factory=list)
    trusted: bool = False

    @property
    def holds(self) -> bool:
        return self.fails_at is None

    def __str__(self):
        tag = " [trusted branch]" if self.trusted else ""
        if self.holds:
            return f"HoldsToDepth({self.depth}){tag}"
        return f"FailsAt({self.fails_at}){tag}: " + "; ".join(self.witness)


def _sweep(E, level_formula, assignment, N, trusted=False) -> PrefixVerdict:
    if N < 1:
        raise ValueError("N must be >= 1")
    verdict = PrefixVerdict(N, trusted=trusted)
    for n in range(1, N + 1):
        phi_n = level_formula(n)
        ok = evaluate(E, phi_n, assignment)
        if verdict.fails_at is None and not ok:
            verdict.fails_at = n
            verdict.witness = explain_failure(E, phi_n, assignment)
        elif verdict.fails_at is not None and ok:
            raise CoherenceViolation(f"level {n} holds after level {verdict.fails_at} failed")
    return verdict


def eval_ap_prefix(E, phi, assignment=None, N: int = 8) -> PrefixVerdict:
    """Check E |= phi_n for n = 1..N (a prefix semi-decision, never full approximate truth)."""
    from .approx import approximate
    return _sweep(E, lambda n: approximate(phi, n), assignment, N)


def eval_la_prefix(E, phi, branch, assignment=None, N: int = 8) -> PrefixVerdict:
    """Check E |= ([phi]_h)_n for n = 1..N along one branch h."""
    from .la import branch_approx, is_certified
    return _sweep(E, lambda n: branch_approx(phi, branch, n), assignment, N,
                  trusted=not is_certified(branch))
