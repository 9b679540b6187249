"""Formula and term ASTs for positive bounded logic and its infinitary extension.

Two layers:

* ``PB`` formulas: norm/relation inequality atoms, finite ``And``/``Or``,
  countable conjunctions stored as templates (``CountableAnd``), and
  norm-bounded ``Exists``/``Forall``.
* ``LA`` formulas: embedded PB formulas, finite and countable conjunction,
  negation and existential quantification over a whole variable family.

Countable conjunctions are never expanded in storage.  A template body refers
to its binder through value expressions (:class:`Ref`, :class:`Op`) that may
appear as atom thresholds, scalar coefficients, variable indices, quantifier
bounds and domain parameters.  :func:`instantiate` substitutes a binder and
folds whatever became constant.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import count
from typing import Any, Callable, Iterator

from .radical import RadicalValue, Shifted, add_real, scale_real


class SyntaxErrorPB(ValueError):
    """Malformed formula, unknown symbol or arity mismatch."""


class NotExact(ValueError):
    """A value that has no exact rational/radical representation."""


# ---------------------------------------------------------------------------
# values and value expressions


class Infinity:
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "INF"

    def __reduce__(self):
        return (Infinity, ())


INF = Infinity()


@dataclass(frozen=True)
class Ref:
    """Reference to a template binder."""
    name: str


OPS = {"add": 2, "sub": 2, "mul": 2, "div": 2, "neg": 1, "pow": 2, "abs": 1,
       "max": 2, "min": 2, "proj": 2, "pnorm": 2, "tuple": None}


@dataclass(frozen=True)
class Op:
    op: str
    args: tuple

    def __post_init__(self):
        want = OPS.get(self.op, -1)
        if want == -1:
            raise SyntaxErrorPB(f"unknown value operator {self.op!r}")
        if want is not None and len(self.args) != want:
            raise SyntaxErrorPB(f"{self.op} takes {want} arguments")


def is_literal(v) -> bool:
    if isinstance(v, bool):
        return False
    if isinstance(v, int | Fraction | Infinity):
        return True
    if isinstance(v, tuple):
        return all(is_literal(x) for x in v)
    return False


def _as_int(v) -> int:
    if isinstance(v, int) and not isinstance(v, bool):
        return v
    if isinstance(v, Fraction) and v.denominator == 1:
        return v.numerator
    raise SyntaxErrorPB(f"expected an integer, got {v!r}")


def _num(v):
    if isinstance(v, int | Fraction | RadicalValue | Shifted):
        return v
    raise SyntaxErrorPB(f"expected a number, got {v!r}")


def _rational(v) -> Fraction:
    if isinstance(v, int | Fraction) and not isinstance(v, bool):
        return Fraction(v)
    raise NotExact(f"expected a rational, got {v!r}")


def _lp_norm(p, vec) -> Any:
    vec = tuple(_rational(x) for x in vec)
    if p is INF:
        return max((abs(x) for x in vec), default=Fraction(0))
    k = _rational(p)
    if k.denominator != 1 or k < 1:
        raise NotExact(f"coefficient norm with non-integer exponent {k}")
    k = k.numerator
    s = sum((abs(x) ** k for x in vec), Fraction(0))
    r = RadicalValue(s, k)
    exact = r.rational()
    return exact if exact is not None else r


def apply_op(op: str, args: tuple):
    """Evaluate a value operator on concrete arguments."""
    if op == "tuple":
        return tuple(args)
    if op == "proj":
        t, i = args
        if not isinstance(t, tuple):
            raise SyntaxErrorPB(f"proj of a non-tuple {t!r}")
        i = _as_int(i)
        if not 1 <= i <= len(t):
            raise SyntaxErrorPB(f"proj index {i} out of range 1..{len(t)}")
        return t[i - 1]
    if op == "pnorm":
        return _lp_norm(args[0], args[1])
    if op in ("neg", "abs"):
        a = _rational(args[0])
        return -a if op == "neg" else abs(a)
    a, b = args
    if op in ("max", "min"):
        a, b = _rational(a), _rational(b)
        return max(a, b) if op == "max" else min(a, b)
    if op == "pow":
        return _rational(a) ** _as_int(b)
    a, b = _num(a), _num(b)
    fa, fb = isinstance(a, int | Fraction), isinstance(b, int | Fraction)
    if op == "add":
        if fa and fb:
            return Fraction(a) + Fraction(b)
        if fb:
            return add_real(a, b)
        if fa:
            return add_real(b, a)
    elif op == "sub":
        if fa and fb:
            return Fraction(a) - Fraction(b)
        if fb:
            return add_real(a, -Fraction(b))
    elif op == "mul":
        if fa and fb:
            return Fraction(a) * Fraction(b)
        if fb:
            return scale_real(a, b)
        if fa:
            return scale_real(b, a)
    elif op == "div":
        if fb:
            if b == 0:
                raise ZeroDivisionError("division by zero in value expression")
            return Fraction(a) / Fraction(b) if fa else scale_real(a, 1 / Fraction(b))
    raise NotExact(f"{op} on {a!r}, {b!r} leaves exact arithmetic")


def eval_value(e, env: dict | None = None):
    """Evaluate a value expression to a literal, RadicalValue or Shifted."""
    if isinstance(e, Ref):
        if env is None or e.name not in env:
            raise SyntaxErrorPB(f"unbound binder {e.name!r}")
        return env[e.name]
    if isinstance(e, Op):
        return apply_op(e.op, tuple(eval_value(a, env) for a in e.args))
    if isinstance(e, tuple):
        return tuple(eval_value(a, env) for a in e)
    return e


def subst_value(e, env: dict):
    """Substitute binders and fold every subexpression that becomes a literal."""
    if isinstance(e, Ref):
        return env.get(e.name, e)
    if isinstance(e, Op):
        args = tuple(subst_value(a, env) for a in e.args)
        if all(is_literal(a) for a in args):
            try:
                v = apply_op(e.op, args)
            except NotExact:
                v = None
            if v is not None and is_literal(v):
                return v
        return Op(e.op, args)
    if isinstance(e, tuple):
        return tuple(subst_value(a, env) for a in e)
    return e


def value_refs(e) -> set[str]:
    if isinstance(e, Ref):
        return {e.name}
    if isinstance(e, Op | tuple):
        items = e.args if isinstance(e, Op) else e
        out: set[str] = set()
        for a in items:
            out |= value_refs(a)
        return out
    return set()


def shift(e, q: Fraction):
    """``e + q`` with the rational parts folded."""
    q = Fraction(q)
    if isinstance(e, int | Fraction):
        return Fraction(e) + q
    if isinstance(e, Op) and e.op == "add" and isinstance(e.args[1], int | Fraction):
        total = Fraction(e.args[1]) + q
        return e.args[0] if total == 0 else Op("add", (e.args[0], total))
    return Op("add", (e, q))


# ---------------------------------------------------------------------------
# terms


@dataclass(frozen=True)
class Var:
    name: str
    index: Any = None   # int, None (bare name) or a value expression in templates

    @property
    def key(self) -> tuple:
        return (self.name, self.index)


@dataclass(frozen=True)
class Zero:
    pass


@dataclass(frozen=True)
class Sum:
    left: Any
    right: Any


@dataclass(frozen=True)
class Scale:
    coeff: Any
    arg: Any


@dataclass(frozen=True)
class Apply:
    symbol: str
    args: tuple = ()


@dataclass(frozen=True)
class SumRange:
    """Template term: ``sum_{binder=lo}^{hi} body``; expanded once lo, hi are known."""
    binder: str
    lo: Any
    hi: Any
    body: Any


def minus(a, b):
    return Sum(a, Scale(Fraction(-1), b))


def linear_combination(coeffs, terms):
    """``c1*t1 + c2*t2 + ...`` left-nested; Zero when empty."""
    out = None
    for c, t in zip(coeffs, terms):
        item = t if c == 1 else Scale(c, t)
        out = item if out is None else Sum(out, item)
    return Zero() if out is None else out


# ---------------------------------------------------------------------------
# relation terms


@dataclass(frozen=True)
class RelApp:
    symbol: str
    args: tuple


@dataclass(frozen=True)
class RelLin:
    """A rational linear combination of relation values, itself a relation."""
    items: tuple   # of (coefficient, RelApp)


# ---------------------------------------------------------------------------
# index domains


@dataclass(frozen=True)
class Naturals:
    pass


@dataclass(frozen=True)
class Rationals:
    pass


@dataclass(frozen=True)
class RationalsGE1Inf:
    pass


@dataclass(frozen=True)
class ConvexCoeffs:
    s: Any


@dataclass(frozen=True)
class IncreasingIntTuples:
    n: Any


@dataclass(frozen=True)
class RationalTuples:
    k: Any


@dataclass(frozen=True)
class ExplicitList:
    items: tuple


# ---------------------------------------------------------------------------
# PB formulas


@dataclass(frozen=True)
class NormLE:
    term: Any
    bound: Any


@dataclass(frozen=True)
class NormGE:
    term: Any
    bound: Any


@dataclass(frozen=True)
class RelLE:
    rel: Any
    bound: Any


@dataclass(frozen=True)
class RelGE:
    rel: Any
    bound: Any


ATOMS = (NormLE, NormGE, RelLE, RelGE)


@dataclass(frozen=True)
class And:
    parts: tuple = ()


@dataclass(frozen=True)
class Or:
    parts: tuple = ()


@dataclass(frozen=True)
class CountableAnd:
    binder: str
    domain: Any
    body: Any


@dataclass(frozen=True)
class Exists:
    var: Var
    bound: Any
    body: Any


@dataclass(frozen=True)
class Forall:
    var: Var
    bound: Any
    body: Any


@dataclass(frozen=True, eq=False)
class SeqAnd:
    """Countable conjunction given by a member function (1-based).

    Produced only by branch formulas of the infinitary layer, never parsed.
    """
    member: Callable[[int], Any]
    label: str = "seq"
    length: int | None = None   # finite conjunctions stop here


PB_TYPES = ATOMS + (And, Or, CountableAnd, Exists, Forall, SeqAnd)


# ---------------------------------------------------------------------------
# LA formulas


@dataclass(frozen=True)
class BoundSeq:
    """Eventually constant sequence r1, r2, ...: ``prefix`` then ``tail`` forever."""
    prefix: tuple = ()
    tail: Any = Fraction(1)

    def __getitem__(self, i: int):
        if i < 1:
            raise IndexError(i)
        return self.prefix[i - 1] if i <= len(self.prefix) else self.tail


@dataclass(frozen=True)
class Embed:
    pb: Any


@dataclass(frozen=True)
class AndN:
    parts: tuple = ()


@dataclass(frozen=True)
class AndW:
    binder: str
    domain: Any
    body: Any


@dataclass(frozen=True)
class Not:
    body: Any


@dataclass(frozen=True)
class ExistsSeq:
    family: str
    bounds: BoundSeq
    body: Any


LA_TYPES = (Embed, AndN, AndW, Not, ExistsSeq)


# canonical LA constructors: PB-only parts collapse into an embedded PB node


def la_and(parts) -> Any:
    parts = tuple(parts)
    if all(isinstance(p, Embed) for p in parts):
        return Embed(And(tuple(p.pb for p in parts)))
    return AndN(parts)


def la_andw(binder, domain, body) -> Any:
    if isinstance(body, Embed):
        return Embed(CountableAnd(binder, domain, body.pb))
    return AndW(binder, domain, body)


def la_not(body):
    return Not(body)


def la_imp(a, b):
    return Not(AndN((a, Not(b))))


def la_or(a, b):
    return Not(AndN((Not(a), Not(b))))


def la_orw(binder, domain, body):
    return Not(AndW(binder, domain, Not(body)))


def la_forall_seq(family, bounds, body):
    return Not(ExistsSeq(family, bounds, Not(body)))


def as_la(phi):
    return Embed(phi) if isinstance(phi, PB_TYPES) else phi


# ---------------------------------------------------------------------------
# enumerations


def calkin_wilf() -> Iterator[Fraction]:
    q = Fraction(1)
    while True:
        yield q
        q = 1 / (2 * (q.numerator // q.denominator) - q + 1)


def rationals() -> Iterator[Fraction]:
    """0, then each Calkin-Wilf positive followed by its negative."""
    yield Fraction(0)
    for q in calkin_wilf():
        yield q
        yield -q


class _Cached:
    """Random access into an infinite generator."""

    def __init__(self, gen):
        self._gen = gen
        self._items: list = []

    def __getitem__(self, i: int):
        while len(self._items) <= i:
            self._items.append(next(self._gen))
        return self._items[i]


_Q = _Cached(rationals())


def _compositions(total: int, parts: int, minimum: int) -> Iterator[tuple]:
    """Tuples of ``parts`` integers >= minimum summing to total, first entry descending."""
    if parts == 1:
        if total >= minimum:
            yield (total,)
        return
    for first in range(total - minimum * (parts - 1), minimum - 1, -1):
        for rest in _compositions(total - first, parts - 1, minimum):
            yield (first,) + rest


def index_tuples(k: int, minimum: int) -> Iterator[tuple]:
    """All k-tuples of integers >= minimum, graded by sum (prefix-stable)."""
    for total in count(k * minimum):
        yield from _compositions(total, k, minimum)


def rational_tuples(k: int) -> Iterator[tuple]:
    for idx in index_tuples(k, 1):
        yield tuple(_Q[i - 1] for i in idx)


def _convex_parts(total: int, parts: int, budget: Fraction) -> Iterator[tuple]:
    """Index compositions (as in ``_compositions``) of nonnegative rationals summing to budget."""
    if parts == 1:
        if total >= 1 and _Q[total - 1] == budget:
            yield (_Q[total - 1],)
        return
    for first in range(total - (parts - 1), 0, -1):
        q = _Q[first - 1]
        if q < 0 or q > budget:
            continue
        for rest in _convex_parts(total - first, parts - 1, budget - q):
            yield (q,) + rest


def _convex_coeffs(s: int) -> Iterator[tuple]:
    if s == 1:
        yield (Fraction(1),)
        return
    for total in count(s):
        yield from _convex_parts(total, s, Fraction(1))


_CO: dict = {}


def convex_coeffs(s: int) -> Iterator[tuple]:
    """Nonnegative rational s-tuples summing to 1, in the order of ``rational_tuples(s)``."""
    if s not in _CO:
        _CO[s] = _Cached(_convex_coeffs(s))
    cache = _CO[s]
    for i in count():
        try:
            yield cache[i]
        except StopIteration:
            return


def domain_size(domain) -> int | None:
    """Number of index values of a finite domain, None for an infinite one."""
    if isinstance(domain, ExplicitList):
        return len(domain.items)
    if isinstance(domain, ConvexCoeffs) and not value_refs(domain.s) and _param(domain.s, "CO") == 1:
        return 1
    return None


def increasing_int_tuples(n: int) -> Iterator[tuple]:
    for t in index_tuples(n + 1, 0):
        if all(a < b for a, b in zip(t, t[1:])):
            yield t


def qsharp() -> Iterator:
    yield INF
    for q in rationals():
        if q >= 1:
            yield q


def _param(v, what: str) -> int:
    if value_refs(v):
        raise SyntaxErrorPB(f"domain parameter {what} still mentions a binder")
    n = _as_int(eval_value(v))
    if n < 1:
        raise SyntaxErrorPB(f"domain parameter {what} must be positive, got {n}")
    return n


def iter_domain(domain) -> Iterator:
    if isinstance(domain, Naturals):
        return count(1)
    if isinstance(domain, Rationals):
        return rationals()
    if isinstance(domain, RationalsGE1Inf):
        return qsharp()
    if isinstance(domain, ConvexCoeffs):
        return convex_coeffs(_param(domain.s, "CO"))
    if isinstance(domain, IncreasingIntTuples):
        return increasing_int_tuples(_param(domain.n, "V"))
    if isinstance(domain, RationalTuples):
        return rational_tuples(_param(domain.k, "Qtuple"))
    if isinstance(domain, ExplicitList):
        return iter(domain.items)
    raise TypeError(f"not an index domain: {domain!r}")


def take(domain, m: int) -> list:
    """Up to m leading elements (fewer only for a short explicit list)."""
    it = iter_domain(domain)
    out = []
    for _ in range(m):
        try:
            out.append(next(it))
        except StopIteration:
            break
    return out


def enumerate_domain(domain, m: int) -> list:
    """The first m index values of the domain's canonical enumeration."""
    if m < 1:
        raise ValueError("m must be >= 1")
    out = take(domain, m)
    if len(out) < m:
        raise IndexError(f"explicit list has only {len(out)} items, {m} requested")
    return out


# ---------------------------------------------------------------------------
# substitution


def _subst_domain(d, env):
    if isinstance(d, ConvexCoeffs):
        return ConvexCoeffs(subst_value(d.s, env))
    if isinstance(d, IncreasingIntTuples):
        return IncreasingIntTuples(subst_value(d.n, env))
    if isinstance(d, RationalTuples):
        return RationalTuples(subst_value(d.k, env))
    if isinstance(d, ExplicitList):
        return ExplicitList(tuple(subst_value(x, env) for x in d.items))
    return d


def _without(env, name):
    if name in env:
        env = dict(env)
        del env[name]
    return env


def subst_term(t, env):
    if isinstance(t, Var):
        if t.index is None or isinstance(t.index, int):
            return t
        idx = subst_value(t.index, env)
        if is_literal(idx):
            idx = _as_int(idx)
            if idx < 1:
                raise SyntaxErrorPB(f"variable index {idx} must be positive")
        return Var(t.name, idx)
    if isinstance(t, Zero):
        return t
    if isinstance(t, Sum):
        return Sum(subst_term(t.left, env), subst_term(t.right, env))
    if isinstance(t, Scale):
        return Scale(subst_value(t.coeff, env), subst_term(t.arg, env))
    if isinstance(t, Apply):
        return Apply(t.symbol, tuple(subst_term(a, env) for a in t.args))
    if isinstance(t, SumRange):
        lo, hi = subst_value(t.lo, env), subst_value(t.hi, env)
        inner = _without(env, t.binder)
        if is_literal(lo) and is_literal(hi):
            lo, hi = _as_int(lo), _as_int(hi)
            items = [subst_term(t.body, {**inner, t.binder: i}) for i in range(lo, hi + 1)]
            out = None
            for item in items:
                out = item if out is None else Sum(out, item)
            return Zero() if out is None else out
        return SumRange(t.binder, lo, hi, subst_term(t.body, inner))
    raise TypeError(f"not a term: {t!r}")


def subst_rel(r, env):
    if isinstance(r, RelApp):
        return RelApp(r.symbol, tuple(subst_term(a, env) for a in r.args))
    if isinstance(r, RelLin):
        return RelLin(tuple((subst_value(c, env), subst_rel(a, env)) for c, a in r.items))
    raise TypeError(f"not a relation term: {r!r}")


def subst(phi, env: dict):
    """Substitute binder values throughout a PB or LA formula."""
    if not env:
        return phi
    if isinstance(phi, NormLE | NormGE):
        return type(phi)(subst_term(phi.term, env), subst_value(phi.bound, env))
    if isinstance(phi, RelLE | RelGE):
        return type(phi)(subst_rel(phi.rel, env), subst_value(phi.bound, env))
    if isinstance(phi, And | Or | AndN):
        return type(phi)(tuple(subst(p, env) for p in phi.parts))
    if isinstance(phi, CountableAnd | AndW):
        return type(phi)(phi.binder, _subst_domain(phi.domain, env),
                         subst(phi.body, _without(env, phi.binder)))
    if isinstance(phi, Exists | Forall):
        return type(phi)(subst_term(phi.var, env), subst_value(phi.bound, env),
                         subst(phi.body, env))
    if isinstance(phi, Embed):
        return Embed(subst(phi.pb, env))
    if isinstance(phi, Not):
        return Not(subst(phi.body, env))
    if isinstance(phi, ExistsSeq):
        b = BoundSeq(tuple(subst_value(x, env) for x in phi.bounds.prefix),
                     subst_value(phi.bounds.tail, env))
        return ExistsSeq(phi.family, b, subst(phi.body, env))
    if isinstance(phi, SeqAnd):
        return phi
    raise TypeError(f"not a formula: {phi!r}")


def instantiate(template, binder: str, value):
    """The instance of a template body at one index value."""
    return subst(template, {binder: value})


def instances(phi, m: int) -> list:
    """First m instances of a CountableAnd/AndW/SeqAnd (fewer for short lists)."""
    if isinstance(phi, SeqAnd):
        stop = m if phi.length is None else min(m, phi.length)
        return [phi.member(i) for i in range(1, stop + 1)]
    return [instantiate(phi.body, phi.binder, v) for v in take(phi.domain, m)]


def truncate(phi, m: int):
    """Replace every countable conjunction by its first m instances; no relaxation."""
    if isinstance(phi, ATOMS):
        return phi
    if isinstance(phi, And | Or):
        return type(phi)(tuple(truncate(p, m) for p in phi.parts))
    if isinstance(phi, CountableAnd | SeqAnd):
        return And(tuple(truncate(p, m) for p in instances(phi, m)))
    if isinstance(phi, Exists | Forall):
        return type(phi)(phi.var, phi.bound, truncate(phi.body, m))
    raise TypeError(f"truncate expects a PB formula, got {type(phi).__name__}")


# ---------------------------------------------------------------------------
# traversal


def is_finitary(phi) -> bool:
    if isinstance(phi, ATOMS):
        return True
    if isinstance(phi, CountableAnd | SeqAnd):
        return False
    if isinstance(phi, And | Or):
        return all(is_finitary(p) for p in phi.parts)
    if isinstance(phi, Exists | Forall):
        return is_finitary(phi.body)
    if isinstance(phi, Embed):
        return is_finitary(phi.pb)
    if isinstance(phi, AndN):
        return all(is_finitary(p) for p in phi.parts)
    if isinstance(phi, AndW):
        return False
    if isinstance(phi, Not | ExistsSeq):
        return is_finitary(phi.body)
    raise TypeError(f"not a formula: {phi!r}")


def simplify(phi):
    """An equivalent finitary formula with nested and/or merged, one-part
    connectives unwrapped and repeated parts dropped (shared subtrees are built once)."""
    memo: dict = {}
    table: dict = {}

    def canon(key, make):
        if key not in table:
            table[key] = make()
        return table[key]

    def go(f):
        got = memo.get(id(f))
        if got is not None:
            return got[1]
        if isinstance(f, ATOMS):
            out = canon(f, lambda: f)
        elif isinstance(f, And | Or):
            kind = type(f)
            parts, seen = [], set()
            stack = [go(p) for p in f.parts]
            for q in stack:
                subs = q.parts if isinstance(q, kind) else (q,)
                for r in subs:
                    if id(r) not in seen:
                        seen.add(id(r))
                        parts.append(r)
            if len(parts) == 1:
                out = parts[0]
            else:
                out = canon((kind, tuple(id(r) for r in parts)), lambda: kind(tuple(parts)))
        elif isinstance(f, Exists | Forall):
            body = go(f.body)
            out = canon((type(f), f.var, f.bound, id(body)), lambda: type(f)(f.var, f.bound, body))
        else:
            out = f
        memo[id(f)] = (f, out)     # keep f alive so its id is not reused
        return out

    return go(phi)


def contains_not(phi) -> bool:
    """True iff an LA formula has a negation outside its embedded PB parts."""
    if isinstance(phi, Embed):
        return False
    if isinstance(phi, Not):
        return True
    if isinstance(phi, AndN):
        return any(contains_not(p) for p in phi.parts)
    if isinstance(phi, AndW | ExistsSeq):
        return contains_not(phi.body)
    raise TypeError(f"not an LA formula: {phi!r}")


@dataclass
class FreeVars:
    vars: set = field(default_factory=set)        # concrete (family, index) pairs
    open_families: set = field(default_factory=set)  # families with symbolic indices

    def max_index(self, family: str) -> int:
        return max((i for n, i in self.vars if n == family and isinstance(i, int)), default=0)

    def max_indices(self) -> dict:
        out: dict = {}
        for n, i in self.vars:
            if isinstance(i, int):
                out[n] = max(out.get(n, 0), i)
        return out

    def __bool__(self):
        return bool(self.vars or self.open_families)


def _term_vars(t, out: FreeVars, bound_vars, bound_fams):
    if isinstance(t, Var):
        if t.name in bound_fams or t.key in bound_vars:
            return
        if t.index is None or isinstance(t.index, int):
            out.vars.add(t.key)
        else:
            out.open_families.add(t.name)
    elif isinstance(t, Sum):
        _term_vars(t.left, out, bound_vars, bound_fams)
        _term_vars(t.right, out, bound_vars, bound_fams)
    elif isinstance(t, Scale):
        _term_vars(t.arg, out, bound_vars, bound_fams)
    elif isinstance(t, Apply):
        for a in t.args:
            _term_vars(a, out, bound_vars, bound_fams)
    elif isinstance(t, SumRange):
        _term_vars(t.body, out, bound_vars, bound_fams)
    elif isinstance(t, RelApp):
        for a in t.args:
            _term_vars(a, out, bound_vars, bound_fams)
    elif isinstance(t, RelLin):
        for _, a in t.items:
            _term_vars(a, out, bound_vars, bound_fams)


def _free(phi, out, bound_vars: frozenset, bound_fams: frozenset):
    if isinstance(phi, NormLE | NormGE):
        _term_vars(phi.term, out, bound_vars, bound_fams)
    elif isinstance(phi, RelLE | RelGE):
        _term_vars(phi.rel, out, bound_vars, bound_fams)
    elif isinstance(phi, And | Or | AndN):
        for p in phi.parts:
            _free(p, out, bound_vars, bound_fams)
    elif isinstance(phi, CountableAnd | AndW | Not):
        _free(phi.body, out, bound_vars, bound_fams)
    elif isinstance(phi, Exists | Forall):
        _free(phi.body, out, bound_vars | {phi.var.key}, bound_fams)
    elif isinstance(phi, Embed):
        _free(phi.pb, out, bound_vars, bound_fams)
    elif isinstance(phi, ExistsSeq):
        _free(phi.body, out, bound_vars, bound_fams | {phi.family})
    elif isinstance(phi, SeqAnd):
        raise TypeError("free variables of a lazy conjunction are not computable")
    else:
        raise TypeError(f"not a formula: {phi!r}")


def free_vars(phi) -> FreeVars:
    """Variables not captured by any quantifier, plus the maximal index per family."""
    out = FreeVars()
    _free(phi, out, frozenset(), frozenset())
    return out


def max_family_index(phi, family: str) -> int:
    return free_vars(phi).max_index(family)


def symbols(phi) -> tuple[set, set]:
    """(function symbols with arities, relation symbols with arities) used by phi."""
    fns: set = set()
    rels: set = set()

    def term(t):
        if isinstance(t, Sum):
            term(t.left)
            term(t.right)
        elif isinstance(t, Scale):
            term(t.arg)
        elif isinstance(t, Apply):
            fns.add((t.symbol, len(t.args)))
            for a in t.args:
                term(a)
        elif isinstance(t, SumRange):
            term(t.body)

    def rel(r):
        if isinstance(r, RelApp):
            rels.add((r.symbol, len(r.args)))
            for a in r.args:
                term(a)
        else:
            for _, a in r.items:
                rel(a)

    def walk(f):
        if isinstance(f, NormLE | NormGE):
            term(f.term)
        elif isinstance(f, RelLE | RelGE):
            rel(f.rel)
        elif isinstance(f, And | Or | AndN):
            for p in f.parts:
                walk(p)
        elif isinstance(f, CountableAnd | AndW | Not | ExistsSeq):
            walk(f.body)
        elif isinstance(f, Exists | Forall):
            walk(f.body)
        elif isinstance(f, Embed):
            walk(f.pb)

    walk(phi)
    return fns, rels


def __getattr__(name):
    # parse/print live in grammar.py; re-exported here for convenience
    if name in ("parse_formula", "parse_pb", "print_formula", "parse_term"):
        from . import grammar
        return getattr(grammar, name)
    raise AttributeError(name)
