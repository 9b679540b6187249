"""Branch trees of infinitary formulas and their finitary approximations.

A branch ``h`` picks one path through the approximation tree of an
infinitary formula.  ``branch_formula(phi, h)`` is the positive bounded
formula ``[phi]_h`` (usually with lazy countable conjunctions) and
``branch_approx(phi, h, n)`` is its n-approximation, which is finitary.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from math import isqrt
from typing import Any, Callable

from .approx import approximate, weak_negation
from .syntax import (
    AndN, AndW, Embed, Exists, ExistsSeq, Not, SeqAnd, SyntaxErrorPB, Var,
    contains_not, domain_size, free_vars, instantiate, take,
)


class ShapeError(ValueError):
    """A branch does not match the formula it is paired with."""


# ---------------------------------------------------------------------------
# certificates and branches


@dataclass(frozen=True)
class ConstantOnSingleton:
    level: int


@dataclass(frozen=True)
class DiagonalEnumeration:
    enumerator: str = "enum"
    items: tuple | None = None      # the whole enumeration when it is a finite list


@dataclass(frozen=True)
class Trusted:
    note: str = ""


@dataclass(frozen=True)
class EmptyBranch:
    pass


EMPTY = EmptyBranch()


@dataclass(frozen=True, eq=False)
class TupleBranch:
    """Componentwise branch: explicit parts, then ``rule(i)`` or ``default``."""
    parts: tuple = ()
    default: Any = None
    rule: Callable[[int], Any] | None = None

    def component(self, i: int):
        if i <= len(self.parts):
            return self.parts[i - 1]
        if self.rule is not None:
            return self.rule(i)
        if self.default is not None:
            return self.default
        raise ShapeError(f"tuple branch has no component {i}")

    def __eq__(self, other):
        return isinstance(other, TupleBranch) and self.rule is None and other.rule is None \
            and (self.parts, self.default) == (other.parts, other.default)

    def __hash__(self):
        return hash((self.parts, self.default))


@dataclass(frozen=True, eq=False)
class NegBranch:
    """f = (f1, f2): at step s use branch f1(s) of the body at negation level f2(s)."""
    f1: Callable[[int], Any]
    f2: Callable[[int], int]
    certificate: Any = field(default_factory=Trusted)

    def step(self, s: int) -> tuple:
        level = self.f2(s)
        if not isinstance(level, int) or level < 1:
            raise ShapeError(f"negation level f2({s}) = {level!r} is not a positive integer")
        return self.f1(s), level


@dataclass(frozen=True)
class ExBranch:
    inner: Any


def _const(v):
    return lambda s: v


def is_certified(h, probe: int = 8) -> bool:
    """False when a Trusted negation branch occurs (probing the first steps of rules)."""
    if isinstance(h, EmptyBranch):
        return True
    if isinstance(h, ExBranch):
        return is_certified(h.inner, probe)
    if isinstance(h, TupleBranch):
        comps = list(h.parts)
        if h.default is not None:
            comps.append(h.default)
        if h.rule is not None:
            comps += [h.rule(i) for i in range(len(h.parts) + 1, len(h.parts) + probe + 1)]
        return all(is_certified(c, probe) for c in comps)
    if isinstance(h, NegBranch):
        if isinstance(h.certificate, Trusted):
            return False
        if isinstance(h.certificate, ConstantOnSingleton):
            return True
        if isinstance(h.certificate, DiagonalEnumeration) and h.certificate.items is not None:
            return all(is_certified(b, probe) for b in h.certificate.items)
        return all(is_certified(h.f1(s), probe) for s in range(1, probe + 1))
    raise ShapeError(f"not a branch: {h!r}")


def fmt_branch(h, probe: int = 4) -> str:
    if isinstance(h, EmptyBranch):
        return "empty"
    if isinstance(h, ExBranch):
        return f"(ex {fmt_branch(h.inner, probe)})"
    if isinstance(h, TupleBranch):
        items = [fmt_branch(p, probe) for p in h.parts]
        if h.default is not None:
            items.append(f"(default {fmt_branch(h.default, probe)})")
        if h.rule is not None:
            items.append("(rule ...)")
        return "(tuple" + "".join(" " + x for x in items) + ")"
    if isinstance(h, NegBranch):
        c = h.certificate
        if isinstance(c, ConstantOnSingleton):
            return f"(neg-const {c.level})"
        if isinstance(c, DiagonalEnumeration) and c.items is not None:
            start = h.f2(1)
            head = "(neg-diag" if start == 1 else f"(neg-diag-from {start}"
            return head + "".join(" " + fmt_branch(b, probe) for b in c.items) + ")"
        steps = " ".join(f"({fmt_branch(b, probe)} {lv})" for b, lv in
                         (h.step(s) for s in range(1, probe + 1)))
        tag = "neg-diag" if isinstance(c, DiagonalEnumeration) else "neg-trusted"
        return f"({tag} {steps} ...)"
    raise ShapeError(f"not a branch: {h!r}")


def parse_branch(text: str):
    """Read a branch written as ``fmt_branch`` prints it (certified forms only).

        empty | (ex B) | (tuple B ... [(default B)]) | (neg-const L)
        | (neg-diag B ...) | (neg-diag-from L B ...)
    """
    from .grammar import Atom, SList, _err, _read_one

    def go(node):
        if isinstance(node, Atom):
            if node.text == "empty":
                return EMPTY
            raise _err(node, f"unknown branch {node.text!r}")
        if not node.items or not isinstance(node.items[0], Atom):
            raise _err(node, "expected a branch form")
        head, args = node.items[0].text, node.items[1:]
        if head == "ex":
            if len(args) != 1:
                raise _err(node, "ex takes one branch")
            return ExBranch(go(args[0]))
        if head == "tuple":
            parts, default = [], None
            for a in args:
                if isinstance(a, SList) and a.items and isinstance(a.items[0], Atom) \
                        and a.items[0].text == "default":
                    if len(a.items) != 2:
                        raise _err(a, "default takes one branch")
                    default = go(a.items[1])
                else:
                    parts.append(go(a))
            return TupleBranch(tuple(parts), default)
        if head == "neg-const":
            if len(args) != 1 or not isinstance(args[0], Atom) or not args[0].text.isdigit() \
                    or int(args[0].text) < 1:
                raise _err(node, "neg-const takes a positive level")
            level = int(args[0].text)
            return NegBranch(_const(None), _const(level), ConstantOnSingleton(level))
        if head in ("neg-diag", "neg-diag-from"):
            start = 1
            if head == "neg-diag-from":
                if not args or not isinstance(args[0], Atom) or not args[0].text.isdigit():
                    raise _err(node, "neg-diag-from takes a start level first")
                start, args = int(args[0].text), args[1:]
            if not args:
                raise _err(node, "neg-diag needs at least one branch")
            return diagonal_neg_branch(None, [go(a) for a in args], start)
        raise _err(node, f"unknown branch form {head!r}")

    return go(_read_one(text))


# ---------------------------------------------------------------------------
# certified constructors


def constant_neg_branch(phi, n: int) -> NegBranch:
    """The constant negation branch at level n+1 for a formula with a one-point branch set.

    ``phi`` may be the negated formula itself or a PB formula / Embed node.
    """
    if not isinstance(n, int) or n < 1:
        raise ValueError("n must be a positive integer")
    body = as_la_body(phi.body if isinstance(phi, Not) else phi)
    if contains_not(body):
        raise ShapeError("constant negation branch needs a body with a one-point branch set")
    return NegBranch(_const(trivial_branch(body)), _const(n + 1), ConstantOnSingleton(n + 1))


def _is_pb(phi) -> bool:
    from .syntax import PB_TYPES
    return isinstance(phi, PB_TYPES)


def trivial_branch(phi):
    """The unique branch of a formula without negations outside embedded PB parts."""
    if _is_pb(phi) or isinstance(phi, Embed):
        return EMPTY
    if isinstance(phi, AndN):
        return TupleBranch(tuple(trivial_branch(p) for p in phi.parts))
    if isinstance(phi, AndW):
        return TupleBranch(default=trivial_branch(phi.body))
    if isinstance(phi, ExistsSeq):
        return ExBranch(trivial_branch(phi.body))
    if isinstance(phi, Not):
        raise ShapeError("negation has no trivial branch")
    raise ShapeError(f"not an infinitary formula: {phi!r}")


def cantor_pair(s: int) -> tuple[int, int]:
    """s-th pair (1-based) in the order (1,1),(2,1),(1,2),(3,1),(2,2),(1,3),..."""
    if s < 1:
        raise ValueError("s must be >= 1")
    d = (isqrt(8 * s) + 1) // 2
    while d * (d - 1) // 2 >= s:
        d -= 1
    while d * (d + 1) // 2 < s:
        d += 1
    t = s - d * (d - 1) // 2
    return d - t + 1, t


def diagonal_neg_branch(phi, enum, start: int = 1) -> NegBranch:
    """A negation branch meeting every (branch, level) pair with level >= start.

    ``enum`` is either a finite sequence listing the whole branch set of the
    body (then levels are swept round-robin) or a total callable i -> branch
    (then pairs are visited in Cantor order).
    """
    if not isinstance(start, int) or start < 1:
        raise ValueError("start level must be a positive integer")
    if isinstance(enum, list | tuple):
        items = tuple(enum)
        if not items:
            raise ShapeError("empty branch enumeration")
        k = len(items)
        f1 = lambda s: items[(s - 1) % k]
        f2 = lambda s: (s - 1) // k + start
        return NegBranch(f1, f2, DiagonalEnumeration(f"list[{k}]", items))
    f1 = lambda s: enum(cantor_pair(s)[0])
    f2 = lambda s: cantor_pair(s)[1] + start - 1
    return NegBranch(f1, f2, DiagonalEnumeration(getattr(enum, "__name__", "enum")))


def trusted_neg_branch(f1, f2, note: str = "") -> NegBranch:
    return NegBranch(f1, f2, Trusted(note))


def default_branch(phi, levels=None, _depth: int = 0):
    """A certified branch for any formula.

    ``levels(d)`` is the first negation level used by a negation nested under
    d others (default 1).  Negations of negation-free bodies are constant at
    that level; deeper ones sweep all levels from it over the default branch
    of their body, a one-element enumeration (the caller's contract when the
    body has more branches).
    """
    if _is_pb(phi) or isinstance(phi, Embed):
        return EMPTY
    if isinstance(phi, AndN):
        return TupleBranch(tuple(default_branch(p, levels, _depth) for p in phi.parts))
    if isinstance(phi, AndW):
        return TupleBranch(default=default_branch(phi.body, levels, _depth))
    if isinstance(phi, ExistsSeq):
        return ExBranch(default_branch(phi.body, levels, _depth))
    if isinstance(phi, Not):
        start = 1 if levels is None else levels(_depth)
        if not isinstance(start, int) or start < 1:
            raise ValueError(f"negation level must be a positive integer, got {start!r}")
        body = as_la_body(phi.body)
        if not contains_not(body):
            return NegBranch(_const(trivial_branch(body)), _const(start), ConstantOnSingleton(start))
        return diagonal_neg_branch(body, [default_branch(body, levels, _depth + 1)], start)
    raise ShapeError(f"not an infinitary formula: {phi!r}")


# ---------------------------------------------------------------------------
# branch formulas


def _n_level(n):
    if not isinstance(n, int) or n < 1:
        raise ValueError(f"approximation level must be a positive integer, got {n!r}")


def branch_formula(phi, h):
    """[phi]_h as a positive bounded formula (countable parts stay lazy)."""
    if _is_pb(phi):
        phi = Embed(phi)
    if isinstance(phi, Embed):
        if not isinstance(h, EmptyBranch):
            raise ShapeError(f"embedded formula needs the empty branch, got {fmt_branch(h)}")
        return phi.pb
    if isinstance(phi, AndN):
        if not isinstance(h, TupleBranch):
            raise ShapeError("finite conjunction needs a tuple branch")
        parts = phi.parts
        return SeqAnd(lambda i: branch_formula(parts[i - 1], h.component(i)),
                      "and", length=len(parts))
    if isinstance(phi, AndW):
        if not isinstance(h, TupleBranch):
            raise ShapeError("countable conjunction needs a tuple branch")
        binder, domain, body = phi.binder, phi.domain, phi.body
        cache: list = []

        def member(i):
            if len(cache) < i:
                cache[:] = take(domain, i)
                if len(cache) < i:
                    raise ShapeError("explicit index list exhausted")
            return branch_formula(instantiate(body, binder, cache[i - 1]), h.component(i))

        length = domain_size(domain)
        return SeqAnd(member, "andw", length=length)
    if isinstance(phi, Not):
        if not isinstance(h, NegBranch):
            raise ShapeError("negation needs a negation branch")
        if isinstance(h.certificate, ConstantOnSingleton) and contains_not(as_la_body(phi.body)):
            raise ShapeError("constant branch paired with a body that has negations")
        body = phi.body
        if isinstance(h.certificate, ConstantOnSingleton):
            # the body has exactly one branch, whatever f1 was written as
            only = trivial_branch(as_la_body(body))
            member = weak_negation(branch_formula(body, only), h.certificate.level)
            return SeqAnd(lambda s: member, "neg")

        def neg_member(s):
            b, level = h.step(s)
            return weak_negation(branch_formula(body, b), level)

        return SeqAnd(neg_member, "neg")
    if isinstance(phi, ExistsSeq):
        if not isinstance(h, ExBranch):
            raise ShapeError("sequence quantifier needs an existential branch")
        return SeqAnd(lambda k: existential_member(phi, h.inner, k), "ex")
    raise ShapeError(f"not an infinitary formula: {phi!r}")


def as_la_body(phi):
    return Embed(phi) if _is_pb(phi) else phi


def ind(phi: ExistsSeq, inner, k: int) -> int:
    """Largest index of the quantified family free in ([body]_inner)_k."""
    return free_vars(approximate(branch_formula(phi.body, inner), k)).max_index(phi.family)


def existential_member(phi: ExistsSeq, inner, k: int):
    """k-th member: exists y_1..y_Ind(k) (||y_i|| <= r_i and ([body]_inner)_k)."""
    core = approximate(branch_formula(phi.body, inner), k)
    top = free_vars(core).max_index(phi.family)
    out = core
    for i in range(top, 0, -1):
        r = phi.bounds[i]
        out = Exists(Var(phi.family, i), r, out)
    return out


def branch_approx(phi, h, n: int):
    """([phi]_h)_n, a finitary positive bounded formula."""
    _n_level(n)
    return approximate(branch_formula(phi, h), n)


# ---------------------------------------------------------------------------
# almost versions


@dataclass
class AlmostSchema:
    hypothesis: Any
    obstruction: Any
    conclusion: Any
    trace: list
    certified: bool = True
    n: int = 0
    m: int = 0

    def render(self) -> str:
        from .grammar import print_formula
        lines = [f"hypothesis (level {self.m}): {print_formula(self.hypothesis)}",
                 f"obstruction (level {self.m}): {print_formula(self.obstruction)}",
                 f"conclusion (level {self.n}): {print_formula(self.conclusion)}",
                 "trace:"]
        lines += [f"  {i}. {step}" for i, step in enumerate(self.trace, 1)]
        if not self.certified:
            lines.append("WARNING: trusted branch")
        return "\n".join(lines)


def _closed(phi, what):
    fv = free_vars(phi)
    if fv:
        names = sorted(f"{a}{b or ''}" for a, b in fv.vars) + sorted(fv.open_families)
        raise SyntaxErrorPB(f"{what} must be a sentence; free: {', '.join(names)}")


def decode_almost(sigma, theta, n: int, m: int) -> AlmostSchema:
    """Decode sigma => theta into the finitary pair (sigma_m, theta_n) with its justification."""
    from .grammar import print_formula
    _n_level(n)
    _n_level(m)
    sigma = sigma.pb if isinstance(sigma, Embed) else sigma
    theta = theta.pb if isinstance(theta, Embed) else theta
    _closed(sigma, "hypothesis")
    _closed(theta, "conclusion")
    h = constant_neg_branch(Embed(theta), n)
    hyp = approximate(sigma, m)
    obstruction = branch_approx(Not(Embed(theta)), h, m)
    core = approximate(weak_negation(theta, n + 1), m)
    concl = approximate(theta, n)
    trace = [
        f"branch of the negated conclusion: constant function with level {n + 1}",
        f"hypothesis = sigma_{m} = {print_formula(hyp)}",
        f"obstruction = conjunction over s <= {m} of (neg(theta, {n + 1}))_{m}",
        f"  each conjunct = {print_formula(core)}",
        f"uniform index m = {m} claims: no model satisfies hypothesis and obstruction",
        f"so a model of the hypothesis falsifies (neg(theta, {n + 1}))_{m}",
        f"psi implies psi_{m}, hence the model falsifies neg(theta, {n + 1})",
        f"failure of theta_{n} would force neg(theta, {n + 1}); so theta_{n} holds",
        f"conclusion = theta_{n} = {print_formula(concl)}",
    ]
    return AlmostSchema(hyp, obstruction, concl, trace, True, n, m)


# ---------------------------------------------------------------------------
# empirical uniform index


@dataclass
class UniformSearch:
    n: int
    m_max: int
    m: int | None
    log: list = field(default_factory=list)        # (m, structure name, witness lines)
    checked: int = 0

    @property
    def found(self) -> bool:
        return self.m is not None

    def render(self) -> str:
        head = (f"least m = {self.m}" if self.found else f"exhausted: no m <= {self.m_max} works")
        lines = [f"uniform index search at n = {self.n} over {self.checked} structures: {head}"]
        for m, name, wit in self.log:
            lines.append(f"  m = {m}: counterexample {name}: " + "; ".join(wit))
        return "\n".join(lines)


def search_uniform_index(sigma, theta, n: int, family, m_max: int) -> UniformSearch:
    """Least m <= m_max such that no structure in family has sigma_m true and theta_n false.

    Since sigma_(m+1) implies sigma_m, a structure that blocks m blocks every
    smaller index too; each structure is swept upward until sigma_m fails.
    """
    from .evaluator import evaluate, explain_failure
    _n_level(n)
    _n_level(m_max)
    family = list(family)
    if not family:
        raise ValueError("empty structure family")
    sigma = sigma.pb if isinstance(sigma, Embed) else sigma
    theta = theta.pb if isinstance(theta, Embed) else theta
    concl = approximate(theta, n)
    hyps: dict = {}

    def hyp(m):
        if m not in hyps:
            hyps[m] = approximate(sigma, m)
        return hyps[m]

    blocked = 0                  # every m <= blocked has a counterexample
    blockers: dict = {}          # structure index -> last m at which it blocks
    witnesses: dict = {}
    for idx, E in enumerate(family):
        if evaluate(E, concl):
            continue
        last = 0
        for m in range(1, m_max + 1):
            if evaluate(E, hyp(m)):
                last = m
            else:
                break
        if last:
            blockers[idx] = last
            witnesses[idx] = explain_failure(E, concl)
            blocked = max(blocked, last)
    log = []
    for m in range(1, blocked + 1):
        idx = min(i for i, last in blockers.items() if last >= m)
        log.append((m, family[idx].name or f"#{idx}", witnesses[idx]))
    m = blocked + 1 if blocked < m_max else None
    return UniformSearch(n, m_max, m, log, len(family))


def verify_uniform_index(sigma, theta, n: int, m: int, family) -> list:
    """Structures (with witnesses) where sigma_m holds but theta_n fails; [] certifies m."""
    from .evaluator import evaluate, explain_failure
    sigma = sigma.pb if isinstance(sigma, Embed) else sigma
    theta = theta.pb if isinstance(theta, Embed) else theta
    hyp, concl = approximate(sigma, m), approximate(theta, n)
    bad = []
    for idx, E in enumerate(family):
        if evaluate(E, hyp) and not evaluate(E, concl):
            bad.append((E.name or f"#{idx}", explain_failure(E, concl)))
    return bad


def truncate_la(phi, m: int):
    """Replace every countable conjunction by its first m instances, without relaxing bounds."""
    from .syntax import PB_TYPES, la_and, truncate
    if isinstance(phi, PB_TYPES):
        return truncate(phi, m)
    if isinstance(phi, Embed):
        return Embed(truncate(phi.pb, m))
    if isinstance(phi, AndN):
        return la_and(truncate_la(p, m) for p in phi.parts)
    if isinstance(phi, AndW):
        vals = take(phi.domain, m)
        return la_and(truncate_la(instantiate(phi.body, phi.binder, v), m) for v in vals)
    if isinstance(phi, Not):
        return Not(truncate_la(phi.body, m))
    if isinstance(phi, ExistsSeq):
        return ExistsSeq(phi.family, phi.bounds, truncate_la(phi.body, m))
    raise ShapeError(f"not an infinitary formula: {phi!r}")
