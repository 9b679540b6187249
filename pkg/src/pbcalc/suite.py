"""Seeded fuzzers and the desk-scale property battery.

Every check is exact; a failing case is reported with the printed formula,
the structure name and a witness trail.  Fuzzers draw from ``random.Random``
seeded by the caller, so a run is reproducible bit for bit.
"""
from __future__ import annotations

import random
import time
from dataclasses import dataclass, field
from fractions import Fraction

from .approx import approximate, weak_negation
from .evaluator import (
    Affine, CoherenceViolation, NormPower, eval_la_prefix, evaluate,
    explain_failure,
)
from .grammar import print_formula
from .la import (
    ConstantOnSingleton, NegBranch, branch_approx, default_branch, diagonal_neg_branch,
    is_certified, trivial_branch,
)
from .syntax import (
    INF, And, AndN, AndW, Apply, BoundSeq, CountableAnd, Embed, Exists, ExistsSeq, Forall,
    Naturals, NormGE, NormLE, Not, Op, Or, Rationals, Ref, RelApp, RelGE, RelLE, Scale, Sum,
    Var, Zero, free_vars, is_finitary,
)

HALF = Fraction(1, 2)
ATOM_BOUNDS = [Fraction(-1, 2), Fraction(0), Fraction(1, 4), HALF, Fraction(1), Fraction(3, 2),
               Fraction(2)]
QUANT_BOUNDS = [Fraction(0), Fraction(1, 4), HALF, Fraction(1), Fraction(3, 2)]
SCALARS = [Fraction(-1), HALF, Fraction(2), Fraction(-3, 2)]


# ---------------------------------------------------------------------------
# formula fuzzers


class PBFuzzer:
    """Random closed PB formulas over the symbols c (constant), f (unary), R (unary relation).

    Depth counts connective and quantifier nesting above the atoms.
    """

    def __init__(self, rng: random.Random, depth: int = 4, quantifiers: int = 2,
                 countable: int = 1, quant_bounds=None):
        self.rng = rng
        self.depth = depth
        self.quantifiers = quantifiers
        self.countable = countable
        self.quant_bounds = list(quant_bounds or QUANT_BOUNDS)

    def term(self, scope: list, depth: int = 2):
        rng = self.rng
        leaves = [Zero(), Apply("c", ()), Apply("c", ())] + list(scope) * 3
        if depth <= 0 or rng.randrange(100) < 40:
            return rng.choice(leaves)
        k = rng.randrange(3)
        if k == 0:
            return Sum(self.term(scope, depth - 1), self.term(scope, depth - 1))
        if k == 1:
            return Scale(rng.choice(SCALARS), self.term(scope, depth - 1))
        return Apply("f", (self.term(scope, depth - 1),))

    def atom(self, scope: list, ref=None):
        rng = self.rng
        bound = rng.choice(ATOM_BOUNDS)
        if ref is not None and rng.randrange(100) < 60:
            bound = ref
        if rng.randrange(100) < 75:
            kind = rng.choice([NormLE, NormGE])
            return kind(self.term(scope), bound)
        kind = rng.choice([RelLE, RelGE])
        return kind(RelApp("R", (self.term(scope),)), bound)

    def formula(self, scope=None, ref=None):
        budget = {"q": self.quantifiers, "c": self.countable, "n": 0}
        return self._formula(self.depth, list(scope or []), ref, budget)

    def _formula(self, depth, scope, ref, budget):
        rng = self.rng
        if depth == 0 or rng.randrange(100) < 25:
            return self.atom(scope, ref)
        choices = ["and", "or"]
        if budget["q"] > 0:
            choices += ["exists", "forall"]
        if budget["c"] > 0 and ref is None:
            choices.append("countable")
        kind = rng.choice(choices)
        if kind in ("and", "or"):
            parts = tuple(self._formula(depth - 1, scope, ref, budget)
                          for _ in range(rng.choice([2, 2, 3])))
            return (And if kind == "and" else Or)(parts)
        if kind in ("exists", "forall"):
            budget["q"] -= 1
            budget["n"] += 1
            v = Var("u", budget["n"])
            body = self._formula(depth - 1, scope + [v], ref, budget)
            return (Exists if kind == "exists" else Forall)(v, rng.choice(self.quant_bounds), body)
        budget["c"] -= 1
        if rng.randrange(100) < 50:
            return CountableAnd("q", Rationals(),
                                self._formula(depth - 1, scope, Ref("q"), budget))
        return CountableAnd("k", Naturals(),
                            self._formula(depth - 1, scope, Op("div", (1, Ref("k"))), budget))


class LAFuzzer:
    """Random closed LA formulas with PB leaves, paired with certified branches."""

    def __init__(self, rng: random.Random, depth: int = 3):
        self.rng = rng
        self.depth = depth
        self.pb = PBFuzzer(rng, depth=2, quantifiers=1, countable=1)

    def formula(self, depth=None, scope=None, ref=None):
        rng = self.rng
        depth = self.depth if depth is None else depth
        scope = list(scope or [])
        if depth == 0 or rng.randrange(100) < 25:
            return Embed(self.pb.formula(scope, ref))
        kind = rng.choice(["and", "andw", "not", "not", "exseq"])
        if kind == "and":
            return AndN(tuple(self.formula(depth - 1, scope, ref) for _ in range(2)))
        if kind == "andw" and ref is None:
            return AndW("k", Naturals(), self.formula(depth - 1, scope, Op("div", (1, Ref("k")))))
        if kind == "exseq" and not any(v.name == "y" for v in scope):
            ys = [Var("y", 1), Var("y", 2)]
            bounds = BoundSeq((rng.choice([HALF, Fraction(1)]),), Fraction(1))
            return ExistsSeq("y", bounds, self.formula(depth - 1, scope + ys, ref))
        return Not(self.formula(depth - 1, scope, ref))

    def branch(self, phi):
        rng = self.rng
        levels = [rng.choice([1, 2]) for _ in range(4)]
        return default_branch(phi, lambda d: levels[d % len(levels)])


# ---------------------------------------------------------------------------
# test structures


def _diag(dim, *entries):
    return tuple(tuple(entries[i] if i == j else Fraction(0) for j in range(dim))
                 for i in range(dim))


def fuzz_structures() -> list:
    """Six small structures (d <= 3, at most 40 points, p in {1, 2, inf}) interpreting c, f, R."""
    from .workbench import grid_structure
    q = Fraction
    specs = [
        (1, 1, q(1, 4), q(2), (q(1, 2),), (q(-1, 2),), (q(1, 4),), 1),
        (2, 2, q(1, 2), q(1), (q(1, 2), q(0)), (q(1, 2), q(-1)), (q(0), q(1, 2)), 2),
        (2, INF, q(1, 2), q(1), (q(1), q(-1, 2)), (q(-1), q(1, 2)), (q(1, 2), q(0)), 1),
        (3, 1, q(1), q(1), (q(0), q(1), q(0)), (q(1, 2), q(1, 2), q(-1)), (q(0), q(0), q(1)), 1),
        (3, 2, q(1), q(1), (q(1), q(0), q(0)), (q(1), q(-1, 2), q(1, 2)), (q(0), q(1, 2), q(0)), 2),
        (1, INF, q(1, 3), q(4, 3), (q(-2, 3),), (q(3, 2),), (q(0),), 2),
    ]
    out = []
    for dim, p, step, radius, c, scale, offset, power in specs:
        pn = "inf" if p is INF else str(p)
        out.append(grid_structure(
            dim, p, step, radius, name=f"fuzz_d{dim}_l{pn}", limit=40,
            functions={"f": Affine(_diag(dim, *scale), offset)},
            relations={"R": NormPower(power)},
            constants={"c": c}))
    return out


# ---------------------------------------------------------------------------
# results


@dataclass
class CheckResult:
    name: str
    passed: int = 0
    failed: int = 0
    witnesses: list = field(default_factory=list)
    elapsed_ns: int = 0
    notes: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.failed == 0

    def fail(self, text: str, keep: int = 5):
        self.failed += 1
        if len(self.witnesses) < keep:
            self.witnesses.append(text)

    def render(self) -> str:
        mark = "PASS" if self.ok else "FAIL"
        lines = [f"[{mark}] {self.name}: {self.passed} passed, {self.failed} failed"]
        lines += [f"    note: {n}" for n in self.notes]
        lines += [f"    witness: {w}" for w in self.witnesses]
        return "\n".join(lines)


def _case(phi, E, n=None) -> str:
    at = "" if n is None else f" n={n}"
    return f"{E.name}{at}: {print_formula(phi)}"


# ---------------------------------------------------------------------------
# properties


def check_natural(phi, E, levels=range(1, 6), res: CheckResult | None = None) -> CheckResult:
    """phi_{n+1} implies phi_n, and phi implies phi_n when phi is finitary."""
    res = res or CheckResult("natural")
    exact = evaluate(E, phi) if is_finitary(phi) else None
    cache = {}

    def at(n):
        if n not in cache:
            cache[n] = evaluate(E, approximate(phi, n))
        return cache[n]

    for n in levels:
        bad = []
        if at(n + 1) and not at(n):
            bad.append(f"level {n + 1} holds but level {n} fails")
        if exact and not at(n):
            bad.append(f"phi holds but level {n} fails")
        if bad:
            res.fail(f"{'; '.join(bad)} on {_case(phi, E, n)}")
        else:
            res.passed += 1
    return res


def check_negando(phi, E, levels=range(1, 6), res: CheckResult | None = None) -> CheckResult:
    """If phi_n fails then neg(phi, n+1) holds."""
    res = res or CheckResult("negando")
    for n in levels:
        if evaluate(E, approximate(phi, n)):
            res.passed += 1
            continue
        neg = weak_negation(phi, n + 1)
        if evaluate(E, neg):
            res.passed += 1
        else:
            why = "; ".join(explain_failure(E, neg))
            res.fail(f"phi_{n} and neg(phi,{n + 1}) both fail on {_case(phi, E, n)} [{why}]")
    return res


def check_coherence(phi, h, E, N: int = 4, res: CheckResult | None = None) -> CheckResult:
    """Branch approximations are finitary, closed, and FailsAt is monotone in the level."""
    res = res or CheckResult("branch coherence")
    try:
        for n in range(1, N + 1):
            f = branch_approx(phi, h, n)
            if not is_finitary(f):
                raise AssertionError(f"level {n} output is not finitary")
            if free_vars(f):
                raise AssertionError(f"level {n} output has free variables")
        eval_la_prefix(E, phi, h, {}, N)
    except (AssertionError, CoherenceViolation) as e:
        res.fail(f"{e} on {_case(phi, E)}")
    else:
        res.passed += 1
    return res


def exclusion_applies(phi, h, N: int) -> bool:
    """The finite exclusion argument needs some level L with 2L < N among f2(1..N)
    and every universal bound of phi at least 2/N (see ``check_exclusion``)."""
    if min(h.step(s)[1] for s in range(1, N + 1)) * 2 >= N:
        return False
    return all(b >= Fraction(2, N) for b in _forall_bounds(phi))


def _forall_bounds(phi):
    if isinstance(phi, Embed):
        yield from _forall_bounds(phi.pb)
    elif isinstance(phi, And | Or | AndN):
        for p in phi.parts:
            yield from _forall_bounds(p)
    elif isinstance(phi, CountableAnd):
        yield from _forall_bounds(phi.body)
    elif isinstance(phi, Forall):
        yield phi.bound
        yield from _forall_bounds(phi.body)
    elif isinstance(phi, Exists):
        yield from _forall_bounds(phi.body)


def check_exclusion(phi, h, E, N: int = 6, res: CheckResult | None = None) -> CheckResult:
    """No structure satisfies every level <= N of both phi (trivial branch) and Not(phi) (h).

    For a level-L member of the negation, an atom ||t|| <= r relaxed to r + 1/N
    and its negation ||t|| >= r + 1/L - 1/N are exclusive once 2L < N.  A
    universal bound r becomes an existential bound max(0, r - 1/L) + 1/N in
    the negation, inside the original ball r - 1/N only when r >= 2/N.
    """
    res = res or CheckResult("negation exclusion")
    if not exclusion_applies(phi, h, N):
        res.notes.append(f"skipped outside the exclusion hypothesis: {print_formula(phi)}")
        return res
    pos = all(evaluate(E, branch_approx(phi, trivial_branch(phi), n)) for n in range(1, N + 1))
    neg = all(evaluate(E, branch_approx(Not(phi), h, n)) for n in range(1, N + 1))
    if pos and neg:
        res.fail(f"both sides hold to level {N} on {_case(phi, E)}")
    else:
        res.passed += 1
    return res


def exclusion_branches(phi) -> list:
    """Certified negation branches of a negation-free formula: constants at levels 1 and 2,
    and the diagonal sweep starting at level 1."""
    t = trivial_branch(phi)
    out = [NegBranch(lambda s: t, lambda s, L=L: L, ConstantOnSingleton(L)) for L in (1, 2)]
    out.append(diagonal_neg_branch(phi, [t]))
    return out


# ---------------------------------------------------------------------------
# the battery


@dataclass
class SuiteReport:
    seed: int
    results: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(r.ok for r in self.results)

    def render(self, timings: bool = True) -> str:
        lines = [f"property suite (seed {self.seed})"]
        for r in self.results:
            lines.append(r.render())
            if timings:
                lines.append(f"    time: {r.elapsed_ns // 1_000_000} ms")
        lines.append("overall: " + ("PASS" if self.ok else "FAIL"))
        return "\n".join(lines)


def pb_corpus(seed: int, count: int) -> list:
    rng = random.Random(seed)
    fz = PBFuzzer(rng)
    return [fz.formula() for _ in range(count)]


def run_natural(seed: int = 0, count: int = 500, structures=None) -> CheckResult:
    res = CheckResult("natural: phi_{n+1} => phi_n and phi => phi_n")
    t0 = time.perf_counter_ns()
    structures = structures or fuzz_structures()
    for phi in pb_corpus(seed, count):
        for E in structures:
            check_natural(phi, E, res=res)
    res.elapsed_ns = time.perf_counter_ns() - t0
    return res


def run_negando(seed: int = 0, count: int = 500, structures=None) -> CheckResult:
    res = CheckResult("negando: not phi_n => neg(phi, n+1)")
    t0 = time.perf_counter_ns()
    structures = structures or fuzz_structures()
    for phi in pb_corpus(seed, count):
        for E in structures:
            check_negando(phi, E, res=res)
    res.elapsed_ns = time.perf_counter_ns() - t0
    return res


def run_coherence(seed: int = 0, count: int = 100, structures=None, N: int = 3) -> CheckResult:
    res = CheckResult("branch coherence: finitary, closed, FailsAt monotone")
    t0 = time.perf_counter_ns()
    structures = structures or fuzz_structures()
    rng = random.Random(seed + 1)
    fz = LAFuzzer(rng)
    for _ in range(count):
        phi = fz.formula()
        h = fz.branch(phi)
        if not is_certified(h):
            res.fail(f"fuzzer produced an uncertified branch for {print_formula(phi)}")
            continue
        for E in structures:
            check_coherence(phi, h, E, N, res=res)
    res.elapsed_ns = time.perf_counter_ns() - t0
    return res


def run_exclusion(seed: int = 0, count: int = 100, structures=None, N: int = 6) -> CheckResult:
    res = CheckResult(f"negation exclusion at N={N}")
    t0 = time.perf_counter_ns()
    structures = structures or fuzz_structures()
    rng = random.Random(seed + 2)
    fz = PBFuzzer(rng, depth=3, quantifiers=1, countable=1,
                  quant_bounds=[b for b in QUANT_BOUNDS if b >= Fraction(2, N)])
    skipped = 0
    for _ in range(count):
        phi = Embed(fz.formula())
        for h in exclusion_branches(phi):
            if not exclusion_applies(phi, h, N):
                skipped += 1
                continue
            for E in structures:
                check_exclusion(phi, h, E, N, res=res)
    if skipped:
        res.notes.append(f"{skipped} (formula, branch) pairs outside the hypothesis")
    res.elapsed_ns = time.perf_counter_ns() - t0
    return res


def run_all(seed: int = 0, scale=1) -> SuiteReport:
    """All four batteries; ``scale`` (an int or Fraction) multiplies the corpus sizes."""
    scale = Fraction(scale)
    k = lambda n: max(1, int(n * scale))
    structures = fuzz_structures()
    rep = SuiteReport(seed)
    rep.results.append(run_natural(seed, k(500), structures))
    rep.results.append(run_negando(seed, k(500), structures))
    rep.results.append(run_coherence(seed, k(100), structures))
    rep.results.append(run_exclusion(seed, k(100), structures))
    return rep
