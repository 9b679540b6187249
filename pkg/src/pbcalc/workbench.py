"""Ready-made encodings (reflexivity, Ulam, Behrends, Krivine), structure families and searches."""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cmp_to_key
from itertools import product

from .approx import approximate, compare_eq, compare_le, norm_side
from .evaluator import (
    Affine, FiniteNormedStructure, FnTable, NormPower, evaluate, explain_failure,
)
from .radical import RadicalValue, compare_radicals
from .syntax import (
    INF, And, Apply, BoundSeq, ConvexCoeffs, CountableAnd, Embed, Exists, ExistsSeq, Forall,
    IncreasingIntTuples, Naturals, NormGE, NormLE, Op, Or, RationalsGE1Inf, RationalTuples,
    Ref, RelApp, RelGE, RelLE, RelLin, Scale, Sum, SumRange, Var, Zero, apply_op, la_and,
    la_andw, la_forall_seq, la_imp, la_not, la_orw, linear_combination, minus, take, truncate,
)

ONE = Fraction(1)
ZERO = Fraction(0)


def _x(name="x"):
    return Var(name, None)


def norm_eq(t, r):
    """||t|| = r as a pair of norm atoms."""
    return And((NormLE(t, r), NormGE(t, r)))


def norm_zero(t):
    """||t|| = 0; the lower half ||t|| >= 0 always holds and is dropped."""
    return NormLE(t, ZERO)


def rel_zero(rel):
    """R = 0 for a real-valued relation term (two atoms)."""
    return And((RelLE(rel, ZERO), RelGE(rel, ZERO)))


def forall_ball(vars_, r, body):
    """forall v1 (||v1|| <= r => forall v2 (... => body))."""
    for v in reversed(vars_):
        body = Forall(v, r, body)
    return body


# ---------------------------------------------------------------------------
# reflexivity


def _proj(t, i):
    return Op("proj", (t, i))


def build_reflexivity_sentence():
    """For every n and every sequence in the unit ball, some convex combinations of an
    initial block and of the following block are within 1/n of each other."""
    i, j = Ref("i"), Ref("j")
    k, r, a, b, n = Ref("k"), Ref("r"), Ref("a"), Ref("b"), Ref("n")
    head = SumRange("i", 1, k, Scale(_proj(a, i), Var("x", i)))
    tail = SumRange("j", 1, r, Scale(_proj(b, j), Var("x", Op("add", (k, j)))))
    atom = Embed(NormLE(minus(head, tail), Op("div", (1, n))))
    body = la_orw("b", ConvexCoeffs(r), atom)
    body = la_orw("a", ConvexCoeffs(k), body)
    body = la_orw("r", Naturals(), body)
    body = la_orw("k", Naturals(), body)
    return la_andw("n", Naturals(), la_forall_seq("x", BoundSeq((), ONE), body))


def reflexivity_branch(phi=None):
    """A certified branch of the reflexivity sentence along which small grids hold at low levels.

    The outermost negation starts at level 3, which shrinks the universal
    bound on the sequence; every inner negation starts at level 1.
    """
    from .la import default_branch
    phi = build_reflexivity_sentence() if phi is None else phi
    return default_branch(phi, lambda depth: 3 if depth == 0 else 1)


# ---------------------------------------------------------------------------
# Ulam


def build_ulam(k: int):
    """(theory, sigma, theta, sentence) for onto maps T with T(0)=0 and ||T(x)|| <= k||x||."""
    if k < 1:
        raise ValueError("k must be >= 1")
    x, y = _x("x"), _x("y")
    T = lambda t: Apply("T", (t,))
    N = Ref("N")
    bound = CountableAnd("N", Naturals(), Forall(
        x, N, compare_le(norm_side(T(x)), norm_side(Scale(Fraction(k), x)))))
    fixes_zero = norm_zero(T(Zero()))
    onto = CountableAnd("N", Naturals(), Forall(
        x, N, Exists(y, Op("mul", (k, N)), norm_zero(minus(T(y), x)))))
    theory = [bound, fixes_zero, onto]
    sigma = forall_ball([x, y], ONE, compare_eq(norm_side(minus(T(x), T(y))),
                                                norm_side(minus(x, y))))
    theta = forall_ball([x, y], ONE, norm_zero(minus(minus(T(Sum(x, y)), T(x)), T(y))))
    return theory, sigma, theta, la_imp(Embed(sigma), Embed(theta))


# ---------------------------------------------------------------------------
# Behrends


def build_behrends(k: int, p: int, q: int):
    """(theory, sigma, theta, sentence) for two projections P, Q and relations fp, fq
    standing for the p-th and q-th powers of the norm."""
    if min(k, p, q) < 1:
        raise ValueError("k, p, q must be positive integers")
    x, y = _x("x"), _x("y")
    v = Ref("v")
    a, b, r = _proj(v, 1), _proj(v, 2), Op("abs", (_proj(v, 3),))
    F = lambda name, t: RelApp(name, (t,))
    theory = []
    for S in ("P", "Q"):
        A = lambda t, S=S: Apply(S, (t,))
        lin = minus(minus(A(Sum(Scale(a, x), Scale(b, y))), Scale(a, A(x))), Scale(b, A(y)))
        theory.append(CountableAnd("v", RationalTuples(3), forall_ball([x, y], r, norm_zero(lin))))
    for S in ("P", "Q"):
        A = lambda t, S=S: Apply(S, (t,))
        theory.append(CountableAnd("v", RationalTuples(1), Forall(
            x, Op("abs", (_proj(v, 1),)), norm_zero(minus(A(A(x)), A(x))))))
    s, rr = _proj(v, 1), Op("abs", (_proj(v, 2),))
    for name, e in (("fp", p), ("fq", q)):
        low = Op("pow", (Op("max", (s, 0)), e))
        high = Op("pow", (rr, e))
        theory.append(CountableAnd("v", RationalTuples(2), Forall(x, rr, Or((
            NormLE(x, s), And((RelGE(F(name, x), low), RelLE(F(name, x), high))))))))
    e1, e2 = Apply("e1", ()), Apply("e2", ())
    theory.append(And(norm_eq(e1, ONE).parts + norm_eq(e2, ONE).parts +
                      (NormGE(minus(e1, e2), Fraction(1, 2)),)))
    P = lambda t: Apply("P", (t,))
    Q = lambda t: Apply("Q", (t,))
    split_p = RelLin(((ONE, F("fp", P(x))), (ONE, F("fp", minus(x, P(x)))), (-ONE, F("fp", x))))
    split_q = RelLin(((ONE, F("fq", Q(x))), (ONE, F("fq", minus(x, Q(x)))), (-ONE, F("fq", x))))
    sigma = And((Forall(x, ONE, rel_zero(split_p)), Forall(x, ONE, rel_zero(split_q))))
    same = RelLin(((ONE, F("fp", x)), (-ONE, F("fq", x))))
    theta = Forall(x, ONE, And((norm_zero(minus(P(Q(x)), Q(P(x)))),) + rel_zero(same).parts))
    return theory, sigma, theta, la_imp(Embed(sigma), Embed(theta))


# ---------------------------------------------------------------------------
# Krivine


def _coeff_sum(coeffs, lo, hi, family="x", binder="i"):
    i = Ref(binder)
    return SumRange(binder, lo, hi, Scale(_proj(coeffs, i), Var(family, i)))


def build_base_k(K) -> object:
    """BaseK(x): unit vectors whose initial segments are K-dominated by longer segments."""
    K = Fraction(K)
    i, n, m, a = Ref("i"), Ref("n"), Ref("m"), Ref("a")
    unit = CountableAnd("i", Naturals(), norm_eq(Var("x", i), ONE))
    short = _coeff_sum(a, 1, n)
    long_ = _coeff_sum(a, 1, Op("add", (n, m)))
    ineq = compare_le(norm_side(short), norm_side(Scale(K, long_)))
    basis = CountableAnd("n", Naturals(), CountableAnd("m", Naturals(), CountableAnd(
        "a", RationalTuples(Op("add", (n, m))), ineq)))
    return And((unit, basis))


def build_theta(n: int, p, eps, ys=None, binder: str = "c"):
    """theta^{n,p,eps}(y1..yn): every combination sum c_j y_j has norm between |c|_p
    and (1+eps)|c|_p."""
    eps = Fraction(eps)
    ys = list(ys) if ys is not None else [Var("y", j) for j in range(1, n + 1)]
    c = Ref(binder)
    comb = linear_combination([_proj(c, j) for j in range(1, n + 1)], ys)
    lp = Op("pnorm", (p, c))
    return CountableAnd(binder, RationalTuples(n), And((
        NormGE(comb, lp), NormLE(comb, Op("mul", (1 + eps, lp))))))


def block_terms(n: int, q=Ref("q"), b=Ref("b"), family="x"):
    """y_j = sum_{i=q_j+1}^{q_{j+1}} b_i x_i for j = 1..n."""
    return [_coeff_sum(b, Op("add", (_proj(q, j), 1)), _proj(q, j + 1), family)
            for j in range(1, n + 1)]


@dataclass
class KrivineFormulas:
    base: object
    theta: object
    sentence: object


def build_krivine_formulas(K, n: int, eps) -> KrivineFormulas:
    base = build_base_k(K)
    theta = build_theta(n, Ref("p"), eps, block_terms(n))
    inner = la_not(Embed(theta))
    inner = la_andw("b", RationalTuples(_proj(Ref("q"), n + 1)), inner)
    inner = la_andw("q", IncreasingIntTuples(n), inner)
    inner = la_andw("p", RationalsGE1Inf(), inner)
    body = la_and([Embed(base), inner])
    return KrivineFormulas(base, build_theta(n, Ref("p"), eps),
                           la_not(ExistsSeq("x", BoundSeq((), ONE), body)))


# ---------------------------------------------------------------------------
# Krivine block search


@dataclass
class KrivineQuery:
    vectors: list
    n: int
    p_candidates: list
    epsilon: Fraction
    coeff_depth: int = 25
    partition_depth: int = 12
    block_depth: int = 8

    def __post_init__(self):
        self.vectors = [tuple(Fraction(c) for c in v) for v in self.vectors]
        self.epsilon = Fraction(self.epsilon)
        if not 1 <= self.n <= len(self.vectors):
            raise ValueError("need 1 <= n <= number of vectors")
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")
        if any(all(c == 0 for c in v) for v in self.vectors):
            raise ValueError("vectors must be nonzero")
        if min(self.coeff_depth, self.partition_depth, self.block_depth) < 1:
            raise ValueError("depths must be positive")


@dataclass
class KrivineCandidate:
    p: object
    q: tuple
    b: tuple
    blocks: list
    distortion: RadicalValue       # max ratio / min ratio over the checked tuples
    low: RadicalValue              # min of ||sum c_j y_j|| / |c|_p
    high: RadicalValue             # max of the same ratio
    theta_holds: bool              # the literal two-sided inequality on every checked tuple
    checked: int

    def render(self) -> str:
        pn = "inf" if self.p is INF else str(self.p)
        blocks = "; ".join(" ".join(str(x) for x in y) for y in self.blocks)
        return (f"p = {pn}, q = {tuple(int(x) for x in self.q)}, "
                f"b = ({' '.join(str(x) for x in self.b)}), blocks = [{blocks}], "
                f"distortion = {self.distortion}, ratio range [{self.low}, {self.high}], "
                f"theta holds on checked tuples: {self.theta_holds} ({self.checked} tuples)")


@dataclass
class KrivineResult:
    best: KrivineCandidate | None
    per_p: dict = field(default_factory=dict)     # p -> best candidate for that p
    depths: dict = field(default_factory=dict)

    def render(self) -> str:
        d = ", ".join(f"{k}={v}" for k, v in self.depths.items())
        if self.best is None:
            return f"no candidate found (depths: {d})"
        lines = [f"best: {self.best.render()}", f"depths: {d}"]
        for p, c in self.per_p.items():
            lines.append(f"  candidate p={'inf' if p is INF else p}: distortion {c.distortion}")
        return "\n".join(lines)


def _as_radical(v) -> RadicalValue:
    return v if isinstance(v, RadicalValue) else RadicalValue(Fraction(v), 1)


def evaluate_blocks(E, blocks, p, eps, coeffs):
    """Ratios ||sum c_j y_j|| / |c|_p over the given nonzero coefficient tuples."""
    low = high = None
    holds = True
    one_eps = 1 + Fraction(eps)
    for c in coeffs:
        comb = tuple(sum((cj * y[k] for cj, y in zip(c, blocks)), ZERO) for k in range(E.dim))
        nv = E.norm(comb)
        lp = _as_radical(apply_op("pnorm", (p, c)))
        ratio = nv / lp
        if low is None or compare_radicals(ratio, low) < 0:
            low = ratio
        if high is None or compare_radicals(ratio, high) > 0:
            high = ratio
        if compare_radicals(nv, lp) < 0 or compare_radicals(nv, lp * one_eps) > 0:
            holds = False
    return low, high, holds


def krivine_search(E: FiniteNormedStructure, query: KrivineQuery) -> KrivineResult:
    """Brute force over (p, block partition, block coefficients) for the least distortion."""
    m, n = len(query.vectors), query.n
    parts = []
    for qv in _bounded_partitions(n, m, query.partition_depth):
        parts.append(qv)
    coeffs = [c for c in take(RationalTuples(n), query.coeff_depth + 1) if any(c)]
    coeffs = coeffs[:query.coeff_depth]
    best = None
    per_p: dict = {}
    for p in query.p_candidates:
        for qv in parts:
            top = int(qv[-1])
            for b in take(RationalTuples(top), query.block_depth):
                blocks = []
                for j in range(n):
                    lo, hi = int(qv[j]), int(qv[j + 1])
                    y = tuple(sum((b[i] * query.vectors[i][k] for i in range(lo, hi)), ZERO)
                              for k in range(E.dim))
                    blocks.append(y)
                if any(all(x == 0 for x in y) for y in blocks):
                    continue
                low, high, holds = evaluate_blocks(E, blocks, p, query.epsilon, coeffs)
                dist = high / low
                cand = KrivineCandidate(p, qv, b, blocks, dist, low, high, holds, len(coeffs))
                cur = per_p.get(p)
                if cur is None or compare_radicals(dist, cur.distortion) < 0:
                    per_p[p] = cand
                if best is None or compare_radicals(dist, best.distortion) < 0:
                    best = cand
    depths = {"coeff_depth": len(coeffs), "partitions": len(parts),
              "block_depth": query.block_depth, "p_candidates": len(query.p_candidates)}
    return KrivineResult(best, per_p, depths)


def _bounded_partitions(n: int, m: int, depth: int) -> list:
    """First ``depth`` block partitions q_1 < ... < q_{n+1} <= m in canonical order."""
    from .syntax import increasing_int_tuples
    out = []
    limit = 0
    for qv in increasing_int_tuples(n):
        limit += 1
        if qv[-1] <= m:
            out.append(qv)
            if len(out) >= depth:
                break
        if limit > 100000:
            break
    return out


def recheck_candidate(E, cand: KrivineCandidate, eps, coeff_depth: int) -> tuple:
    """Re-evaluate a reported candidate from scratch: (distortion, theta_holds)."""
    n = len(cand.blocks)
    coeffs = [c for c in take(RationalTuples(n), coeff_depth + 1) if any(c)][:coeff_depth]
    low, high, holds = evaluate_blocks(E, cand.blocks, cand.p, eps, coeffs)
    return high / low, holds


# ---------------------------------------------------------------------------
# the index w(n, p, eps)


@dataclass
class WEstimate:
    w: int | None
    n: int
    p: object
    epsilon: Fraction
    depth: int
    w_max: int
    structures: int
    assignments: int
    log: list = field(default_factory=list)

    def render(self) -> str:
        pn = "inf" if self.p is INF else str(self.p)
        head = (f"w = {self.w}" if self.w is not None else f"exhausted at w_max = {self.w_max}")
        lines = [f"empirical w(n={self.n}, p={pn}, eps={self.epsilon}): {head} "
                 f"[{self.structures} structures, {self.assignments} assignments, "
                 f"conclusion checked on its first {self.depth} coefficient tuples; not a proof]"]
        lines += [f"  {entry}" for entry in self.log]
        return "\n".join(lines)


def analytic_w(eps, constant=2) -> int:
    """The fallback ceil(constant/eps); a heuristic default, not a derived value."""
    v = Fraction(constant) / Fraction(eps)
    return max(1, -(-v.numerator // v.denominator))


def estimate_w(n: int, p, eps, family, w_max: int = 32, depth: int = 8) -> WEstimate:
    """Least w such that on every structure and assignment, (theta^{n,p,eps})_w implies the
    first ``depth`` instances of theta^{n,p,2eps}."""
    eps = Fraction(eps)
    family = list(family)
    th = build_theta(n, p, eps)
    concl = truncate(build_theta(n, p, 2 * eps), depth)
    levels = [approximate(th, w) for w in range(1, w_max + 1)]
    need = 1
    log = []
    count = 0
    for idx, E in enumerate(family):
        for ys in product(E.carrier, repeat=n):
            env = {("y", j + 1): ys[j] for j in range(n)}
            count += 1
            if evaluate(E, concl, env):
                continue
            last = 0
            for w in range(1, w_max + 1):
                if evaluate(E, levels[w - 1], env):
                    last = w
                else:
                    break
            if last >= need:
                need = last + 1
                pts = "; ".join(" ".join(str(x) for x in y) for y in ys)
                log.append(f"w = {last} refuted by {E.name or '#' + str(idx)} at y = [{pts}]: "
                           + "; ".join(explain_failure(E, concl, env)))
    w = need if need <= w_max else None
    return WEstimate(w, n, p, eps, depth, w_max, len(family), count, log)


# ---------------------------------------------------------------------------
# structure generators


def _grid_axis(step, radius):
    k = int(radius / step)
    return [step * i for i in range(-k, k + 1)]


def grid_structure(dim: int, p, step=Fraction(1, 2), radius=ONE, name="", limit: int = 40,
                   **interp) -> FiniteNormedStructure:
    """All grid points in the cube of the given radius (at most ``limit`` points, nearest
    to the origin first, keeping the set symmetric)."""
    axis = _grid_axis(Fraction(step), Fraction(radius))
    pts = list(product(axis, repeat=dim))
    tmp = FiniteNormedStructure(dim, p, [tuple([ZERO] * dim)])
    pts.sort(key=cmp_to_key(lambda u, v: compare_radicals(tmp.norm(u), tmp.norm(v))
                            or (u > v) - (u < v)))
    chosen, seen = [], set()
    for v in pts:
        if v in seen:
            continue
        neg = tuple(-x for x in v)
        group = [v] if neg == v else [v, neg]
        if len(chosen) + len(group) > limit:
            break
        chosen += group
        seen.update(group)
    return FiniteNormedStructure(dim, p, chosen, name=name or f"grid{dim}", **interp)


def unit_basis_structure(d: int, p, name="") -> FiniteNormedStructure:
    pts = [tuple([ZERO] * d)]
    for i in range(d):
        e = tuple(ONE if j == i else ZERO for j in range(d))
        pts += [e, tuple(-x for x in e)]
    pn = "inf" if p is INF else str(p)
    return FiniteNormedStructure(d, p, pts, name=name or f"unit_basis_l{pn}_{d}")


def unit_vectors(d: int) -> list:
    return [tuple(ONE if j == i else ZERO for j in range(d)) for i in range(d)]


def identity_affine(d: int) -> Affine:
    return Affine(tuple(tuple(ONE if i == j else ZERO for j in range(d)) for i in range(d)),
                  tuple([ZERO] * d))


def ulam_family(step=Fraction(1, 8), radius=Fraction(3, 2), max_maps: int = 24) -> list:
    """Ulam structures: linear isometries and sign-flip perturbations of them.

    Each T is a norm-preserving permutation of the carrier fixing 0, so every
    structure models the theory exactly. Flips are placed strictly inside the
    unit ball: a flip at norm >= 1 is invisible to the isometry hypothesis at
    every level while still breaking additivity of sums that reach it.
    """
    axis = _grid_axis(Fraction(step), Fraction(radius))
    carrier = [(x,) for x in axis]
    inner = [x for x in axis if 0 < x < 1]
    maps = [("id", set(), False), ("neg", set(), True)]
    for t in inner:
        maps.append((f"flip{t}", {t}, False))
    for t, u in zip(inner, inner[1:]):
        maps.append((f"flip{t}_{u}", {t, u}, False))
    for t in inner[::2]:
        maps.append((f"negflip{t}", {t}, True))
    out = []
    for label, flips, negate in maps[:max(0, max_maps - 3)]:
        table = {}
        for x in axis:
            y = -x if negate else x
            table[(x,)] = (-y,) if abs(x) in flips else (y,)
        out.append(FiniteNormedStructure(1, 1, carrier, {"T": FnTable(table, 1)},
                                         name=f"ulam_{label}".replace("/", "_")))
    return out + ulam_plane_family()[:min(3, max_maps)]


def ulam_plane_family() -> list:
    """Three maps on the 25-point l_inf grid {-1,-1/2,0,1/2,1}^2: swap, rotation, swap with a flip."""
    axis = _grid_axis(Fraction(1, 2), ONE)
    carrier = [(a, b) for a in axis for b in axis]
    half = Fraction(1, 2)
    flipped = {(half, ZERO), (-half, ZERO)}
    maps = {
        "swap": lambda a, b: (b, a),
        "rot": lambda a, b: (-b, a),
        "swapflip": lambda a, b: (-b, -a) if (a, b) in flipped else (b, a),
    }
    out = []
    for label, f in maps.items():
        table = {(a, b): f(a, b) for a, b in carrier}
        out.append(FiniteNormedStructure(2, INF, carrier, {"T": FnTable(table, 1)},
                                         name=f"ulam2_{label}"))
    return out


def behrends_structure(p: int, q: int | None = None, step=ONE, radius=ONE) -> FiniteNormedStructure:
    """l_p^3 grid with P, Q coordinate projections and fp, fq the p-th and q-th norm powers."""
    q = p if q is None else q
    P = Affine(((ONE, ZERO, ZERO), (ZERO, ZERO, ZERO), (ZERO, ZERO, ZERO)), (ZERO, ZERO, ZERO))
    Q = Affine(((ONE, ZERO, ZERO), (ZERO, ONE, ZERO), (ZERO, ZERO, ZERO)), (ZERO, ZERO, ZERO))
    E = grid_structure(3, p, step, radius, name=f"behrends_l{p}", limit=27,
                       functions={"P": P, "Q": Q},
                       relations={"fp": NormPower(p), "fq": NormPower(q)},
                       constants={"e1": (ONE, ZERO, ZERO), "e2": (ZERO, ONE, ZERO)})
    return E


def reflexivity_structure() -> FiniteNormedStructure:
    return FiniteNormedStructure(1, 1, [(Fraction(k, 2),) for k in range(-2, 3)],
                                 name="line5")
