"""Hand-derived golden outputs of the two transforms: (kind, n, input, expected)."""
from fractions import Fraction


TRANSFORM_GOLDENS = [
    # norm LE atom relaxes upward
    ("approx", 4, "(le (norm x1) 1)", "(le (norm x1) 5/4)"),
    # relation atoms, both directions, under a finite conjunction
    ("approx", 2, "(and (le (rel R x1) 1) (ge (rel R x1) 1/2))",
     "(and (le (rel R x1) 3/2) (ge (rel R x1) 0))"),
    # norm GE atom relaxes downward, finite disjunction
    ("approx", 3, "(or (le (norm x1) 1) (ge (norm x2) 2))",
     "(or (le (norm x1) 4/3) (ge (norm x2) 5/3))"),
    # existential bound grows
    ("approx", 2, "(exists (y 2) (ge (norm (+ y (scale -1 x1))) 1))",
     "(exists (y 5/2) (ge (norm (+ y (scale -1 x1))) 1/2))"),
    # universal bound shrinks
    ("approx", 4, "(forall (y 1) (le (norm (+ y x1)) 2))",
     "(forall (y 3/4) (le (norm (+ y x1)) 9/4))"),
    # countable conjunction keeps its first n instances (i = 1, 2, 3)
    ("approx", 3, "(And i Nat (le (norm x1) (add 1 (div 1 i))))",
     "(and (le (norm x1) 7/3) (le (norm x1) 11/6) (le (norm x1) 5/3))"),
    # atoms dualize, conjunction becomes disjunction
    ("neg", 2, "(and (ge (norm x1) 1) (le (rel R x1) 1/2))",
     "(or (le (norm x1) 1/2) (ge (rel R x1) 1))"),
    # disjunction becomes conjunction
    ("neg", 3, "(or (le (norm x1) 1) (ge (rel S x1 x2) 1))",
     "(and (ge (norm x1) 4/3) (le (rel S x1 x2) 2/3))"),
    # existential becomes universal with bound r + 1/n
    ("neg", 2, "(exists (y 1) (and (le (norm y) 1) (ge (norm y) 2)))",
     "(forall (y 3/2) (or (ge (norm y) 3/2) (le (norm y) 3/2)))"),
    # universal becomes existential with bound r - 1/n
    ("neg", 2, "(forall (y 1) (le (norm (+ y x1)) 1))",
     "(exists (y 1/2) (ge (norm (+ y x1)) 3/2))"),
    # degenerate universal bound r < 1/n clamps to the zero ball
    ("neg", 2, "(forall (y 1/4) (le (norm y) 1))",
     "(exists (y 0) (ge (norm y) 3/2))"),
    # countable conjunction becomes the disjunction over its first n instances (q = 0, 1)
    ("neg", 2, "(And q Q (or (le (norm x1) q) (ge (norm x2) q)))",
     "(or (and (ge (norm x1) 1/2) (le (norm x2) -1/2)) (and (ge (norm x1) 3/2) (le (norm x2) 1/2)))"),
]

# reflexivity sentence with every countable conjunction cut to its first instance
REFLEXIVITY_TRUNCATED = (
    "(and (not (existsSeq x (const 1) (not (not (and (not (not (and (not (not (and (not (not "
    "(and (not (le (norm (+ (scale 1 x1) (scale -1 (scale 1 x2)))) 1)))))))))))))))))"
)


def _hand_terms():
    from pbcalc.syntax import Apply, Scale, Sum, Var
    x, y = Var("x", None), Var("y", None)
    T = lambda t: Apply("T", (t,))
    neg = lambda t: Scale(Fraction(-1), t)
    return x, y, T, neg, Sum


def ulam_almost_fixture(n, m):
    """Hand-built (sigma_m, theta_n) for the Ulam pair: every atom moves by exactly 1/m
    (hypothesis) or 1/n (conclusion), balls shrink by the same amounts."""
    from pbcalc.syntax import And, Forall, NormGE, NormLE, Or, Rationals, enumerate_domain
    x, y, T, neg, Sum = _hand_terms()
    img, pre = Sum(T(x), neg(T(y))), Sum(x, neg(y))
    e = Fraction(1, m)
    qs = enumerate_domain(Rationals(), m)
    le = And(tuple(Or((NormLE(img, q + e), NormGE(pre, q - e))) for q in qs))
    ge = And(tuple(Or((NormLE(pre, q + e), NormGE(img, q - e))) for q in qs))
    hyp = Forall(x, 1 - e, Forall(y, 1 - e, And((le, ge))))
    d = Fraction(1, n)
    add = Sum(Sum(T(Sum(x, y)), neg(T(x))), neg(T(y)))
    return hyp, Forall(x, 1 - d, Forall(y, 1 - d, NormLE(add, d)))


def behrends_almost_fixture(n, m):
    """Hand-built (sigma_m, theta_n) for the Behrends pair."""
    from pbcalc.syntax import And, Apply, Forall, NormLE, RelApp, RelGE, RelLE, RelLin
    x, _, _, neg, Sum = _hand_terms()
    one = Fraction(1)
    e, d = Fraction(1, m), Fraction(1, n)

    def split(S, f):
        Sx = Apply(S, (x,))
        return RelLin(((one, RelApp(f, (Sx,))), (one, RelApp(f, (Sum(x, neg(Sx)),))),
                       (-one, RelApp(f, (x,)))))

    hyp = And(tuple(Forall(x, 1 - e, And((RelLE(split(S, f), e), RelGE(split(S, f), -e))))
                    for S, f in (("P", "fp"), ("Q", "fq"))))
    P = lambda t: Apply("P", (t,))
    Q = lambda t: Apply("Q", (t,))
    same = RelLin(((one, RelApp("fp", (x,))), (-one, RelApp("fq", (x,)))))
    concl = Forall(x, 1 - d, And((NormLE(Sum(P(Q(x)), neg(Q(P(x)))), d),
                                  RelLE(same, d), RelGE(same, -d))))
    return hyp, concl
