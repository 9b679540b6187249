"""Signatures: symbols with arities, norm bounds K(., N) and continuity moduli delta(., N, eps).

Bound and modulus tables are finite; symbols may carry a default rule
(K = a*N + b, delta = c*eps) that answers every query outside the table.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product

from .radical import compare_radical
from .syntax import Apply, Scale, Sum, SumRange, Var, Zero


@dataclass
class SymbolDecl:
    name: str
    arity: int
    kind: str = "fn"                       # "fn" or "rel"
    bounds: dict = field(default_factory=dict)      # N -> K
    bound_rule: tuple | None = None                 # (a, b): K = a*N + b
    moduli: dict = field(default_factory=dict)      # (N, eps) -> delta
    modulus_rule: Fraction | None = None            # c: delta = c*eps

    def __post_init__(self):
        if self.arity < 0:
            raise ValueError(f"{self.name}: negative arity")
        if self.kind not in ("fn", "rel"):
            raise ValueError(f"{self.name}: kind must be fn or rel")
        for N, K in self.bounds.items():
            if N < 1 or K < 0:
                raise ValueError(f"{self.name}: bad bound entry K({N}) = {K}")
        for (N, eps), d in self.moduli.items():
            if N < 1 or eps <= 0 or d <= 0:
                raise ValueError(f"{self.name}: moduli must be positive")
        if self.modulus_rule is not None and self.modulus_rule <= 0:
            raise ValueError(f"{self.name}: modulus rule must be positive")
        self.moduli = normalize_moduli(self.moduli)

    def bound(self, N: int) -> int | None:
        if N in self.bounds:
            return self.bounds[N]
        if self.bound_rule is not None:
            a, b = self.bound_rule
            return a * N + b
        return None

    def modulus(self, N: int, eps: Fraction) -> Fraction | None:
        best = None
        for (n, e), d in self.moduli.items():
            if n == N and e <= eps and (best is None or d > best):
                best = d
        if best is not None:
            return best
        if self.modulus_rule is not None:
            return self.modulus_rule * eps
        return None


def normalize_moduli(table: dict) -> dict:
    """Make delta non-decreasing in eps for each N (a delta valid for eps is valid above it)."""
    out = {}
    by_n: dict = {}
    for (N, eps), d in table.items():
        by_n.setdefault(N, []).append((Fraction(eps), Fraction(d)))
    for N, rows in by_n.items():
        best = Fraction(0)
        for eps, d in sorted(rows):
            best = max(best, d)
            out[(N, eps)] = best
    return out


@dataclass
class Signature:
    functions: dict = field(default_factory=dict)
    relations: dict = field(default_factory=dict)
    levels: tuple = (1,)
    epsilons: tuple = (Fraction(1, 4), Fraction(1, 2), Fraction(1))

    def add(self, decl: SymbolDecl) -> "Signature":
        table = self.functions if decl.kind == "fn" else self.relations
        if decl.name in self.functions or decl.name in self.relations:
            raise ValueError(f"symbol {decl.name!r} declared twice")
        table[decl.name] = decl
        return self

    def function_arity(self, name: str) -> int | None:
        d = self.functions.get(name)
        return None if d is None else d.arity

    def relation_arity(self, name: str) -> int | None:
        d = self.relations.get(name)
        return None if d is None else d.arity

    def symbols(self):
        return list(self.functions.values()) + list(self.relations.values())

    @classmethod
    def of_structure(cls, E) -> "Signature":
        """Symbols and arities read off a structure's interpretations (no tables)."""
        sig = cls()
        for name, k in E.function_arities().items():
            sig.add(SymbolDecl(name, k, "fn"))
        for name, k in E.relation_arities().items():
            sig.add(SymbolDecl(name, k, "rel"))
        return sig


def validate_term(sig: Signature, t) -> list[str]:
    """Diagnostics for undeclared symbols or wrong arities; [] means ok."""
    out: list[str] = []

    def walk(t):
        if isinstance(t, Var | Zero):
            return
        if isinstance(t, Sum):
            walk(t.left)
            walk(t.right)
        elif isinstance(t, Scale):
            walk(t.arg)
        elif isinstance(t, SumRange):
            walk(t.body)
        elif isinstance(t, Apply):
            want = sig.function_arity(t.symbol)
            if want is None:
                out.append(f"unknown symbol {t.symbol!r}")
            elif want != len(t.args):
                out.append(f"arity mismatch for {t.symbol}: expected {want}, got {len(t.args)}")
            for a in t.args:
                walk(a)
        else:
            raise TypeError(f"not a term: {t!r}")

    walk(t)
    return out


# ---------------------------------------------------------------------------
# conformance of a finite structure


@dataclass
class Violation:
    symbol: str
    kind: str            # "bound", "modulus", "missing" or "domain"
    detail: str

    def __str__(self):
        return f"{self.symbol}: {self.kind}: {self.detail}"


@dataclass
class ConformanceReport:
    violations: list = field(default_factory=list)
    checked: int = 0

    @property
    def ok(self) -> bool:
        return not self.violations

    def render(self) -> str:
        head = f"{self.checked} instances checked, {len(self.violations)} violations"
        return "\n".join([head] + [f"  {v}" for v in self.violations])


def _fmt(v) -> str:
    return " ".join(str(x) for x in v)


def _fmt_args(args) -> str:
    return " | ".join(_fmt(a) for a in args)


def _apply(E, decl, args):
    from .evaluator import eval_rel, eval_term
    from .syntax import RelApp
    env = {("_a", i + 1): a for i, a in enumerate(args)}
    vars_ = tuple(Var("_a", i + 1) for i in range(len(args)))
    if decl.kind == "fn":
        return eval_term(E, Apply(decl.name, vars_), env)
    return eval_rel(E, RelApp(decl.name, vars_), env)


def _dist(E, x, y):
    return E.norm(tuple(a - b for a, b in zip(x, y)))


def check_structure_conformance(sig: Signature, E) -> ConformanceReport:
    """Check every declared bound and modulus on all carrier tuples (strictness as declared).

    Bounds: ||x_k|| <= N implies ||f(x)|| <= K (|R(x)| <= K for relations).
    Moduli: ||x_k||, ||y_k|| < N and ||x_k - y_k|| < delta imply
    ||f(x) - f(y)|| < eps (|R(x) - R(y)| < eps for relations).
    """
    from .evaluator import EvalError
    rep = ConformanceReport()
    for decl in sig.symbols():
        interp = (decl.name in E.constants or decl.name in E.functions) if decl.kind == "fn" \
            else decl.name in E.relations
        if not interp:
            rep.violations.append(Violation(decl.name, "missing", "not interpreted"))
            continue
        levels = sorted(set(sig.levels) | set(decl.bounds) | {N for N, _ in decl.moduli})
        values: dict = {}

        def value(args):
            if args not in values:
                values[args] = _apply(E, decl, args)
            return values[args]

        for N in levels:
            closed = [c for c in E.carrier if compare_radical(E.norm(c), N) <= 0]
            K = decl.bound(N)
            if K is not None:
                for args in product(closed, repeat=decl.arity):
                    rep.checked += 1
                    try:
                        v = value(args)
                    except EvalError as e:
                        rep.violations.append(Violation(decl.name, "domain", str(e)))
                        continue
                    big = compare_radical(E.norm(v), K) > 0 if decl.kind == "fn" else abs(v) > K
                    if big:
                        shown = _fmt(v) if decl.kind == "fn" else str(v)
                        rep.violations.append(Violation(
                            decl.name, "bound",
                            f"N={N} K={K} at ({_fmt_args(args)}) -> {shown}"))
            opened = [c for c in closed if compare_radical(E.norm(c), N) < 0]
            grid = sorted({e for n, e in decl.moduli if n == N} |
                          (set(sig.epsilons) if decl.modulus_rule is not None else set()))
            tuples = list(product(opened, repeat=decl.arity))
            for eps in grid:
                delta = decl.modulus(N, eps)
                if delta is None:
                    continue
                for xs in tuples:
                    for ys in tuples:
                        if xs >= ys:
                            continue
                        if any(compare_radical(_dist(E, a, b), delta) >= 0 for a, b in zip(xs, ys)):
                            continue
                        rep.checked += 1
                        try:
                            fx, fy = value(xs), value(ys)
                        except EvalError as e:
                            rep.violations.append(Violation(decl.name, "domain", str(e)))
                            continue
                        if decl.kind == "fn":
                            bad = compare_radical(_dist(E, fx, fy), eps) >= 0
                        else:
                            bad = abs(fx - fy) >= eps
                        if bad:
                            rep.violations.append(Violation(
                                decl.name, "modulus",
                                f"N={N} eps={eps} delta={delta} at ({_fmt_args(xs)}) "
                                f"vs ({_fmt_args(ys)})"))
    return rep


# ---------------------------------------------------------------------------
# text form: [symbols], [bounds], [moduli], [grid] sections


def parse_signature_sections(sections: dict) -> Signature:
    """Build a signature from already split sections (name -> list of (lineno, text))."""
    sig = Signature()
    for lineno, line in sections.get("symbols", []):
        parts = line.split()
        if len(parts) != 3 or parts[0] not in ("fn", "rel"):
            raise ValueError(f"line {lineno}: expected 'fn NAME ARITY' or 'rel NAME ARITY'")
        sig.add(SymbolDecl(parts[1], int(parts[2]), parts[0]))

    def decl(name, lineno):
        d = sig.functions.get(name) or sig.relations.get(name)
        if d is None:
            raise ValueError(f"line {lineno}: undeclared symbol {name!r}")
        return d

    for lineno, line in sections.get("bounds", []):
        parts = line.replace("->", " ").split()
        d = decl(parts[0], lineno)
        if parts[1] == "default":
            d.bound_rule = (int(parts[2]), int(parts[3]))
        else:
            d.bounds[int(parts[1])] = int(parts[2])
    for lineno, line in sections.get("moduli", []):
        parts = line.replace("->", " ").split()
        d = decl(parts[0], lineno)
        if parts[1] == "default":
            d.modulus_rule = Fraction(parts[2])
        else:
            d.moduli[(int(parts[1]), Fraction(parts[2]))] = Fraction(parts[3])
    for lineno, line in sections.get("grid", []):
        key, _, rest = line.partition("=")
        vals = rest.split()
        if key.strip() == "levels":
            sig.levels = tuple(int(v) for v in vals)
        elif key.strip() == "eps":
            sig.epsilons = tuple(Fraction(v) for v in vals)
        else:
            raise ValueError(f"line {lineno}: unknown grid key {key.strip()!r}")
    for d in sig.symbols():
        d.__post_init__()
    return sig


def format_signature(sig: Signature) -> str:
    lines = ["[symbols]"]
    lines += [f"{d.kind} {d.name} {d.arity}" for d in sig.symbols()]
    lines.append("[bounds]")
    for d in sig.symbols():
        lines += [f"{d.name} {N} -> {K}" for N, K in sorted(d.bounds.items())]
        if d.bound_rule is not None:
            lines.append(f"{d.name} default {d.bound_rule[0]} {d.bound_rule[1]}")
    lines.append("[moduli]")
    for d in sig.symbols():
        lines += [f"{d.name} {N} {e} -> {v}" for (N, e), v in sorted(d.moduli.items())]
        if d.modulus_rule is not None:
            lines.append(f"{d.name} default {d.modulus_rule}")
    lines.append("[grid]")
    lines.append("levels = " + " ".join(str(n) for n in sig.levels))
    lines.append("eps = " + " ".join(str(e) for e in sig.epsilons))
    return "\n".join(lines) + "\n"


def parse_signature(text: str) -> Signature:
    from .structfile import split_sections
    return parse_signature_sections(split_sections(text))
