"""S-expression reader, formula parser and printer.

Abbreviations (``imp``, ``orI``, ``OrW``, ``forallSeq``) are expanded while
parsing, so only primitive nodes are ever stored.  Printing is single-line and
``parse(print(phi))`` reproduces ``phi`` for every canonical formula.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction

from .syntax import (
    INF, OPS, And, AndN, AndW, Apply, BoundSeq, ConvexCoeffs, CountableAnd, Embed,
    Exists, ExistsSeq, ExplicitList, Forall, IncreasingIntTuples, Infinity, Naturals,
    Not, NormGE, NormLE, Op, Or, RationalTuples, Rationals, RationalsGE1Inf, Ref,
    RelApp, RelGE, RelLE, RelLin, Scale, SeqAnd, Sum, SumRange, SyntaxErrorPB, Var,
    Zero, _as_int, is_literal, la_and, la_andw, la_forall_seq, la_imp, la_or, la_orw,
)

_RATIONAL = re.compile(r"^-?\d+(/\d+)?$")
_IDENT = re.compile(r"^[A-Za-z_][A-Za-z_']*$")
_SYMBOL = re.compile(r"^[A-Za-z_][A-Za-z0-9_']*$")   # symbols may carry digits (e1, f2)
_VAR = re.compile(r"^([A-Za-z_][A-Za-z_']*?)(\d*)$")
_RESERVED = {"le", "ge", "norm", "rel", "rlin", "and", "or", "And", "exists", "forall",
             "not", "existsSeq", "imp", "orI", "OrW", "forallSeq", "scale", "sum", "var",
             "const", "list", "then", "inf", "+"}


@dataclass
class Atom:
    text: str
    line: int
    col: int


@dataclass
class SList:
    items: list
    line: int
    col: int


def _err(node, msg):
    return SyntaxErrorPB(f"{node.line}:{node.col}: {msg}")


def read_sexprs(text: str) -> list:
    """Tokenize and read every top-level s-expression, tracking line/column."""
    stack: list[SList] = [SList([], 1, 1)]
    line, col, i, n = 1, 1, 0, len(text)
    while i < n:
        ch = text[i]
        if ch == ";":
            while i < n and text[i] != "\n":
                i += 1
            continue
        if ch == "\n":
            line, col, i = line + 1, 1, i + 1
            continue
        if ch.isspace():
            i += 1
            col += 1
            continue
        if ch == "(":
            stack.append(SList([], line, col))
            i += 1
            col += 1
            continue
        if ch == ")":
            if len(stack) == 1:
                raise SyntaxErrorPB(f"{line}:{col}: unbalanced ')'")
            done = stack.pop()
            stack[-1].items.append(done)
            i += 1
            col += 1
            continue
        j = i
        while j < n and not text[j].isspace() and text[j] not in "();":
            j += 1
        stack[-1].items.append(Atom(text[i:j], line, col))
        col += j - i
        i = j
    if len(stack) != 1:
        top = stack[-1]
        raise SyntaxErrorPB(f"{top.line}:{top.col}: '(' never closed")
    return stack[0].items


def _read_one(text: str):
    items = read_sexprs(text)
    if len(items) != 1:
        raise SyntaxErrorPB(f"1:1: expected exactly one expression, found {len(items)}")
    return items[0]


def _head(node):
    if isinstance(node, SList) and node.items and isinstance(node.items[0], Atom):
        return node.items[0].text
    return None


def _expect_len(node, k, what):
    if len(node.items) != k:
        raise _err(node, f"{what} takes {k - 1} arguments, got {len(node.items) - 1}")


def _ident(node, what="identifier"):
    if not isinstance(node, Atom) or not _IDENT.match(node.text) or node.text in _RESERVED:
        raise _err(node, f"expected {what}")
    return node.text


def _symbol(node, what):
    if not isinstance(node, Atom) or not _SYMBOL.match(node.text) or node.text in _RESERVED:
        raise _err(node, f"expected {what}")
    return node.text


class Parser:
    def __init__(self, sig=None):
        self.sig = sig

    # values -------------------------------------------------------------
    def value(self, node):
        if isinstance(node, Atom):
            t = node.text
            if t == "inf":
                return INF
            if _RATIONAL.match(t):
                try:
                    return Fraction(t)
                except ZeroDivisionError:
                    raise _err(node, "zero denominator") from None
            if _IDENT.match(t) and t not in _RESERVED:
                return Ref(t)
            raise _err(node, f"bad value {t!r}")
        head = _head(node)
        if head not in OPS:
            raise _err(node, f"unknown value operator {head!r}")
        args = tuple(self.value(a) for a in node.items[1:])
        try:
            if head == "tuple" and all(is_literal(a) for a in args):
                return args
            return Op(head, args)
        except SyntaxErrorPB as e:
            raise _err(node, str(e)) from None

    def rational(self, node):
        if not isinstance(node, Atom) or not _RATIONAL.match(node.text):
            raise _err(node, "expected a rational")
        return self.value(node)

    # terms --------------------------------------------------------------
    def term(self, node):
        if isinstance(node, Atom):
            t = node.text
            if t == "0":
                return Zero()
            m = _VAR.match(t)
            if not m or t in _RESERVED:
                raise _err(node, f"bad term {t!r}")
            name, digits = m.groups()
            if digits:
                idx = int(digits)
                if idx < 1:
                    raise _err(node, "variable index must be positive")
                return Var(name, idx)
            return Var(name, None)
        head = _head(node)
        if head is None:
            raise _err(node, "expected a term")
        args = node.items[1:]
        if head == "+":
            _expect_len(node, 3, "+")
            return Sum(self.term(args[0]), self.term(args[1]))
        if head == "scale":
            _expect_len(node, 3, "scale")
            return Scale(self.value(args[0]), self.term(args[1]))
        if head == "sum":
            _expect_len(node, 5, "sum")
            return SumRange(_ident(args[0], "binder"), self.value(args[1]),
                            self.value(args[2]), self.term(args[3]))
        if head == "var":
            _expect_len(node, 3, "var")
            idx = self.value(args[1])
            if is_literal(idx):
                idx = _as_int(idx)
            return Var(_ident(args[0], "variable family"), idx)
        if head in _RESERVED:
            raise _err(node, f"{head!r} cannot head a term")
        name = _symbol(node.items[0], "function symbol")
        terms = tuple(self.term(a) for a in args)
        self._check_fn(node, name, len(terms))
        return Apply(name, terms)

    def _check_fn(self, node, name, arity):
        if self.sig is None:
            return
        want = self.sig.function_arity(name)
        if want is None:
            raise _err(node, f"unknown function symbol {name!r}")
        if want != arity:
            raise _err(node, f"arity mismatch for {name}: expected {want}, got {arity}")

    def _check_rel(self, node, name, arity):
        if self.sig is None:
            return
        want = self.sig.relation_arity(name)
        if want is None:
            raise _err(node, f"unknown relation symbol {name!r}")
        if want != arity:
            raise _err(node, f"arity mismatch for {name}: expected {want}, got {arity}")

    def relapp(self, node):
        if _head(node) != "rel" or len(node.items) < 2:
            raise _err(node, "expected (rel R t ...)")
        name = _symbol(node.items[1], "relation symbol")
        args = tuple(self.term(a) for a in node.items[2:])
        self._check_rel(node, name, len(args))
        return RelApp(name, args)

    def relterm(self, node):
        if _head(node) == "rel":
            return self.relapp(node)
        rest = node.items[1:]
        if len(rest) % 2:
            raise _err(node, "rlin takes coefficient/relation pairs")
        return RelLin(tuple((self.value(rest[i]), self.relapp(rest[i + 1]))
                            for i in range(0, len(rest), 2)))

    # domains ------------------------------------------------------------
    def domain(self, node):
        if isinstance(node, Atom):
            kinds = {"Nat": Naturals, "Q": Rationals, "Qsharp": RationalsGE1Inf}
            if node.text in kinds:
                return kinds[node.text]()
            raise _err(node, f"unknown domain {node.text!r}")
        head = _head(node)
        if head == "list":
            if len(node.items) < 2:
                raise _err(node, "empty domain list")
            return ExplicitList(tuple(self.value(a) for a in node.items[1:]))
        kinds = {"CO": ConvexCoeffs, "V": IncreasingIntTuples, "Qtuple": RationalTuples}
        if head in kinds:
            _expect_len(node, 2, head)
            return kinds[head](self.value(node.items[1]))
        raise _err(node, f"unknown domain {head!r}")

    def boundspec(self, node):
        head = _head(node)
        if head == "const":
            _expect_len(node, 2, "const")
            r = self.value(node.items[1])
            self._nonneg(node, r)
            return BoundSeq((), r)
        if head == "list":
            items = node.items[1:]
            texts = [getattr(a, "text", None) for a in items]
            if "then" not in texts or texts.index("then") != len(items) - 2:
                raise _err(node, "expected (list r ... then r)")
            vals = [self.value(a) for a in items[:-2]] + [self.value(items[-1])]
            for v in vals:
                self._nonneg(node, v)
            return BoundSeq(tuple(vals[:-1]), vals[-1])
        raise _err(node, "expected a bound sequence (const r) or (list ... then r)")

    def _nonneg(self, node, r):
        if isinstance(r, Fraction) and r < 0:
            raise _err(node, f"negative quantifier bound {r}")

    # formulas -----------------------------------------------------------
    def _pb(self, node, phi):
        if not isinstance(phi, Embed):
            raise _err(node, "expected a positive bounded formula here")
        return phi.pb

    def _quant(self, node):
        _expect_len(node, 3, node.items[0].text)
        spec = node.items[1]
        if not isinstance(spec, SList) or len(spec.items) != 2:
            raise _err(spec, "expected (var bound)")
        var = self.term(spec.items[0])
        if not isinstance(var, Var):
            raise _err(spec, "quantified object must be a variable")
        return var, self.value(spec.items[1]), self.la(node.items[2])

    def la(self, node):
        if isinstance(node, Atom):
            raise _err(node, f"expected a formula, got {node.text!r}")
        head = _head(node)
        args = node.items[1:]
        if head in ("le", "ge"):
            _expect_len(node, 3, head)
            lhs, bound = args[0], self.value(args[1])
            kind = _head(lhs)
            if kind == "norm":
                _expect_len(lhs, 2, "norm")
                t = self.term(lhs.items[1])
                return Embed((NormLE if head == "le" else NormGE)(t, bound))
            if kind in ("rel", "rlin"):
                r = self.relterm(lhs)
                return Embed((RelLE if head == "le" else RelGE)(r, bound))
            raise _err(lhs, "expected (norm t), (rel ...) or (rlin ...)")
        if head == "and":
            return la_and([self.la(a) for a in args])
        if head == "or":
            return Embed(Or(tuple(self._pb(a, self.la(a)) for a in args)))
        if head in ("And", "OrW"):
            _expect_len(node, 4, head)
            binder = _ident(args[0], "binder")
            dom = self.domain(args[1])
            body = self.la(args[2])
            return la_andw(binder, dom, body) if head == "And" else la_orw(binder, dom, body)
        if head == "exists":
            var, bound, body = self._quant(node)
            self._nonneg(node, bound)
            return Embed(Exists(var, bound, self._pb(node.items[2], body)))
        if head == "forall":
            # negative bounds are legal here: approximations produce them (empty ball)
            var, bound, body = self._quant(node)
            return Embed(Forall(var, bound, self._pb(node.items[2], body)))
        if head == "not":
            _expect_len(node, 2, "not")
            return Not(self.la(args[0]))
        if head in ("existsSeq", "forallSeq"):
            _expect_len(node, 4, head)
            fam = _ident(args[0], "variable family")
            b = self.boundspec(args[1])
            body = self.la(args[2])
            return ExistsSeq(fam, b, body) if head == "existsSeq" else la_forall_seq(fam, b, body)
        if head == "imp":
            _expect_len(node, 3, "imp")
            return la_imp(self.la(args[0]), self.la(args[1]))
        if head == "orI":
            _expect_len(node, 3, "orI")
            return la_or(self.la(args[0]), self.la(args[1]))
        raise _err(node, f"unknown formula constructor {head!r}")


def parse_formula(text: str, sig=None):
    """Parse an LA formula (a bare PB formula comes back wrapped in Embed)."""
    return Parser(sig).la(_read_one(text))


def parse_pb(text: str, sig=None):
    phi = parse_formula(text, sig)
    if not isinstance(phi, Embed):
        raise SyntaxErrorPB("1:1: expected a positive bounded formula")
    return phi.pb


def parse_term(text: str, sig=None):
    return Parser(sig).term(_read_one(text))


def parse_value(text: str):
    return Parser().value(_read_one(text))


def parse_domain(text: str):
    return Parser().domain(_read_one(text))


# ---------------------------------------------------------------------------
# printing


def fmt_value(v) -> str:
    if isinstance(v, Fraction):
        return str(v)
    if isinstance(v, bool):
        raise TypeError("booleans are not values")
    if isinstance(v, int):
        return str(v)
    if isinstance(v, Infinity):
        return "inf"
    if isinstance(v, Ref):
        return v.name
    if isinstance(v, tuple):
        return "(tuple" + "".join(" " + fmt_value(x) for x in v) + ")"
    if isinstance(v, Op):
        return f"({v.op}" + "".join(" " + fmt_value(x) for x in v.args) + ")"
    raise TypeError(f"not a value: {v!r}")


def fmt_term(t) -> str:
    if isinstance(t, Var):
        if t.index is None:
            return t.name
        if isinstance(t.index, int):
            return f"{t.name}{t.index}"
        return f"(var {t.name} {fmt_value(t.index)})"
    if isinstance(t, Zero):
        return "0"
    if isinstance(t, Sum):
        return f"(+ {fmt_term(t.left)} {fmt_term(t.right)})"
    if isinstance(t, Scale):
        return f"(scale {fmt_value(t.coeff)} {fmt_term(t.arg)})"
    if isinstance(t, Apply):
        return f"({t.symbol}" + "".join(" " + fmt_term(a) for a in t.args) + ")"
    if isinstance(t, SumRange):
        return (f"(sum {t.binder} {fmt_value(t.lo)} {fmt_value(t.hi)} "
                f"{fmt_term(t.body)})")
    raise TypeError(f"not a term: {t!r}")


def _fmt_relapp(r):
    return f"(rel {r.symbol}" + "".join(" " + fmt_term(a) for a in r.args) + ")"


def fmt_rel(r) -> str:
    if isinstance(r, RelApp):
        return _fmt_relapp(r)
    return "(rlin" + "".join(f" {fmt_value(c)} {_fmt_relapp(a)}" for c, a in r.items) + ")"


def fmt_domain(d) -> str:
    if isinstance(d, Naturals):
        return "Nat"
    if isinstance(d, Rationals):
        return "Q"
    if isinstance(d, RationalsGE1Inf):
        return "Qsharp"
    if isinstance(d, ConvexCoeffs):
        return f"(CO {fmt_value(d.s)})"
    if isinstance(d, IncreasingIntTuples):
        return f"(V {fmt_value(d.n)})"
    if isinstance(d, RationalTuples):
        return f"(Qtuple {fmt_value(d.k)})"
    if isinstance(d, ExplicitList):
        return "(list" + "".join(" " + fmt_value(x) for x in d.items) + ")"
    raise TypeError(f"not a domain: {d!r}")


def fmt_bounds(b: BoundSeq) -> str:
    if not b.prefix:
        return f"(const {fmt_value(b.tail)})"
    return "(list" + "".join(" " + fmt_value(x) for x in b.prefix) + f" then {fmt_value(b.tail)})"


def print_formula(phi) -> str:
    if isinstance(phi, NormLE | NormGE):
        op = "le" if isinstance(phi, NormLE) else "ge"
        return f"({op} (norm {fmt_term(phi.term)}) {fmt_value(phi.bound)})"
    if isinstance(phi, RelLE | RelGE):
        op = "le" if isinstance(phi, RelLE) else "ge"
        return f"({op} {fmt_rel(phi.rel)} {fmt_value(phi.bound)})"
    if isinstance(phi, And | AndN):
        return "(and" + "".join(" " + print_formula(p) for p in phi.parts) + ")"
    if isinstance(phi, Or):
        return "(or" + "".join(" " + print_formula(p) for p in phi.parts) + ")"
    if isinstance(phi, CountableAnd | AndW):
        return f"(And {phi.binder} {fmt_domain(phi.domain)} {print_formula(phi.body)})"
    if isinstance(phi, Exists | Forall):
        q = "exists" if isinstance(phi, Exists) else "forall"
        return f"({q} ({fmt_term(phi.var)} {fmt_value(phi.bound)}) {print_formula(phi.body)})"
    if isinstance(phi, Embed):
        return print_formula(phi.pb)
    if isinstance(phi, Not):
        return f"(not {print_formula(phi.body)})"
    if isinstance(phi, ExistsSeq):
        return f"(existsSeq {phi.family} {fmt_bounds(phi.bounds)} {print_formula(phi.body)})"
    if isinstance(phi, SeqAnd):
        raise TypeError("lazy conjunctions cannot be printed; approximate or truncate first")
    raise TypeError(f"not a formula: {phi!r}")
