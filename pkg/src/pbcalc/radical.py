"""Exact nonnegative radicals ``base ** (1/root)`` with rational base.

Every comparison here is an integer computation.  Radicals of rationals are
closed under multiplication and division (bring both to a common root), which
is all the norm machinery needs; sums are handled by :class:`Shifted`, a
radical plus a rational offset.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import IntEnum
from fractions import Fraction
from math import gcd


class Cmp(IntEnum):
    LT = -1
    EQ = 0
    GT = 1


def iroot(n: int, k: int) -> int:
    """Largest integer r with r**k <= n (n >= 0, k >= 1)."""
    if n < 0:
        raise ValueError("iroot of a negative number")
    if n < 2 or k == 1:
        return n
    r = 1 << -(-n.bit_length() // k)
    while True:
        nxt = ((k - 1) * r + n // r ** (k - 1)) // k
        if nxt >= r:
            break
        r = nxt
    while r ** k > n:
        r -= 1
    while (r + 1) ** k <= n:
        r += 1
    return r


def exact_root(q: Fraction, k: int) -> Fraction | None:
    """``q ** (1/k)`` if it is rational, else None."""
    if q < 0:
        return None
    a, b = iroot(q.numerator, k), iroot(q.denominator, k)
    if a ** k == q.numerator and b ** k == q.denominator:
        return Fraction(a, b)
    return None


@dataclass(frozen=True)
class RadicalValue:
    base: Fraction
    root: int = 1

    def __post_init__(self):
        object.__setattr__(self, "base", Fraction(self.base))
        if self.base < 0:
            raise ValueError("radical base must be nonnegative")
        if self.root < 1:
            raise ValueError("radical root must be positive")
        # canonical form: the smallest root that represents the value
        d = 2
        while d <= self.root:
            if self.root % d == 0:
                r = exact_root(self.base, d)
                if r is not None:
                    object.__setattr__(self, "base", r)
                    object.__setattr__(self, "root", self.root // d)
                    continue
            d += 1

    @classmethod
    def of(cls, q: Fraction) -> "RadicalValue":
        return cls(Fraction(q), 1)

    def rational(self) -> Fraction | None:
        return exact_root(self.base, self.root)

    def to_root(self, k: int) -> Fraction:
        """Base of the same value written with root ``k`` (a multiple of root)."""
        if k % self.root:
            raise ValueError("target root must be a multiple")
        return self.base ** (k // self.root)

    def __mul__(self, other):
        if isinstance(other, RadicalValue):
            k = self.root * other.root // gcd(self.root, other.root)
            return RadicalValue(self.to_root(k) * other.to_root(k), k)
        q = Fraction(other)
        if q < 0:
            raise ValueError("radicals only scale by nonnegative rationals")
        return RadicalValue(self.base * q ** self.root, self.root)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, RadicalValue):
            if other.base == 0:
                raise ZeroDivisionError("division by a zero radical")
            k = self.root * other.root // gcd(self.root, other.root)
            return RadicalValue(self.to_root(k) / other.to_root(k), k)
        return self * (1 / Fraction(other))

    def bracket(self, bits: int) -> tuple[Fraction, Fraction]:
        """Rationals lo <= value < hi with hi - lo = 2**-bits."""
        scaled = self.base * (1 << (bits * self.root))
        low = iroot(scaled.numerator // scaled.denominator, self.root)
        return Fraction(low, 1 << bits), Fraction(low + 1, 1 << bits)

    def __str__(self):
        if self.root == 1:
            return str(self.base)
        return f"{self.base}^(1/{self.root})"


def compare_radicals(a: RadicalValue, b: RadicalValue) -> Cmp:
    k = a.root * b.root // gcd(a.root, b.root)
    x, y = a.to_root(k), b.to_root(k)
    return Cmp((x > y) - (x < y))


def compare_radical(v: RadicalValue, q) -> Cmp:
    """Three-way comparison of a radical against a rational (or radical)."""
    if isinstance(q, RadicalValue):
        return compare_radicals(v, q)
    q = Fraction(q)
    if q < 0:
        return Cmp.GT
    x, y = v.base, q ** v.root
    return Cmp((x > y) - (x < y))


@dataclass(frozen=True)
class Shifted:
    """The real number ``rad + shift``."""
    rad: RadicalValue
    shift: Fraction

    def __str__(self):
        return f"{self.rad} + {self.shift}"


Real = Fraction | RadicalValue | Shifted


def as_shifted(x) -> Shifted:
    if isinstance(x, Shifted):
        return x
    if isinstance(x, RadicalValue):
        return Shifted(x, Fraction(0))
    return Shifted(RadicalValue(Fraction(0)), Fraction(x))


def simplify_real(x):
    """Collapse to a Fraction whenever the value is rational."""
    s = as_shifted(x)
    r = s.rad.rational()
    if r is not None:
        return r + s.shift
    if s.shift == 0:
        return s.rad
    return s


def add_real(x, q: Fraction):
    s = as_shifted(x)
    return simplify_real(Shifted(s.rad, s.shift + Fraction(q)))


def scale_real(x, q: Fraction):
    q = Fraction(q)
    s = as_shifted(x)
    if q < 0:
        if s.rad.rational() is None:
            raise ValueError("negative multiple of an irrational radical")
        return (s.rad.rational() + s.shift) * q
    return simplify_real(Shifted(s.rad * q, s.shift * q))


_MAX_BITS = 1 << 16


def _sign_gap(x: RadicalValue, r: RadicalValue, q: Fraction) -> int:
    """Sign of ``x - r - q``."""
    xr, rr = x.rational(), r.rational()
    if xr is not None and rr is not None:
        d = xr - rr - q
        return (d > 0) - (d < 0)
    if q == 0:
        return int(compare_radicals(x, r))
    if xr is not None:
        a = xr - q
        if a < 0:
            return -1
        return -int(compare_radical(r, a))
    if rr is not None:
        return int(compare_radical(x, rr + q))
    # Both irrational and q != 0: x - r = q is impossible (real radicals of
    # rationals that are not rational multiples of each other are linearly
    # independent over Q together with 1), so bisection terminates.
    bits = 8
    while bits <= _MAX_BITS:
        xl, xh = x.bracket(bits)
        rl, rh = r.bracket(bits)
        if xl - rh - q > 0:
            return 1
        if xh - rl - q < 0:
            return -1
        bits *= 2
    raise ArithmeticError("radical comparison did not separate")


def compare_real(a, b) -> Cmp:
    """Exact three-way comparison of two values of type :data:`Real`."""
    if isinstance(a, Fraction | int) and isinstance(b, Fraction | int):
        return Cmp((a > b) - (a < b))
    sa, sb = as_shifted(a), as_shifted(b)
    return Cmp(_sign_gap(sa.rad, sb.rad, sb.shift - sa.shift))
