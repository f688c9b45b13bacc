"""Exact arithmetic over Q, F_p and Q(sqrt d), plus square classes.

Rationals are :class:`fractions.Fraction` throughout; nothing in the package
touches floating point.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import gcd, isqrt
from typing import Optional, Union

from sympy import factorint, isprime

from .errors import DegenerateColor, NotASquare

Rational = Fraction
RationalLike = Union[int, Fraction]

MAX_MODULUS = 1 << 63


def as_rational(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, QuadExtElement):
        return x.to_rational()
    return Fraction(x)


# ---------------------------------------------------------------------------
# Square classes
# ---------------------------------------------------------------------------


@lru_cache(maxsize=1 << 16)
def squarefree_int(n: int) -> int:
    """Signed squarefree kernel of a nonzero integer: 12 -> 3, -8 -> -2."""
    if n == 0:
        raise DegenerateColor("zero has no square class")
    sign = -1 if n < 0 else 1
    n = abs(n)
    # cheap exits before handing off to the factoriser
    r = isqrt(n)
    if r * r == n:
        return sign
    core = 1
    for q, e in factorint(n).items():
        if e & 1:
            core *= q
    return sign * core


@dataclass(frozen=True)
class SquareClass:
    """An element of F^x / (F^x)^2.

    Over Q (``modulus is None``) ``rep`` is a signed squarefree integer and
    1 is the trivial class.  Over F_p ``rep`` is the Legendre symbol, +1
    for residues and -1 for non-residues.
    """

    rep: int
    modulus: Optional[int] = None

    def __mul__(self, other: "SquareClass") -> "SquareClass":
        if self.modulus != other.modulus:
            raise ValueError("square classes over different fields")
        if self.modulus is None:
            return SquareClass(squarefree_int(self.rep * other.rep))
        return SquareClass(self.rep * other.rep, self.modulus)

    @property
    def is_trivial(self) -> bool:
        return self.rep == 1

    @property
    def is_residue(self) -> bool:
        return self.rep == 1

    def __str__(self) -> str:
        if self.modulus is None:
            return str(self.rep)
        return "QR" if self.rep == 1 else "non-QR"


def squarefree_part(r: RationalLike) -> SquareClass:
    """Class of a nonzero rational in Q^x/(Q^x)^2.

    The representative s satisfies r = s * q^2 and has the sign of r.
    """
    r = Fraction(r)
    if r == 0:
        raise DegenerateColor("zero has no square class")
    # r = n/d = n*d / d^2
    return SquareClass(squarefree_int(r.numerator * r.denominator))


def rational_sqrt(r: RationalLike) -> Optional[Fraction]:
    """Nonnegative square root of r when r is a rational square, else None."""
    r = Fraction(r)
    if r < 0:
        return None
    n, d = r.numerator, r.denominator
    a, b = isqrt(n), isqrt(d)
    if a * a == n and b * b == d:
        return Fraction(a, b)
    return None


def is_rational_square(r: RationalLike) -> bool:
    return rational_sqrt(r) is not None


def rational_sqrt_class(r: RationalLike) -> tuple[int, Fraction]:
    """Write r = d * s^2 with d squarefree and s > 0."""
    r = Fraction(r)
    if r == 0:
        raise DegenerateColor("zero has no square class")
    d = squarefree_part(r).rep
    s = rational_sqrt(r / d)
    assert s is not None
    return d, s


# ---------------------------------------------------------------------------
# Prime fields
# ---------------------------------------------------------------------------


@lru_cache(maxsize=4096)
def check_modulus(p: int) -> int:
    if not (2 < p < MAX_MODULUS) or not isprime(p):
        raise ValueError(f"modulus must be an odd prime below 2^63, got {p}")
    return p


@dataclass(frozen=True)
class FpElement:
    value: int
    p: int

    def __post_init__(self):
        check_modulus(self.p)
        if not 0 <= self.value < self.p:
            object.__setattr__(self, "value", self.value % self.p)

    @classmethod
    def of(cls, x, p: int) -> "FpElement":
        """Reduce an int or a p-integral rational modulo p."""
        x = Fraction(x)
        if x.denominator % p == 0:
            raise ZeroDivisionError(f"{x} is not p-integral for p={p}")
        return cls(x.numerator * pow(x.denominator, -1, p) % p, p)

    def _coerce(self, other) -> int:
        if isinstance(other, FpElement):
            if other.p != self.p:
                raise ValueError("mixed moduli")
            return other.value
        if isinstance(other, int):
            return other % self.p
        return NotImplemented

    def __add__(self, other):
        o = self._coerce(other)
        return FpElement((self.value + o) % self.p, self.p)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        return FpElement((self.value - o) % self.p, self.p)

    def __rsub__(self, other):
        o = self._coerce(other)
        return FpElement((o - self.value) % self.p, self.p)

    def __mul__(self, other):
        o = self._coerce(other)
        return FpElement(self.value * o % self.p, self.p)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        return FpElement(self.value * pow(o, -1, self.p) % self.p, self.p)

    def __rtruediv__(self, other):
        o = self._coerce(other)
        return FpElement(o * pow(self.value, -1, self.p) % self.p, self.p)

    def __neg__(self):
        return FpElement(-self.value % self.p, self.p)

    def __pow__(self, n: int):
        return FpElement(pow(self.value, n, self.p), self.p)

    def __eq__(self, other):
        if isinstance(other, FpElement):
            return self.p == other.p and self.value == other.value
        if isinstance(other, int):
            return self.value == other % self.p
        return NotImplemented

    def __hash__(self):
        return hash((self.value, self.p))

    def __int__(self):
        return self.value

    def __repr__(self):
        return f"{self.value} mod {self.p}"


def legendre(a: int, p: int) -> int:
    a %= p
    if a == 0:
        return 0
    return 1 if pow(a, (p - 1) >> 1, p) == 1 else -1


def fp_square_class(x: FpElement) -> SquareClass:
    if x.value == 0:
        raise DegenerateColor("zero has no square class")
    return SquareClass(legendre(x.value, x.p), x.p)


def sqrt_mod(a: int, p: int) -> int:
    """Canonical square root of a mod p: the root in [0, (p-1)/2].

    Tonelli-Shanks; raises NotASquare for non-residues.
    """
    a %= p
    if a == 0:
        return 0
    if pow(a, (p - 1) >> 1, p) != 1:
        raise NotASquare(f"{a} is not a square mod {p}")
    if p & 3 == 3:
        r = pow(a, (p + 1) >> 2, p)
    else:
        q, s = p - 1, 0
        while not q & 1:
            q >>= 1
            s += 1
        z = 2
        while pow(z, (p - 1) >> 1, p) != p - 1:
            z += 1
        m, c, t, r = s, pow(z, q, p), pow(a, q, p), pow(a, (q + 1) >> 1, p)
        while t != 1:
            i, t2 = 0, t
            while t2 != 1:
                t2 = t2 * t2 % p
                i += 1
            b = pow(c, 1 << (m - i - 1), p)
            m, c = i, b * b % p
            t, r = t * c % p, r * b % p
    return min(r, p - r)


def fp_sqrt(x: FpElement) -> FpElement:
    return FpElement(sqrt_mod(x.value, x.p), x.p)


@lru_cache(maxsize=64)
def residue_table(p: int) -> bytes:
    """Byte i is 1 when i is a nonzero square mod p."""
    table = bytearray(p)
    for i in range(1, (p >> 1) + 1):
        table[i * i % p] = 1
    return bytes(table)


# ---------------------------------------------------------------------------
# Q(sqrt d)
# ---------------------------------------------------------------------------


class QuadExtElement:
    """a + b*sqrt(d) with a, b rational and d squarefree, d != 0, 1."""

    __slots__ = ("a", "b", "d")

    def __init__(self, a: RationalLike, b: RationalLike, d: int):
        if d in (0, 1) or squarefree_int(d) != d:
            raise ValueError(f"d must be squarefree and not 0 or 1, got {d}")
        self.a = Fraction(a)
        self.b = Fraction(b)
        self.d = d

    def _coerce(self, other) -> "QuadExtElement":
        if isinstance(other, QuadExtElement):
            if other.d != self.d:
                raise ValueError(f"mixed extensions Q(sqrt {self.d}) and Q(sqrt {other.d})")
            return other
        if isinstance(other, (int, Fraction)):
            return QuadExtElement(other, 0, self.d)
        return NotImplemented

    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return QuadExtElement(self.a + o.a, self.b + o.b, self.d)

    __radd__ = __add__

    def __neg__(self):
        return QuadExtElement(-self.a, -self.b, self.d)

    def __sub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return QuadExtElement(self.a - o.a, self.b - o.b, self.d)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return QuadExtElement(
            self.a * o.a + self.d * self.b * o.b, self.a * o.b + self.b * o.a, self.d
        )

    __rmul__ = __mul__

    def norm(self) -> Fraction:
        return self.a * self.a - self.d * self.b * self.b

    def conjugate(self) -> "QuadExtElement":
        return QuadExtElement(self.a, -self.b, self.d)

    def inverse(self) -> "QuadExtElement":
        n = self.norm()
        if n == 0:
            raise ZeroDivisionError("division by zero in Q(sqrt d)")
        return QuadExtElement(self.a / n, -self.b / n, self.d)

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return self * o.inverse()

    def __rtruediv__(self, other):
        return self._coerce(other) * self.inverse()

    def __pow__(self, n: int):
        if n < 0:
            return self.inverse() ** (-n)
        out = QuadExtElement(1, 0, self.d)
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    @property
    def is_rational(self) -> bool:
        return self.b == 0

    def to_rational(self) -> Fraction:
        if self.b != 0:
            raise ValueError(f"{self} is not rational")
        return self.a

    def __eq__(self, other):
        if isinstance(other, QuadExtElement):
            return (self.a, self.b) == (other.a, other.b) and (self.d == other.d or self.b == 0)
        if isinstance(other, (int, Fraction)):
            return self.b == 0 and self.a == other
        return NotImplemented

    def __hash__(self):
        if self.b == 0:
            return hash(self.a)
        return hash((self.a, self.b, self.d))

    def __repr__(self):
        return f"({self.a} + {self.b}*sqrt({self.d}))"


def conjugate(z):
    """Galois conjugation, the identity on rationals."""
    if isinstance(z, QuadExtElement):
        return z.conjugate()
    return z


def simplify(z):
    """Drop a vanishing sqrt(d) part so rational values come back as Fractions."""
    if isinstance(z, QuadExtElement) and z.b == 0:
        return z.a
    return z


def sqrt_in_extension(r: RationalLike, d: int = 1):
    """Square root of a rational inside Q(sqrt d), or None.

    ``d = 1`` means Q itself.  The result is a Fraction when the root is
    rational and a QuadExtElement ``s*sqrt(d)`` otherwise.
    """
    r = Fraction(r)
    s = rational_sqrt(r)
    if s is not None:
        return s
    if d == 1:
        return None
    s = rational_sqrt(r / d)
    if s is None:
        return None
    return QuadExtElement(0, s, d)


def is_square_in_extension(a: RationalLike, b: RationalLike, d: int) -> bool:
    """Decide whether a + b*sqrt(d) is a square in Q(sqrt d).

    If (x + y sqrt d)^2 = a + b sqrt d then x^2 - d y^2 = +-sqrt(norm) and
    x^2 = (a +- sqrt(norm))/2, which gives a finite exact test.
    """
    a, b = Fraction(a), Fraction(b)
    if b == 0:
        return is_rational_square(a) or (d != 1 and is_rational_square(a / d))
    n = rational_sqrt(a * a - d * b * b)
    if n is None:
        return False
    for t in (n, -n):
        x = rational_sqrt((a + t) / 2)
        if x:
            return True
    return False


def lcm(a: int, b: int) -> int:
    return a // gcd(a, b) * b
