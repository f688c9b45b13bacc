"""Split Weierstrass and Jacobi quartic models.

A :class:`SplitCurve` is ``y^2 = (x-e1)(x-e2)(x-e3)`` over Q (coordinates are
Fractions, or :class:`~qforge.arith.QuadExtElement` for points over a
quadratic field) or over F_p (coordinates are plain ints in ``[0, p)``).
Points are :class:`Point` tuples and the point at infinity is ``None``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import isqrt
from typing import Any, NamedTuple, Optional

import numpy as np
from sympy import factorint

from .arith import (
    QuadExtElement,
    conjugate,
    is_rational_square,
    lcm,
    legendre,
    rational_sqrt,
    residue_table,
    simplify,
    sqrt_mod,
)
from .errors import (
    BadReduction,
    InternalError,
    MapsToBasePointPair,
    MapsToInfinity,
    NotOnCurve,
    SingularCurve,
    SingularTranslate,
    TwoTorsionBasePoint,
    TwoTorsionInput,
)


class Point(NamedTuple):
    x: Any
    y: Any


class QuarticPoint(NamedTuple):
    u: Any
    v: Any


INFINITY = None
CurvePoint = Optional[Point]


def _fix(z):
    return simplify(z) if isinstance(z, QuadExtElement) else z


@dataclass(frozen=True)
class SplitCurve:
    """``y^2 = (x-e1)(x-e2)(x-e3)`` with pairwise distinct roots."""

    e1: Any
    e2: Any
    e3: Any
    p: Optional[int] = None

    def __post_init__(self):
        if self.p is None:
            roots = tuple(Fraction(e) for e in self.roots)
        else:
            roots = tuple(int(e) % self.p for e in self.roots)
        object.__setattr__(self, "e1", roots[0])
        object.__setattr__(self, "e2", roots[1])
        object.__setattr__(self, "e3", roots[2])
        if len(set(roots)) < 3:
            raise SingularCurve(f"roots {roots} are not distinct")

    @property
    def roots(self) -> tuple:
        return (self.e1, self.e2, self.e3)

    @property
    def a2(self):
        return self._n(-(self.e1 + self.e2 + self.e3))

    @property
    def a4(self):
        return self._n(self.e1 * self.e2 + self.e1 * self.e3 + self.e2 * self.e3)

    @property
    def a6(self):
        return self._n(-self.e1 * self.e2 * self.e3)

    def cubic_discriminant(self):
        e1, e2, e3 = self.roots
        return self._n(((e1 - e2) * (e1 - e3) * (e2 - e3)) ** 2)

    def _n(self, z):
        return z % self.p if self.p is not None else z

    def _div(self, a, b):
        if self.p is None:
            return a / b
        return a * pow(b, -1, self.p) % self.p

    def rhs(self, x):
        return self._n((x - self.e1) * (x - self.e2) * (x - self.e3))

    def contains(self, P: CurvePoint) -> bool:
        if P is None:
            return True
        x, y = P
        return self._n(y * y - self.rhs(x)) == 0

    def check(self, *points: CurvePoint) -> None:
        for P in points:
            if not self.contains(P):
                raise NotOnCurve(f"{P} is not on {self}")

    def neg(self, P: CurvePoint) -> CurvePoint:
        if P is None:
            return None
        return Point(P.x, self._n(-P.y))

    def add(self, P: CurvePoint, Q: CurvePoint) -> CurvePoint:
        if P is None:
            return Q
        if Q is None:
            return P
        x1, y1 = P
        x2, y2 = Q
        if self.p is not None:
            return self._add_mod(x1, y1, x2, y2)
        if x1 == x2:
            if y1 + y2 == 0:
                return None
            lam = (3 * x1 * x1 + 2 * self.a2 * x1 + self.a4) / (2 * y1)
        else:
            lam = (y2 - y1) / (x2 - x1)
        x3 = lam * lam - self.a2 - x1 - x2
        y3 = lam * (x1 - x3) - y1
        return Point(_fix(x3), _fix(y3))

    def _add_mod(self, x1, y1, x2, y2) -> CurvePoint:
        p = self.p
        if x1 == x2:
            if (y1 + y2) % p == 0:
                return None
            num = (3 * x1 * x1 + 2 * self.a2 * x1 + self.a4) % p
            lam = num * pow(2 * y1, -1, p) % p
        else:
            lam = (y2 - y1) * pow(x2 - x1, -1, p) % p
        x3 = (lam * lam - self.a2 - x1 - x2) % p
        return Point(x3, (lam * (x1 - x3) - y1) % p)

    def sub(self, P: CurvePoint, Q: CurvePoint) -> CurvePoint:
        return self.add(P, self.neg(Q))

    def mul(self, n: int, P: CurvePoint) -> CurvePoint:
        if n < 0:
            return self.mul(-n, self.neg(P))
        out: CurvePoint = None
        base = P
        while n:
            if n & 1:
                out = self.add(out, base)
            base = self.add(base, base)
            n >>= 1
        return out

    def reduce(self, p: int) -> "SplitCurve":
        """Reduction modulo an odd prime of good reduction."""
        if self.p is not None:
            raise ValueError("curve is already over a finite field")
        roots = []
        for e in self.roots:
            if Fraction(e).denominator % p == 0:
                raise BadReduction(f"root {e} is not {p}-integral")
            e = Fraction(e)
            roots.append(e.numerator * pow(e.denominator, -1, p) % p)
        if len(set(roots)) < 3:
            raise BadReduction(f"roots collide modulo {p}")
        return SplitCurve(*roots, p=p)

    def has_good_reduction(self, p: int) -> bool:
        try:
            self.reduce(p)
        except BadReduction:
            return False
        return True

    # finite-field helpers ---------------------------------------------------

    def points(self) -> list[CurvePoint]:
        """All F_p-points, infinity first."""
        p = self._require_fp()
        roots = {}
        for i in range((p >> 1) + 1):
            roots.setdefault(i * i % p, i)
        out: list[CurvePoint] = [None]
        for x in range(p):
            r = self.rhs(x)
            if r in roots:
                y = roots[r]
                out.append(Point(x, y))
                if y:
                    out.append(Point(x, p - y))
        return out

    def _require_fp(self) -> int:
        if self.p is None:
            raise ValueError("operation needs a curve over F_p")
        return self.p

    def __str__(self):
        field_ = "Q" if self.p is None else f"F_{self.p}"
        return f"y^2 = (x - {self.e1})(x - {self.e2})(x - {self.e3}) over {field_}"


@dataclass(frozen=True)
class QuarticCurve:
    """``v^2 = (u+c0)(u+c1)(u+c2)(u+c3)``.

    ``base``, ``x0`` and ``y0`` record the split curve and base point this
    model was derived from, so the point maps need no extra arguments.
    """

    c0: Any
    c1: Any
    c2: Any
    c3: Any
    p: Optional[int] = None
    base: Optional[SplitCurve] = field(default=None, compare=False)
    x0: Any = field(default=None, compare=False)
    y0: Any = field(default=None, compare=False)

    def __post_init__(self):
        cs = self.constants
        if self.p is None:
            cs = tuple(Fraction(c) for c in cs)
        else:
            cs = tuple(int(c) % self.p for c in cs)
        for name, c in zip(("c0", "c1", "c2", "c3"), cs):
            object.__setattr__(self, name, c)
        if len(set(cs)) < 4:
            raise SingularCurve(f"quartic constants {cs} are not distinct")

    @property
    def constants(self) -> tuple:
        return (self.c0, self.c1, self.c2, self.c3)

    def f(self, u):
        out = 1
        for c in self.constants:
            out = out * (u + c)
            if self.p is not None:
                out %= self.p
        return _fix(out)

    def contains(self, R: QuarticPoint) -> bool:
        u, v = R
        d = v * v - self.f(u)
        if self.p is not None:
            d %= self.p
        return d == 0


def _field_div(a, b, p):
    if p is None:
        return a / b
    return a * pow(b, -1, p) % p


def add(C: SplitCurve, P: CurvePoint, Q: CurvePoint) -> CurvePoint:
    C.check(P, Q)
    return C.add(P, Q)


def neg(C: SplitCurve, P: CurvePoint) -> CurvePoint:
    C.check(P)
    return C.neg(P)


def scalar_mul(C: SplitCurve, n: int, P: CurvePoint) -> CurvePoint:
    """n*P by double-and-add."""
    C.check(P)
    return C.mul(n, P)


# ---------------------------------------------------------------------------
# Weierstrass <-> quartic
# ---------------------------------------------------------------------------


def to_quartic(C: SplitCurve, P0: Point) -> QuarticCurve:
    """Quartic model attached to a base point with nonzero y.

    After moving P0 to x = 0 the roots become e_i' = e_i - x0 with
    y0^2 = -e1' e2' e3'; the quartic has c0 = 0 and c_i = 1/e_i'.
    """
    if P0 is None:
        raise TwoTorsionBasePoint("base point must be affine")
    x0, y0 = P0
    p = C.p
    if (y0 % p if p else y0) == 0:
        raise TwoTorsionBasePoint(f"base point {P0} has y = 0")
    shifted = [(e - x0) % p if p else e - x0 for e in C.roots]
    if any(s == 0 for s in shifted):
        raise SingularTranslate(f"x0 = {x0} is a root of the cubic")
    C.check(P0)
    lhs = y0 * y0
    rhs = -shifted[0] * shifted[1] * shifted[2]
    if (lhs - rhs) % p if p else lhs != rhs:
        raise InternalError("translated base point violates y0^2 = -e1'e2'e3'")
    cs = [_field_div(1, s, p) for s in shifted]
    return QuarticCurve(0, *cs, p=p, base=C, x0=x0, y0=y0)


def weierstrass_to_quartic_point(Q: QuarticCurve, P: CurvePoint) -> QuarticPoint:
    """u = -1/X, v = y/(y0 X^2) with X the translated x-coordinate."""
    _require_provenance(Q)
    if P is None:
        raise MapsToInfinity("the point at infinity has no affine image")
    p = Q.p
    X = (P.x - Q.x0) % p if p else P.x - Q.x0
    if X == 0:
        raise MapsToInfinity(f"{P} lies over the base point")
    u = _field_div(-1, X, p)
    v = _field_div(P.y, Q.y0 * X * X, p)
    if p is None:
        u, v = _fix(u), _fix(v)
    return QuarticPoint(u, v)


def quartic_to_weierstrass_point(Q: QuarticCurve, R: QuarticPoint) -> Point:
    """Inverse of :func:`weierstrass_to_quartic_point`: X = -1/u, y = v y0 X^2."""
    _require_provenance(Q)
    p = Q.p
    u, v = R
    if (u % p if p else u) == 0:
        raise MapsToBasePointPair("u = 0 is outside the affine chart")
    X = _field_div(-1, u, p)
    x = X + Q.x0
    y = v * Q.y0 * X * X
    if p is not None:
        return Point(x % p, y % p)
    return Point(_fix(x), _fix(y))


def _require_provenance(Q: QuarticCurve) -> None:
    if Q.base is None or Q.x0 is None:
        raise ValueError("quartic curve carries no Weierstrass provenance")


# ---------------------------------------------------------------------------
# Torsion and 2-divisibility over Q
# ---------------------------------------------------------------------------


def _integral_scaling(C: SplitCurve) -> int:
    D = 1
    for e in C.roots:
        D = lcm(D, Fraction(e).denominator)
    return D


def _cubic_integer_roots(A: int, B: int, Cc: int) -> list[int]:
    """Integer roots of X^3 + A X^2 + B X + Cc, found by exact bisection."""

    def h(x):
        return ((x + A) * x + B) * x + Cc

    M = 1 + max(abs(A), abs(B), abs(Cc))
    disc = A * A - 3 * B
    if disc < 0:
        segments = [(-M, M, 1)]
    else:
        s = isqrt(disc)
        t_ceil = s if s * s == disc else s + 1
        k1 = (-A - t_ceil) // 3
        k2 = -((A - t_ceil) // 3)
        segments = [(-M, k1, 1), (k1, k2, -1), (k2, M, 1)]
    found = set()
    for lo, hi, sign in segments:
        lo, hi = max(lo, -M), min(hi, M)
        if lo > hi:
            continue
        for x in (lo, hi):
            if h(x) == 0:
                found.add(x)
        a, b = lo, hi
        while b - a > 1:
            mid = (a + b) // 2
            if sign * h(mid) < 0:
                a = mid
            else:
                b = mid
        for x in (a, b):
            if h(x) == 0:
                found.add(x)
    return sorted(found)


def _square_divisors(n: int) -> list[int]:
    """All y > 0 with y^2 | n."""
    ys = [1]
    for q, e in factorint(abs(n)).items():
        ys = [y * q**k for y in ys for k in range(e // 2 + 1)]
    return sorted(ys)


def torsion_subgroup_Q(C: SplitCurve) -> list[CurvePoint]:
    """Rational torsion points by Lutz-Nagell, each verified by its multiples.

    The curve is scaled to an integral model Y^2 = g(X); candidates are the
    integral points with Y = 0 or Y^2 | disc(g).  A candidate is kept only if
    its multiples stay inside the candidate set until they hit infinity.
    """
    if C.p is not None:
        raise ValueError("torsion_subgroup_Q needs a curve over Q")
    D = _integral_scaling(C)
    E = [int(Fraction(e) * D * D) for e in C.roots]
    integral = SplitCurve(*E)
    disc = int(integral.cubic_discriminant())
    A, B, C0 = int(integral.a2), int(integral.a4), int(integral.a6)

    candidates: list[Point] = [Point(Fraction(e), Fraction(0)) for e in E]
    for y in _square_divisors(disc):
        for x in _cubic_integer_roots(A, B, C0 - y * y):
            candidates.append(Point(Fraction(x), Fraction(y)))
            candidates.append(Point(Fraction(x), Fraction(-y)))

    def admissible(R: Point) -> bool:
        if R.x.denominator != 1 or R.y.denominator != 1:
            return False
        return R.y == 0 or disc % (int(R.y) ** 2) == 0

    torsion: list[CurvePoint] = [None]
    for P in candidates:
        R: CurvePoint = P
        seen = set()
        while R is not None:
            if not admissible(R) or R in seen:
                break
            seen.add(R)
            R = integral.add(R, P)
        if R is None:
            torsion.append(P)
        elif R in seen:
            raise InternalError(f"multiples of {P} cycle without reaching infinity")
    s2, s3 = D * D, D * D * D
    out: list[CurvePoint] = [None]
    out += sorted({Point(P.x / s2, P.y / s3) for P in torsion if P is not None})
    return out


def is_torsion_Q(C: SplitCurve, P: CurvePoint, torsion: Optional[list] = None) -> bool:
    if torsion is None:
        torsion = torsion_subgroup_Q(C)
    return P in torsion


def is_double(C: SplitCurve, P: CurvePoint) -> bool:
    """True iff P = 2R for a point R defined over the base field.

    Uses the full 2-torsion criterion: every x(P) - e_i must be a square.
    """
    if P is None:
        return True
    C.check(P)
    if (P.y % C.p if C.p else P.y) == 0:
        raise TwoTorsionInput(f"{P} is a 2-torsion point")
    if C.p is None:
        return all(is_rational_square(P.x - e) for e in C.roots)
    return all(legendre(P.x - e, C.p) >= 0 for e in C.roots)


def halve(C: SplitCurve, P: Point) -> list[Point]:
    """All base-field R with 2R = P (empty when P is not a double)."""
    if C.p is not None:
        raise ValueError("halve is implemented over Q")
    rs = [rational_sqrt(P.x - e) for e in C.roots]
    if any(r is None for r in rs):
        return []
    halves = set()
    for s1 in (1, -1):
        for s2 in (1, -1):
            for s3 in (1, -1):
                r1, r2, r3 = s1 * rs[0], s2 * rs[1], s3 * rs[2]
                x = P.x + r1 * r2 + r1 * r3 + r2 * r3
                y = rational_sqrt(C.rhs(x))
                if y is None:
                    continue
                for R in (Point(x, y), Point(x, -y)):
                    if C.add(R, R) == P:
                        halves.add(R)
    return sorted(halves)


# ---------------------------------------------------------------------------
# Galois action on points over Q(sqrt d)
# ---------------------------------------------------------------------------


def conjugate_point(P: CurvePoint) -> CurvePoint:
    if P is None:
        return None
    return Point(_fix(conjugate(P.x)), _fix(conjugate(P.y)))


def trace_point(C: SplitCurve, P: CurvePoint) -> CurvePoint:
    """P + sigma(P) for the nontrivial automorphism of Q(sqrt d).

    The result is checked to be rational; anything else means the group law
    broke Galois equivariance.
    """
    C.check(P)
    T = C.add(P, conjugate_point(P))
    if T is None:
        return None
    x, y = _fix(T.x), _fix(T.y)
    if isinstance(x, QuadExtElement) or isinstance(y, QuadExtElement):
        raise InternalError(f"trace {T} is not rational")
    return Point(x, y)


# ---------------------------------------------------------------------------
# Point counting over F_p
# ---------------------------------------------------------------------------


def count_points(C: SplitCurve) -> int:
    """|E(F_p)| = p + 1 + sum_x chi(f(x))."""
    p = C._require_fp()
    if C.cubic_discriminant() % p == 0:
        raise BadReduction(f"singular modulo {p}")
    x = np.arange(p, dtype=np.int64)
    fx = (x - C.e1) % p
    fx = fx * ((x - C.e2) % p) % p
    fx = fx * ((x - C.e3) % p) % p
    qr = np.frombuffer(residue_table(p), dtype=np.uint8)
    residues = int(qr[fx].sum())
    zeros = int((fx == 0).sum())
    # each residue value gives two points, each root one
    return 1 + 2 * residues + zeros


def fp_point(C: SplitCurve, x: int) -> list[Point]:
    """The (zero, one or two) F_p-points with the given x-coordinate."""
    p = C._require_fp()
    r = C.rhs(x)
    if r == 0:
        return [Point(x % p, 0)]
    if legendre(r, p) != 1:
        return []
    y = sqrt_mod(r, p)
    return [Point(x % p, y), Point(x % p, p - y)]
