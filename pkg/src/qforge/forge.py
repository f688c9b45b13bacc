"""Points from monochromatic combinatorial lines.

The coloring of ``{0,1,2,3}^N`` sends ``(i_1..i_N)`` to the square class of
``l + sum_j b_j c_{i_j}``.  Along a combinatorial line ``{v + k w}`` the four
values are ``s_w (u + c_k)`` with ``u = (l + r_v) / s_w``, so a monochromatic
line makes ``f(u) = prod_k (u + c_k)`` a square and yields a point ``(u, +-v)``
on the quartic model.
"""
from __future__ import annotations

import logging
import random
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations, product
from math import isqrt
from typing import Any, Iterable, Iterator, Optional, Sequence

from .arith import (
    SquareClass,
    legendre,
    lcm,
    residue_table,
    sqrt_in_extension,
    sqrt_mod,
    squarefree_int,
    squarefree_part,
)
from .curves import (
    Point,
    QuarticCurve,
    QuarticPoint,
    SplitCurve,
    quartic_to_weierstrass_point,
    to_quartic,
    trace_point,
)
from .errors import DegenerateColor, InvalidColoring, TwoTorsionHit

log = logging.getLogger(__name__)

LETTERS = 4


def _zero_subsum(b: Sequence, p: Optional[int]) -> bool:
    """True when some non-empty subsequence of b sums to zero."""
    sums: set = set()
    for x in b:
        new = {x % p if p else x}
        new.update((s + x) % p if p else s + x for s in sums)
        if 0 in new:
            return True
        sums |= new
    return False


@dataclass(frozen=True)
class ColoringSpec:
    """Data (l, b_1..b_N, c_0..c_3) of the coloring.

    ``p`` selects F_p (None means Q).  Over Q, ``ext = d`` colors by square
    classes of Q(sqrt d), i.e. two rationals share a color when their ratio
    lies in Q^2 or d*Q^2; ``ext = 1`` is plain Q.
    """

    l: Any
    b: tuple
    c: tuple
    p: Optional[int] = None
    ext: int = 1

    def __post_init__(self):
        norm = (lambda z: int(z) % self.p) if self.p else Fraction
        object.__setattr__(self, "l", norm(self.l))
        object.__setattr__(self, "b", tuple(norm(x) for x in self.b))
        object.__setattr__(self, "c", tuple(norm(x) for x in self.c))
        if len(self.b) < 1:
            raise InvalidColoring("need N >= 1")
        if len(self.c) != LETTERS or len(set(self.c)) != LETTERS:
            raise InvalidColoring(f"need four distinct constants, got {self.c}")
        if any(x == 0 for x in self.b):
            raise InvalidColoring("b_j must be nonzero")
        if _zero_subsum(self.b, self.p):
            raise InvalidColoring(f"a subsequence of {self.b} sums to zero")
        if self.p is not None and self.ext != 1:
            raise InvalidColoring("extensions are only meaningful over Q")
        if self.ext != 1 and squarefree_int(self.ext) != self.ext:
            raise InvalidColoring(f"ext must be squarefree, got {self.ext}")

    @property
    def N(self) -> int:
        return len(self.b)

    def prefix(self, n: int) -> "ColoringSpec":
        return ColoringSpec(self.l, self.b[:n], self.c, self.p, self.ext)

    def value(self, point: Sequence[int]):
        if len(point) != self.N or any(not 0 <= i < LETTERS for i in point):
            raise ValueError(f"{point} is not in Z^{self.N}")
        out = self.l + sum(bj * self.c[i] for bj, i in zip(self.b, point))
        return out % self.p if self.p else out

    def to_dict(self) -> dict:
        return {"l": str(self.l), "b": [str(x) for x in self.b], "N": self.N}


@dataclass(frozen=True, order=True)
class CombinatorialLine:
    """``{v, v+w, v+2w, v+3w}`` with ``w`` a nonzero 0/1 vector and v = 0 on w."""

    v: tuple
    w: tuple

    def __post_init__(self):
        if len(self.v) != len(self.w):
            raise ValueError("v and w must have the same length")
        if not any(self.w) or any(x not in (0, 1) for x in self.w):
            raise ValueError(f"w = {self.w} must be a nonzero 0/1 vector")
        if any(vi != 0 for vi, wi in zip(self.v, self.w) if wi):
            raise ValueError("v must vanish where w = 1")
        if any(not 0 <= vi < LETTERS for vi in self.v):
            raise ValueError(f"v = {self.v} is not in Z^N")

    def points(self) -> list[tuple]:
        return [tuple(vi + k * wi for vi, wi in zip(self.v, self.w)) for k in range(LETTERS)]

    def order_key(self) -> tuple:
        """Enumeration order: |w|, then support of w, then v off the support."""
        support = tuple(j for j, wi in enumerate(self.w) if wi)
        free = tuple(vi for vi, wi in zip(self.v, self.w) if not wi)
        return (len(support), support, free)

    def to_dict(self) -> dict:
        return {"v": list(self.v), "w": list(self.w)}


def iter_lines(N: int) -> Iterator[CombinatorialLine]:
    """All 5^N - 4^N lines of Z^N in canonical order."""
    for k in range(1, N + 1):
        for support in combinations(range(N), k):
            free = [j for j in range(N) if j not in support]
            w = tuple(1 if j in support else 0 for j in range(N))
            for digits in product(range(LETTERS), repeat=len(free)):
                v = [0] * N
                for j, d in zip(free, digits):
                    v[j] = d
                yield CombinatorialLine(tuple(v), w)


def xi_eval(spec: ColoringSpec, point: Sequence[int]) -> SquareClass:
    """Color of a point of Z^N."""
    value = spec.value(point)
    if value == 0:
        raise DegenerateColor(f"coloring vanishes at {tuple(point)}; move l")
    if spec.p is not None:
        return SquareClass(legendre(value, spec.p), spec.p)
    cls = squarefree_part(value)
    if spec.ext == 1:
        return cls
    # Q(sqrt d) collapses s and s*d; keep the representative of least size
    other = squarefree_int(cls.rep * spec.ext)
    return SquareClass(min(cls.rep, other, key=lambda s: (abs(s), s < 0)))


def r_v(spec: ColoringSpec, line: CombinatorialLine):
    out = sum(bj * spec.c[vj] for bj, vj, wj in zip(spec.b, line.v, line.w) if not wj)
    return out % spec.p if spec.p else out


def s_w(spec: ColoringSpec, line: CombinatorialLine):
    out = sum(bj for bj, wj in zip(spec.b, line.w) if wj)
    return out % spec.p if spec.p else out


def line_values(spec: ColoringSpec, line: CombinatorialLine) -> tuple:
    """``l + r_v + s_w c_k`` for k = 0..3."""
    if len(line.v) != spec.N:
        raise ValueError(f"line has length {len(line.v)}, coloring has N = {spec.N}")
    base = spec.l + r_v(spec, line)
    s = s_w(spec, line)
    vals = tuple(base + s * ck for ck in spec.c)
    if spec.p:
        vals = tuple(x % spec.p for x in vals)
    return vals


def is_monochromatic(spec: ColoringSpec, line: CombinatorialLine) -> bool:
    vals = line_values(spec, line)
    if any(x == 0 for x in vals):
        return False
    return _same_class(vals, spec.p, spec.ext)


def _same_class(vals: Sequence, p: Optional[int], ext: int) -> bool:
    if p is not None:
        first = legendre(vals[0], p)
        return all(legendre(x, p) == first for x in vals[1:])
    # x and y share a class iff x*y is a square (or ext times a square)
    return all(_square_or_ext(Fraction(vals[0]) * x, ext) for x in vals[1:])


def _exact_int(q) -> int:
    q = Fraction(q)
    if q.denominator != 1:
        raise ValueError(f"{q} is not integral after scaling")
    return q.numerator


def _is_square_int(n: int) -> bool:
    return n >= 0 and isqrt(n) ** 2 == n


def _square_or_ext(q: Fraction, ext: int) -> bool:
    n = q.numerator * q.denominator
    if _is_square_int(n):
        return True
    return ext != 1 and n % ext == 0 and _is_square_int(n // ext)


class _Kernel:
    """Integer-valued evaluation of line values for fast scans.

    Over Q every value is multiplied by a common denominator D; classes of
    the scaled values differ by the class of D, which cancels in the
    pairwise products used by the monochromatic test.
    """

    def __init__(self, spec: ColoringSpec):
        self.spec = spec
        self.p = spec.p
        if self.p is None:
            D = Fraction(spec.l).denominator
            for bj in spec.b:
                for ck in spec.c:
                    D = lcm(D, (bj * ck).denominator)
            self.D = D
            self.l = _exact_int(spec.l * D)
            self.bc = [[_exact_int(bj * ck * D) for ck in spec.c] for bj in spec.b]
            self.c = [Fraction(ck) for ck in spec.c]
            self.ext = spec.ext
        else:
            self.D = 1
            self.l = spec.l
            self.bc = [[bj * ck % self.p for ck in spec.c] for bj in spec.b]
            self.c = list(spec.c)
            self.qr = residue_table(self.p)

    def mono_fn(self, s):
        """Predicate on base = D(l + r_v) for lines with direction sum s."""
        if self.p is not None:
            p, qr = self.p, self.qr
            k0, k1, k2, k3 = (s * ck % p for ck in self.c)

            def mono(base: int) -> bool:
                x0 = (base + k0) % p
                if x0 == 0:
                    return False
                want = qr[x0]
                for k in (k1, k2, k3):
                    x = (base + k) % p
                    if x == 0 or qr[x] != want:
                        return False
                return True

            return mono

        k0, k1, k2, k3 = (_exact_int(s * ck * self.D) for ck in self.c)
        ext = self.ext

        def is_sq(n: int) -> bool:
            if n >= 0 and isqrt(n) ** 2 == n:
                return True
            return ext != 1 and n % ext == 0 and n // ext >= 0 and isqrt(n // ext) ** 2 == n // ext

        def mono(base: int) -> bool:
            x0 = base + k0
            if x0 == 0:
                return False
            for k in (k1, k2, k3):
                x = base + k
                if x == 0 or not is_sq(x0 * x):
                    return False
            return True

        return mono


def find_monochromatic_line(
    spec: ColoringSpec, limit: Optional[int] = None, stats: Optional[dict] = None
) -> Optional[CombinatorialLine]:
    """First monochromatic line in canonical order, or None.

    With ``limit`` the scan stops after that many lines; ``stats['lines']``
    receives the number of lines examined.
    """
    kern = _Kernel(spec)
    N = spec.N
    p = spec.p
    examined = 0
    try:
        for k in range(1, N + 1):
            for support in combinations(range(N), k):
                s = sum(spec.b[j] for j in support)
                if p:
                    s %= p
                free = [j for j in range(N) if j not in support]
                tables = [kern.bc[j] for j in free]
                mono = kern.mono_fn(s)
                l0 = kern.l
                for offsets in product(*tables):
                    if limit is not None and examined >= limit:
                        return None
                    examined += 1
                    if mono(l0 + sum(offsets)):
                        digits = [t.index(o) for t, o in zip(tables, offsets)]
                        v = [0] * N
                        for j, d in zip(free, digits):
                            v[j] = d
                        w = tuple(1 if j in support else 0 for j in range(N))
                        return CombinatorialLine(tuple(v), w)
        return None
    finally:
        if stats is not None:
            stats["lines"] = stats.get("lines", 0) + examined


# ---------------------------------------------------------------------------
# Lines to points
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ForgeResult:
    line: CombinatorialLine
    spec: ColoringSpec
    u: Any
    v: Any
    d: int
    weierstrass: Optional[Point]
    traced: Optional[Point]

    @property
    def points(self) -> tuple[QuarticPoint, QuarticPoint]:
        minus = -self.v
        if self.spec.p is not None:
            minus %= self.spec.p
        return QuarticPoint(self.u, self.v), QuarticPoint(self.u, minus)

    def to_dict(self) -> dict:
        from .io import dump_point, dump_value

        return {
            "line": self.line.to_dict(),
            "u": dump_value(self.u),
            "v": dump_value(self.v),
            "d": self.d,
            "weierstrass": dump_point(self.weierstrass),
            "traced": dump_point(self.traced),
            "spec": self.spec.to_dict(),
        }


def line_to_point(Q: QuarticCurve, spec: ColoringSpec, line: CombinatorialLine) -> ForgeResult:
    """Turn a monochromatic line into the point pair (u, +-v) and its trace."""
    if tuple(spec.c) != tuple(Q.constants) or spec.p != Q.p:
        raise ValueError("coloring constants do not match the quartic")
    vals = line_values(spec, line)
    if not (all(x != 0 for x in vals) and _same_class(vals, spec.p, spec.ext)):
        raise ValueError(f"{line} is not monochromatic")
    s = s_w(spec, line)
    p = spec.p
    if p is None:
        u = Fraction(vals[0]) / s
    else:
        u = vals[0] * pow(s, -1, p) % p
    fu = Q.f(u)
    if fu == 0:
        raise TwoTorsionHit(f"u = {u} is a root of the quartic")
    if p is None:
        # f(u) = prod(vals) / s^4 and prod(vals) is a square up to ext
        v = sqrt_in_extension(fu, spec.ext)
        if v is None:
            raise ValueError("product of a monochromatic line is not a square")
        d = 1 if isinstance(v, Fraction) else spec.ext
    else:
        v = sqrt_mod(fu, p)
        d = 1
    if not Q.contains(QuarticPoint(u, v)):
        raise ValueError("v^2 != f(u)")
    W = quartic_to_weierstrass_point(Q, QuarticPoint(u, v))
    if p is None:
        traced = trace_point(Q.base, W)
    else:
        # F_p points are fixed by the Galois group of F_{p^2}/F_p
        traced = Q.base.add(W, W)
    return ForgeResult(line, spec, u, v, d, W, traced)


# ---------------------------------------------------------------------------
# Restart driver
# ---------------------------------------------------------------------------


@dataclass
class Budget:
    """Search limits for :func:`forge`."""

    restarts: int = 10_000
    n_max: int = 10
    b_max: int = 5
    l_window: int = 8
    l_growth: int = 1000
    line_limit: Optional[int] = 400
    extensions: tuple = (1,)
    seed: int = 0


@dataclass
class ForgeOutcome:
    results: list[ForgeResult]
    log: list[dict] = field(default_factory=list)
    restarts: int = 0
    lines: int = 0

    @property
    def outcome(self) -> str:
        return "ok" if self.results else "EmptyForge"

    def to_dict(self, with_log: bool = True) -> dict:
        out = {
            "outcome": self.outcome,
            "restarts": self.restarts,
            "lines_examined": self.lines,
            "results": [r.to_dict() for r in self.results],
        }
        if with_log:
            out["log"] = self.log
        return out


def random_b(rng: random.Random, n: int, p: Optional[int], b_max: int) -> tuple:
    """n nonzero coefficients with no zero-sum subsequence.

    Coefficients are drawn one at a time and rejected if they close a zero
    sum.  Modulo small p the subset sums can fill F_p^x, in which case the
    draw restarts and finally falls back to 1..b_max, which is safe when
    n * b_max < p.
    """
    for _ in range(50):
        out: list = []
        sums: set = set()
        for _ in range(n):
            for _ in range(100):
                if p is None:
                    x = rng.randint(1, b_max) * rng.choice((1, -1))
                    bad = x in {-s for s in sums} | {0}
                else:
                    x = rng.randrange(1, p)
                    bad = (-x) % p in sums
                if not bad:
                    break
            else:
                break
            out.append(x)
            if p is None:
                sums |= {x} | {s + x for s in sums}
            else:
                sums |= {x} | {(s + x) % p for s in sums}
        if len(out) == n:
            return tuple(out)
    if p is not None and n * b_max >= p:
        raise InvalidColoring(f"cannot draw {n} coefficients without zero sums mod {p}")
    return tuple(rng.randint(1, b_max) for _ in range(n))


def forge(C: SplitCurve, P0: Point, budget: Optional[Budget] = None) -> ForgeOutcome:
    """Quartic model, randomized colorings, line search and trace descent.

    Each restart draws (l, b) (and an extension over Q), then deepens N from
    1 to ``n_max`` until a monochromatic line appears or the per-restart line
    budget runs out.  Results are deduplicated on (u, d).
    """
    budget = budget or Budget()
    Q = to_quartic(C, P0)
    rng = random.Random(budget.seed)
    p = C.p
    results: dict = {}
    out = ForgeOutcome([], [])
    for i in range(budget.restarts):
        window = budget.l_window * (1 + i // max(1, budget.l_growth))
        ext = rng.choice(budget.extensions) if p is None else 1
        if p is None:
            l = rng.randint(-window, window)
        else:
            l = rng.randrange(p)
        b = random_b(rng, budget.n_max, p, budget.b_max)
        entry = {"restart": i, "l": str(l), "b": [str(x) for x in b], "ext": ext}
        stats: dict = {}
        full = ColoringSpec(l, b, Q.constants, p, ext)
        hit = None
        depth = 0
        for n in range(1, budget.n_max + 1):
            depth = n
            remaining = None
            if budget.line_limit is not None:
                remaining = budget.line_limit - stats.get("lines", 0)
                if remaining <= 0:
                    break
            spec = full.prefix(n)
            line = find_monochromatic_line(spec, limit=remaining, stats=stats)
            if line is None:
                continue
            try:
                hit = line_to_point(Q, spec, line)
            except TwoTorsionHit:
                hit = None
            break
        entry.update(depth=depth, lines=stats.get("lines", 0), hit=hit is not None)
        if hit is not None:
            entry["u"] = str(hit.u)
            key = (hit.u, hit.d)
            if key not in results:
                results[key] = hit
        out.log.append(entry)
        out.lines += stats.get("lines", 0)
        out.restarts += 1
    out.results = list(results.values())
    log.info("forge: %d restarts, %d lines, %d results", out.restarts, out.lines, len(out.results))
    return out


# ---------------------------------------------------------------------------
# Linear families
# ---------------------------------------------------------------------------


def scan_linear_family(
    Q: QuarticCurve, sigma: Sequence[tuple], t_range: Iterable, ext: int = 1
) -> list[tuple[Any, list[int]]]:
    """For each t0, the indices i with f(a_i t0 + b_i) a square.

    Zero counts as a square (it gives the point (u, 0)).  Over Q a value in
    ``ext * Q^2`` also counts, i.e. the point is defined over Q(sqrt ext).
    """
    p = Q.p
    if any((a % p if p else a) == 0 for a, _ in sigma):
        raise ValueError("linear forms must be nonconstant")
    report = []
    for t0 in t_range:
        hits = []
        for i, (a, b) in enumerate(sigma):
            if p is None:
                u = Fraction(a) * Fraction(t0) + Fraction(b)
                ok = sqrt_in_extension(Q.f(u), ext) is not None
            else:
                u = (a * t0 + b) % p
                ok = legendre(Q.f(u), p) >= 0
            if ok:
                hits.append(i)
        report.append((t0, hits))
    return report
