"""Bounded independence certificates for rational points.

A set of points P_1..P_k on a curve over Q is *B-independent* when no
integer vector a != 0 with max |a_i| <= B has sum(a_i P_i) torsion.  The
certifier reduces the points modulo a run of good primes.  For each prime
it computes the full lattice of vectors a with sum(a_i P_i) landing in the
reduced torsion subgroup, and intersects these lattices.  Every true
relation survives every prime.  So if the intersection has no nonzero
vector in the box, the set is B-independent.  A surviving short vector is
checked exactly over Q before it is reported.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from math import isqrt
from typing import Iterator, Optional, Sequence

from sympy import nextprime

from .curves import (
    CurvePoint,
    Point,
    SplitCurve,
    count_points,
    torsion_subgroup_Q,
)
from .errors import BadPrimeForPoint, BadReduction, NotOnCurve
from .forge import Budget, forge
from .io import dump_point

log = logging.getLogger(__name__)

Vector = tuple[int, ...]


# ---------------------------------------------------------------------------
# Reduction
# ---------------------------------------------------------------------------


def reduce_point(C: SplitCurve, P: CurvePoint, p: int) -> CurvePoint:
    """Coordinatewise reduction of a rational point of C modulo p."""
    if p == 2 or not C.has_good_reduction(p):
        raise BadReduction(f"{C} has bad reduction at {p}")
    if P is None:
        return None
    out = []
    for z in P:
        z = Fraction(z)
        if z.denominator % p == 0:
            raise BadPrimeForPoint(f"{p} divides a denominator of {P}")
        out.append(z.numerator * pow(z.denominator, -1, p) % p)
    return Point(*out)


@dataclass(frozen=True)
class ReductionProfile:
    point: CurvePoint
    images: tuple  # (p, reduced point, |E(F_p)|)

    def to_dict(self) -> dict:
        return {
            "point": dump_point(self.point),
            "images": [{"p": p, "image": dump_point(R), "order": n} for p, R, n in self.images],
        }


def reduction_profile(C: SplitCurve, P: CurvePoint, primes: Sequence[int]) -> ReductionProfile:
    rows = []
    for p in primes:
        Ep = C.reduce(p)
        R = reduce_point(C, P, p)
        if not Ep.contains(R):
            raise NotOnCurve(f"reduction of {P} mod {p} is off the curve")
        rows.append((p, R, count_points(Ep)))
    return ReductionProfile(P, tuple(rows))


# ---------------------------------------------------------------------------
# Integer lattices
# ---------------------------------------------------------------------------


def lll_reduce(basis: Sequence[Sequence[int]], delta: Fraction = Fraction(3, 4)) -> list[list[int]]:
    """Exact LLL reduction of linearly independent integer rows."""
    b = [list(map(int, r)) for r in basis]
    n = len(b)
    if n <= 1:
        return b

    def dot(u, v):
        return sum(x * y for x, y in zip(u, v))

    def gram_schmidt():
        bstar: list[list[Fraction]] = []
        mu = [[Fraction(0)] * n for _ in range(n)]
        norms: list[Fraction] = []
        for i in range(n):
            v = [Fraction(x) for x in b[i]]
            for j in range(i):
                mu[i][j] = dot(b[i], bstar[j]) / norms[j]
                v = [x - mu[i][j] * y for x, y in zip(v, bstar[j])]
            bstar.append(v)
            norms.append(dot(v, v))
        return mu, norms

    mu, norms = gram_schmidt()
    k = 1
    while k < n:
        for j in range(k - 1, -1, -1):
            q = round(mu[k][j])
            if q:
                b[k] = [x - q * y for x, y in zip(b[k], b[j])]
                mu, norms = gram_schmidt()
        if norms[k] >= (delta - mu[k][k - 1] ** 2) * norms[k - 1]:
            k += 1
        else:
            b[k], b[k - 1] = b[k - 1], b[k]
            mu, norms = gram_schmidt()
            k = max(k - 1, 1)
    return b


class TooManyVectors(Exception):
    pass


def short_vectors(basis: Sequence[Sequence[int]], radius2: int, limit: int = 10_000) -> Iterator[Vector]:
    """Nonzero lattice vectors with squared length <= radius2 (Fincke-Pohst).

    Raises :class:`TooManyVectors` after ``limit`` vectors.
    """
    b = [list(r) for r in basis]
    n = len(b)
    if n == 0:
        return
    bstar: list[list[Fraction]] = []
    norms: list[Fraction] = []
    mu = [[Fraction(0)] * n for _ in range(n)]
    for i in range(n):
        v = [Fraction(x) for x in b[i]]
        for j in range(i):
            mu[i][j] = sum(Fraction(x) * y for x, y in zip(b[i], bstar[j])) / norms[j]
            v = [x - mu[i][j] * y for x, y in zip(v, bstar[j])]
        bstar.append(v)
        norms.append(sum(x * x for x in v))
    x = [0] * n
    emitted = 0

    def rec(i: int, used: Fraction):
        nonlocal emitted
        if i < 0:
            if any(x):
                emitted += 1
                if emitted > limit:
                    raise TooManyVectors
                yield tuple(sum(x[j] * b[j][c] for j in range(n)) for c in range(len(b[0])))
            return
        centre = -sum(x[j] * mu[j][i] for j in range(i + 1, n))
        room = (radius2 - used) / norms[i]
        if room < 0:
            return
        span = isqrt(room.numerator // room.denominator) + 1
        lo = int(centre) - span - 1
        for xi in range(lo, lo + 2 * span + 4):
            d = xi - centre
            if d * d > room:
                continue
            x[i] = xi
            yield from rec(i - 1, used + d * d * norms[i])
        x[i] = 0

    yield from rec(n - 1, Fraction(0))


def box_vectors(basis: Sequence[Sequence[int]], B: int, limit: int = 10_000) -> list[Vector]:
    """Nonzero lattice vectors with every coordinate in [-B, B], up to sign."""
    if not basis:
        return []
    k = len(basis[0])
    seen = set()
    out = []
    for v in short_vectors(basis, k * B * B, limit):
        if max(abs(c) for c in v) <= B:
            v = normalize_sign(v)
            if v not in seen:
                seen.add(v)
                out.append(v)
    out.sort(key=_key)
    return out


def _key(v: Vector) -> tuple:
    return (max(abs(c) for c in v), sum(c * c for c in v), v)


def best_box_vector(basis: Sequence[Sequence[int]], B: int, limit: int = 10_000) -> Optional[Vector]:
    """A shortest (max-norm, then length) nonzero lattice vector in [-B, B]^k, or None.

    The search radius starts at the first basis vector and grows by a
    factor 4 up to the ball containing the box, so lattices with one very
    short vector never enumerate all its multiples.
    """
    if not basis:
        return None
    basis = lll_reduce(basis)
    k = len(basis[0])
    full = k * B * B
    radius = min(full, max(1, sum(c * c for c in basis[0])))
    while True:
        found = [normalize_sign(v) for v in short_vectors(basis, radius, limit) if max(abs(c) for c in v) <= B]
        if found:
            best = min(found, key=_key)
            # anything with a smaller max-norm has length at most sqrt(k) * that norm
            m = max(abs(c) for c in best)
            if k * m * m <= radius or radius == full:
                return best
            radius = min(full, k * m * m)
            continue
        if radius == full:
            return None
        radius = min(full, radius * 4)


def normalize_sign(v: Sequence[int]) -> Vector:
    for c in v:
        if c:
            return tuple(v) if c > 0 else tuple(-z for z in v)
    return tuple(v)


# ---------------------------------------------------------------------------
# Relations modulo p
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RelationLattice:
    """All a in Z^k with sum(a_i P_i) in the given subgroup, as a basis."""

    p: int
    basis: tuple  # lower triangular rows
    group_order: int
    subgroup_size: int  # size of <torsion, P_1..P_k>

    @property
    def index(self) -> int:
        return self.group_order // self.subgroup_size

    def vectors(self, B: int, limit: int = 100_000) -> list[Vector]:
        return box_vectors(lll_reduce(self.basis), B, limit)


def relation_lattice(E: SplitCurve, images: Sequence[CurvePoint], torsion: Sequence[CurvePoint] = (None,)) -> tuple:
    """Triangular basis of the relation lattice and the generated subgroup size.

    Grows the subgroup one generator at a time.  For generator i the least
    n with n*P_i already in the subgroup gives the row n*e_i - (coefficients
    of n*P_i).
    """
    k = len(images)
    zero = (0,) * k
    H: dict = {t: zero for t in set(torsion)}
    H[None] = zero
    rows = []
    for i, P in enumerate(images):
        R, n = P, 1
        while R not in H:
            R = E.add(R, P)
            n += 1
        c = H[R]
        rows.append(tuple(n if j == i else -c[j] for j in range(k)))
        if n > 1:
            new = {}
            for h, ch in H.items():
                S = h
                for t in range(n):
                    new[S] = ch[:i] + (ch[i] + t,) + ch[i + 1 :] if t else ch
                    S = E.add(S, P)
            H = new
    return tuple(rows), len(H)


def relation_search_mod_p(
    E: SplitCurve,
    images: Sequence[CurvePoint],
    B: Optional[int] = None,
    torsion: Sequence[CurvePoint] = (None,),
) -> RelationLattice:
    """Relations sum(a_i P_i) in <torsion> among points of E(F_p).

    With the default trivial ``torsion`` the relations are sum(a_i P_i) = O
    and ``index`` is [E(F_p) : <P_i>].  Box vectors are available through
    :meth:`RelationLattice.vectors`.
    """
    p = E._require_fp()
    for P in images:
        if not E.contains(P):
            raise NotOnCurve(f"{P} is not on {E}")
    basis, size = relation_lattice(E, images, torsion)
    return RelationLattice(p, basis, count_points(E), size)


def exhaustive_relations(E: SplitCurve, images: Sequence[CurvePoint], B: int) -> list[Vector]:
    """Brute force over the box; the oracle for :func:`relation_search_mod_p`."""
    from itertools import product

    k = len(images)
    mults = [[E.mul(a, P) for a in range(-B, B + 1)] for P in images]
    out = []
    for a in product(range(-B, B + 1), repeat=k):
        if not any(a):
            continue
        S = None
        for i in range(k):
            S = E.add(S, mults[i][a[i] + B])
        if S is None:
            v = normalize_sign(a)
            if v == a:
                out.append(v)
    return sorted(out, key=_key)


# ---------------------------------------------------------------------------
# Certificates
# ---------------------------------------------------------------------------


def linear_combination(C: SplitCurve, coeffs: Sequence[int], points: Sequence[CurvePoint]) -> CurvePoint:
    """sum(a_i P_i) by a joint double-and-add, which keeps intermediate heights small."""
    bits = max((abs(a).bit_length() for a in coeffs), default=0)
    R: CurvePoint = None
    for j in range(bits - 1, -1, -1):
        R = C.add(R, R)
        for a, P in zip(coeffs, points):
            if abs(a) >> j & 1:
                R = C.add(R, P if a > 0 else C.neg(P))
    return R


@dataclass
class IndependenceCertificate:
    points: list
    B: int
    primes: list
    verdict: str  # "Independent" | "RelationFound" | "Inconclusive"
    relation: Optional[Vector] = None
    survivors: list = field(default_factory=list)
    refuted: list = field(default_factory=list)
    per_prime_indices: list = field(default_factory=list)

    @property
    def independent(self) -> bool:
        return self.verdict == "Independent"

    def to_dict(self) -> dict:
        out = {
            "points": [dump_point(P) for P in self.points],
            "B": self.B,
            "primes": self.primes,
            "verdict": self.verdict,
            "per_prime_indices": self.per_prime_indices,
        }
        if self.relation is not None:
            out["relations"] = [list(self.relation)]
        if self.survivors:
            out["survivors"] = [list(v) for v in self.survivors]
        if self.refuted:
            out["refuted"] = [list(v) for v in self.refuted]
        return out


def _denominators(C: SplitCurve, points, torsion) -> int:
    d = 1
    for z in list(C.roots) + [c for P in list(points) + list(torsion) if P is not None for c in P]:
        d *= Fraction(z).denominator
    return d


def certify(
    C: SplitCurve,
    points: Sequence[CurvePoint],
    B: int = 10_000,
    primes: int = 20,
    prime_budget: int = 60,
    p_min: int = 100,
    stable: int = 6,
    limit: int = 10_000,
) -> IndependenceCertificate:
    """B-bounded independence of ``points`` modulo torsion.

    The first ``primes`` usable primes above ``p_min`` are always used.  A
    surviving short vector is checked over Q once it has stayed the
    shortest survivor for ``stable`` further primes.  After ``prime_budget``
    primes the verdict is Inconclusive.
    """
    if C.p is not None:
        raise ValueError("certify works over Q")
    points = list(points)
    for P in points:
        if not C.contains(P):
            raise NotOnCurve(f"{P} is not on {C}")
    cert = IndependenceCertificate(points, B, [], "Independent")
    k = len(points)
    if k == 0:
        return cert
    torsion = torsion_subgroup_Q(C)
    torsion_set = set(torsion)
    dens = _denominators(C, points, torsion)
    basis = [tuple(int(i == j) for j in range(k)) for i in range(k)]
    p = max(2, p_min - 1)
    streak = 0
    best = None
    refuted: set = set()
    while len(cert.primes) < prime_budget:
        p = int(nextprime(p))
        if not C.has_good_reduction(p) or dens % p == 0:
            continue
        Ep = C.reduce(p)
        imgs = [reduce_point(C, P, p) for P in points]
        tors = [reduce_point(C, T, p) for T in torsion]
        # image of the current basis, then its relation lattice
        combos = [_combine_mod(Ep, row, imgs) for row in basis]
        rows, _ = relation_lattice(Ep, combos, tors)
        basis = [tuple(sum(r[j] * basis[j][c] for j in range(k)) for c in range(k)) for r in rows]
        basis = [tuple(r) for r in lll_reduce(basis)]
        _, size = relation_lattice(Ep, imgs)
        order = count_points(Ep)
        cert.primes.append(p)
        cert.per_prime_indices.append({"p": p, "order": order, "index": order // size})
        if len(cert.primes) < primes:
            continue
        try:
            cand = best_box_vector(basis, B, limit)
        except TooManyVectors:
            streak, best = 0, None
            continue
        if cand is None:
            cert.verdict = "Independent"
            cert.refuted = sorted(refuted)
            return cert
        if cand in refuted:
            # a refuted vector is still in the lattice; wait for a prime to drop it
            streak = 0
            continue
        if cand == best:
            streak += 1
        else:
            best, streak = cand, 0
        if streak >= stable:
            if linear_combination(C, best, points) in torsion_set:
                cert.verdict = "RelationFound"
                cert.relation = best
                cert.refuted = sorted(refuted)
                return cert
            refuted.add(best)
            best, streak = None, 0
    cert.verdict = "Inconclusive"
    try:
        cand = best_box_vector(basis, B, limit)
    except TooManyVectors:
        cand = None
    cert.survivors = [cand] if cand is not None else []
    cert.refuted = sorted(refuted)
    return cert


def _combine_mod(E: SplitCurve, coeffs: Sequence[int], images: Sequence[CurvePoint]) -> CurvePoint:
    R: CurvePoint = None
    for a, P in zip(coeffs, images):
        if a:
            R = E.add(R, E.mul(a, P))
    return R


# ---------------------------------------------------------------------------
# Rank growth
# ---------------------------------------------------------------------------


def rank_growth_report(
    C: SplitCurve,
    P0: Point,
    schedule: Sequence[Budget],
    B: int = 10_000,
    **certify_opts,
) -> dict:
    """Run the forge at each budget and greedily grow a B-independent set
    from the rational trace points it produces.

    Returns the table rows (traces forged so far, certified subset size),
    the independent points with their certificate, and the search logs.
    """
    torsion = set(torsion_subgroup_Q(C))
    traces: list = []
    independent: list = []
    last_cert: Optional[IndependenceCertificate] = None
    rows = []
    logs = []
    forged = 0
    for step, budget in enumerate(schedule):
        outcome = forge(C, P0, budget)
        logs.append({"step": step, "seed": budget.seed, "restarts": outcome.restarts,
                     "lines": outcome.lines, "outcome": outcome.outcome, "log": outcome.log})
        forged += len(outcome.results)
        for res in outcome.results:
            T = res.traced
            if T in traces:
                continue
            traces.append(T)
            if T in torsion:
                continue
            cert = certify(C, independent + [T], B, **certify_opts)
            if cert.independent:
                independent.append(T)
                last_cert = cert
        rows.append({"step": step, "restarts": budget.restarts, "forged": forged,
                     "traces": len(traces), "independent": len(independent)})
    if not rows:
        rows.append({"step": 0, "restarts": 0, "forged": 0, "traces": 0, "independent": 0})
    return {
        "kind": "growth",
        "curve": [str(e) for e in C.roots],
        "base_point": dump_point(P0),
        "B": B,
        "outcome": "ok" if forged else "EmptyForge",
        "rows": rows,
        "traces": [dump_point(T) for T in traces],
        "independent_set": [dump_point(T) for T in independent],
        "certificate": last_cert.to_dict() if last_cert else None,
        "search_log": logs,
    }
