"""Finite-field experiments: multiquadratic densities and avoidance witnesses.

Everything here works on a quartic model ``v^2 = f(u)`` over F_p that
carries its split Weierstrass curve (see :func:`qforge.curves.to_quartic`),
so quartic points can be added in ``E(F_p)``.
"""
from __future__ import annotations

import logging
import random
from dataclasses import dataclass, field
from decimal import Decimal, localcontext
from fractions import Fraction
from itertools import combinations, product
from typing import Iterable, Optional, Sequence

import numpy as np
from sympy import primerange

from .arith import residue_table, sqrt_mod
from .curves import (
    CurvePoint,
    Point,
    QuarticCurve,
    QuarticPoint,
    SplitCurve,
    count_points,
    quartic_to_weierstrass_point,
    to_quartic,
)
from .errors import BadReduction, BadReductionF, SingularCurve, TorsionNotRational

log = logging.getLogger(__name__)

Form = tuple[int, int]


# ---------------------------------------------------------------------------
# Instances
# ---------------------------------------------------------------------------


def random_model(rng: random.Random, p: int) -> QuarticCurve:
    """Random split curve over F_p with base point (0, y0), as a quartic."""
    qr = residue_table(p)
    while True:
        e = rng.sample(range(1, p), 3)
        t = -e[0] * e[1] * e[2] % p
        if qr[t]:
            E = SplitCurve(*e, p=p)
            return to_quartic(E, Point(0, sqrt_mod(t, p)))


def reduce_model(C: SplitCurve, P0: Point, p: int) -> QuarticCurve:
    """Quartic model of the reduction of (C, P0) modulo p."""
    Ep = C.reduce(p)
    x0, y0 = (Fraction(z) for z in P0)
    if x0.denominator % p == 0 or y0.denominator % p == 0:
        raise BadReduction(f"base point is not {p}-integral")
    P0p = Point(x0.numerator * pow(x0.denominator, -1, p) % p, y0.numerator * pow(y0.denominator, -1, p) % p)
    try:
        return to_quartic(Ep, P0p)
    except Exception as exc:
        raise BadReduction(f"base point degenerates modulo {p}: {exc}") from exc


def random_forms(rng: random.Random, p: int, n: int) -> list[Form]:
    """n distinct nonconstant forms a*u + b."""
    out: list[Form] = []
    while len(out) < n:
        f = (rng.randrange(1, p), rng.randrange(p))
        if f not in out:
            out.append(f)
    return out


# ---------------------------------------------------------------------------
# Multiquadratic count
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DensityReport:
    p: int
    n: int
    count: int
    epsilon_bound: Fraction
    heuristic: Fraction
    passed: bool
    weil_ok: bool

    @property
    def ratio(self) -> Fraction:
        return self.count / self.heuristic

    def to_dict(self) -> dict:
        return {
            "kind": "density",
            "p": self.p,
            "n": self.n,
            "count": self.count,
            "epsilon_bound": str(self.epsilon_bound),
            "heuristic": str(self.heuristic),
            "pass": self.passed,
            "weil_ok": self.weil_ok,
        }


def _quartic_constants(f, p: int) -> tuple[int, ...]:
    cs = f.constants if isinstance(f, QuarticCurve) else tuple(f)
    cs = tuple(int(c) % p for c in cs)
    if len(cs) != 4:
        raise ValueError("need four quartic constants")
    if len(set(cs)) < 4:
        raise BadReductionF(f"f has a repeated root modulo {p}")
    return cs


def square_table(f, p: int) -> np.ndarray:
    """Boolean array: f(u) is a nonzero square, indexed by u in F_p."""
    cs = _quartic_constants(f, p)
    u = np.arange(p, dtype=np.int64)
    fu = np.ones(p, dtype=np.int64)
    for c in cs:
        fu = fu * ((u + c) % p) % p
    qr = np.frombuffer(residue_table(p), dtype=np.uint8).astype(bool)
    return qr[fu]


def multiquadratic_count(f, forms: Sequence[Form], p: int) -> DensityReport:
    """Number of u0 with f(a_i u0 + b_i) a nonzero square for every form.

    The report's bound uses epsilon = 2^-(n+1) and the Weil-type check
    |count - p/2^n| <= 4 * 2^n * sqrt(p).
    """
    if any(a % p == 0 for a, _ in forms):
        raise ValueError("forms must be nonconstant modulo p")
    good = square_table(f, p)
    u = np.arange(p, dtype=np.int64)
    ok = np.ones(p, dtype=bool)
    for a, b in forms:
        ok &= good[(a * u + b) % p]
    count = int(ok.sum())
    n = len(forms)
    eps_p = Fraction(p, 2 ** (n + 1))
    heuristic = Fraction(p, 2**n)
    dev = count - heuristic
    weil_ok = dev * dev <= 16 * 4**n * p
    return DensityReport(p, n, count, eps_p, heuristic, count > eps_p, weil_ok)


# ---------------------------------------------------------------------------
# Compatible tuples and mE(F_p)
# ---------------------------------------------------------------------------


def _points_over(Q: QuarticCurve, u: int) -> list[QuarticPoint]:
    p = Q.p
    fu = Q.f(u)
    if fu == 0:
        return [QuarticPoint(u, 0)]
    if not residue_table(p)[fu]:
        return []
    r = sqrt_mod(fu, p)
    return [QuarticPoint(u, r), QuarticPoint(u, p - r)]


def admissible_us(Q: QuarticCurve, sigma: Sequence[Form], u0: int) -> list[int]:
    p = Q.p
    out: list[int] = []
    for a, b in sigma:
        u = (a * u0 + b) % p
        if u not in out:
            out.append(u)
    return out


def compatible_tuples(
    Q: QuarticCurve, sigmas: Sequence[Sequence[Form]], u_tuple: Sequence[int]
) -> list[tuple[QuarticPoint, ...]]:
    """All (P_1..P_k) on the quartic with u(P_j) in sigma_j(u_j)."""
    if len(sigmas) != len(u_tuple):
        raise ValueError("need one u per sequence")
    if any(a % Q.p == 0 for sig in sigmas for a, _ in sig):
        raise ValueError("forms must be nonconstant")
    per_j = []
    for sig, u0 in zip(sigmas, u_tuple):
        pts: list[QuarticPoint] = []
        for u in admissible_us(Q, sig, u0):
            pts.extend(_points_over(Q, u))
        per_j.append(pts)
    return list(product(*per_j))


def quartic_to_group(Q: QuarticCurve, R: QuarticPoint) -> CurvePoint:
    """Quartic point as a point of E(F_p); (0, 0) is the identity."""
    if R.u % Q.p == 0:
        return None
    return quartic_to_weierstrass_point(Q, R)


def subgroup_mE(E: SplitCurve, m: int) -> frozenset:
    """{m P : P in E(F_p)}, which has |E(F_p)|/m^2 elements when E[m] is rational."""
    p = E._require_fp()
    if m < 1:
        raise ValueError("m must be positive")
    pts = E.points()
    if m == 1:
        return frozenset(pts)
    if (p - 1) % m:
        raise TorsionNotRational(f"m = {m} does not divide p - 1 = {p - 1}")
    images = [E.mul(m, P) for P in pts]
    torsion = sum(1 for R in images if R is None)
    if torsion != m * m:
        raise TorsionNotRational(f"E(F_{p}) has {torsion} points of order dividing {m}, not {m * m}")
    out = frozenset(images)
    if len(out) * m * m != len(pts):
        raise TorsionNotRational("image of multiplication by m has the wrong size")
    return out


# ---------------------------------------------------------------------------
# Avoidance witnesses
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AvoidanceWitness:
    p: int
    m: int
    u_tuple: tuple
    checked_tuples: int
    examined: int = 0
    seed: Optional[int] = None

    def to_dict(self) -> dict:
        return {
            "kind": "witness",
            "p": self.p,
            "m": self.m,
            "u_tuple": list(self.u_tuple),
            "checked_tuples": self.checked_tuples,
            "examined": self.examined,
            "seed": self.seed,
        }


@dataclass
class AvoidBudget:
    max_tuples: int = 20_000
    seed: int = 0
    lex_limit: int = 500
    require_squares: bool = True


def _subset_sums_avoid(E: SplitCurve, pts: Sequence[CurvePoint], mE: frozenset) -> bool:
    k = len(pts)
    for r in range(1, k + 1):
        for idx in combinations(range(k), r):
            S: CurvePoint = None
            for i in idx:
                S = E.add(S, pts[i])
            if S in mE:
                return False
    return True


def _candidate_tuples(p: int, k: int, budget: AvoidBudget) -> Iterable[tuple]:
    if p <= budget.lex_limit:
        yield from product(range(p), repeat=k)
        return
    rng = random.Random(budget.seed)
    for _ in range(budget.max_tuples):
        yield tuple(rng.randrange(p) for _ in range(k))


def avoidance_search(
    Q: QuarticCurve,
    sigmas: Sequence[Sequence[Form]],
    m: int,
    budget: Optional[AvoidBudget] = None,
) -> Optional[AvoidanceWitness]:
    """Find (u_1..u_k) such that no compatible tuple has a non-empty
    subsequence summing into mE(F_p).

    With ``require_squares`` (the default) only tuples whose every form value
    is a nonzero square are considered, so each witness carries 2^k or more
    compatible tuples rather than holding vacuously.  When E[m] is not
    rational the search reports NotFound (None) without searching.
    """
    budget = budget or AvoidBudget()
    E = Q.base
    p = Q.p
    try:
        mE = subgroup_mE(E, m)
    except TorsionNotRational as exc:
        log.info("avoidance search skipped: %s", exc)
        return None
    good = square_table(Q, p)
    k = len(sigmas)
    examined = 0
    for u_tuple in _candidate_tuples(p, k, budget):
        if examined >= budget.max_tuples:
            break
        examined += 1
        if budget.require_squares and not all(
            good[(a * u0 + b) % p] for sig, u0 in zip(sigmas, u_tuple) for a, b in sig
        ):
            continue
        tuples = compatible_tuples(Q, sigmas, u_tuple)
        if not tuples:
            continue
        ok = True
        for tup in tuples:
            if not _subset_sums_avoid(E, [quartic_to_group(Q, R) for R in tup], mE):
                ok = False
                break
        if ok:
            return AvoidanceWitness(p, m, tuple(u_tuple), len(tuples), examined, budget.seed)
    return None


def verify_witness(
    Q: QuarticCurve, sigmas: Sequence[Sequence[Form]], m: int, witness: AvoidanceWitness
) -> bool:
    """Independent re-check of a witness.

    Compatible points are found by scanning every u in F_p and every v in
    F_p for the admissible u, and mE is rebuilt by repeated addition.
    """
    E = Q.base
    p = Q.p
    mE: set = set()
    for P in E.points():
        R: CurvePoint = None
        for _ in range(m):
            R = E.add(R, P)
        mE.add(R)
    per_j = []
    for sig, u0 in zip(sigmas, witness.u_tuple):
        targets = {(a * u0 + b) % p for a, b in sig}
        pts = []
        for u in range(p):
            if u not in targets:
                continue
            fu = Q.f(u)
            for v in range(p):
                if v * v % p == fu:
                    pts.append(QuarticPoint(u, v))
        per_j.append(pts)
    count = 0
    k = len(sigmas)
    for tup in product(*per_j):
        count += 1
        group = [quartic_to_group(Q, R) for R in tup]
        for mask in range(1, 1 << k):
            S: CurvePoint = None
            for i in range(k):
                if mask >> i & 1:
                    S = E.add(S, group[i])
            if S in mE:
                return False
    return count == witness.checked_tuples and count > 0


# ---------------------------------------------------------------------------
# Prime sweeps
# ---------------------------------------------------------------------------


@dataclass
class SweepConfig:
    prime_min: int = 100
    prime_max: int = 1000
    n: int = 2
    k: int = 0
    m: int = 2
    seed: int = 0
    budget: int = 20_000
    form_sets: int = 1
    p_min: int = 100
    curve: Optional[SplitCurve] = None
    base_point: Optional[Point] = None


def instance_rng(seed: int, p: int, tag: str = "") -> random.Random:
    return random.Random(f"{seed}:{p}:{tag}")


def sweep_prime(cfg: SweepConfig, p: int) -> list[dict]:
    """Records for one prime: density reports, then an optional witness record."""
    rng = instance_rng(cfg.seed, p)
    if cfg.curve is not None:
        try:
            Q = reduce_model(cfg.curve, cfg.base_point, p)
        except (BadReduction, SingularCurve) as exc:
            return [{"kind": "skip", "p": p, "reason": str(exc)}]
    else:
        Q = random_model(rng, p)
    records: list[dict] = []
    for _ in range(cfg.form_sets):
        forms = random_forms(rng, p, cfg.n)
        rep = multiquadratic_count(Q, forms, p).to_dict()
        rep["informational"] = p < cfg.p_min
        records.append(rep)
    if cfg.k:
        sigmas = [random_forms(rng, p, cfg.n) for _ in range(cfg.k)]
        rec: dict = {"kind": "witness", "p": p, "m": cfg.m, "k": cfg.k, "n": cfg.n}
        w = avoidance_search(Q, sigmas, cfg.m, AvoidBudget(max_tuples=cfg.budget, seed=cfg.seed))
        if w is None:
            rec.update(found=False)
        else:
            rec.update(w.to_dict(), found=True, verified=verify_witness(Q, sigmas, cfg.m, w))
        records.append(rec)
    return records


def _sweep_worker(args):
    cfg, p = args
    return p, sweep_prime(cfg, p)


def _decimal(q: Fraction, digits: int = 12) -> str:
    with localcontext() as ctx:
        ctx.prec = digits
        return str(Decimal(q.numerator) / Decimal(q.denominator))


def prime_sweep(cfg: SweepConfig, threads: int = 1) -> dict:
    """Per-prime records (sorted by prime) plus an aggregate summary."""
    primes = [int(p) for p in primerange(max(3, cfg.prime_min), cfg.prime_max + 1)]
    jobs = [(cfg, p) for p in primes]
    if threads > 1 and len(jobs) > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(_sweep_worker, jobs, chunksize=8))
    else:
        results = [_sweep_worker(j) for j in jobs]
    results.sort(key=lambda t: t[0])
    records = [r for _, recs in results for r in recs]
    return {"records": records, "aggregate": aggregate(records)}


def aggregate(records: Sequence[dict]) -> dict:
    dens = [r for r in records if r.get("kind") == "density" and not r.get("informational")]
    wits = [r for r in records if r.get("kind") == "witness"]
    out: dict = {"primes": len({r["p"] for r in records}), "density_reports": len(dens)}
    if dens:
        ratios = [Fraction(r["count"]) / Fraction(r["heuristic"]) for r in dens]
        out.update(
            min_ratio=_decimal(min(ratios)),
            mean_ratio=_decimal(sum(ratios, Fraction(0)) / len(ratios)),
            all_pass=all(r["pass"] for r in dens),
            all_weil=all(r["weil_ok"] for r in dens),
        )
    if wits:
        found = [w for w in wits if w.get("found")]
        out.update(
            witness_attempts=len(wits),
            witnesses=len(found),
            witness_rate=_decimal(Fraction(len(found), len(wits))),
            all_verified=all(w.get("verified") for w in found),
        )
    return out
