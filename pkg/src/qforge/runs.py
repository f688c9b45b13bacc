"""Payload builders behind each CLI command.

Each ``run_*`` takes a validated config and returns a JSON-ready payload.
Payloads depend only on the config, so equal configs give equal bytes.
"""
from __future__ import annotations

from fractions import Fraction
from typing import Optional

from .certify import certify, rank_growth_report
from .config import (
    AvoidConfig,
    CertifyConfig,
    ConvertConfig,
    DensityConfig,
    ForgeConfig,
    GrowthConfig,
    ScanConfig,
)
from .curves import (
    Point,
    QuarticPoint,
    SplitCurve,
    quartic_to_weierstrass_point,
    to_quartic,
    weierstrass_to_quartic_point,
)
from .density import (
    AvoidBudget,
    SweepConfig,
    avoidance_search,
    instance_rng,
    random_forms,
    random_model,
    reduce_model,
    verify_witness,
)
from .errors import ConfigError
from .forge import Budget, forge, scan_linear_family
from .io import dump_point, dump_value, parse_point, parse_rational, parse_split_curve


def _point(text: str, p: Optional[int] = None) -> Optional[Point]:
    P = parse_point(text)
    if P is None or p is None:
        return P
    out = []
    for z in P:
        if not isinstance(z, Fraction):
            raise ConfigError("points over F_p must have rational coordinates")
        if z.denominator % p == 0:
            raise ConfigError(f"{text!r} has a denominator divisible by {p}")
        out.append(z.numerator * pow(z.denominator, -1, p) % p)
    return Point(*out)


def _curve_and_point(curve: str, base: str, p: Optional[int]):
    C = parse_split_curve(curve, p)
    P0 = _point(base, p)
    if P0 is None:
        raise ConfigError("base point cannot be the point at infinity")
    return C, P0


def run_forge(cfg: ForgeConfig) -> dict:
    C, P0 = _curve_and_point(cfg.curve, cfg.base_point, cfg.p)
    budget = Budget(
        restarts=cfg.restarts,
        n_max=cfg.n_max,
        b_max=cfg.b_max,
        line_limit=cfg.line_limit,
        extensions=tuple(cfg.extensions),
        seed=cfg.seed,
    )
    out = forge(C, P0, budget)
    payload = {"kind": "forge", "curve": [str(e) for e in C.roots], "p": cfg.p, "base_point": dump_point(P0)}
    payload.update(out.to_dict(with_log=cfg.log))
    return payload


def run_scan(cfg: ScanConfig) -> dict:
    C, P0 = _curve_and_point(cfg.curve, cfg.base_point, cfg.p)
    Q = to_quartic(C, P0)
    if cfg.p is None:
        forms = [(parse_rational(a), parse_rational(b)) for a, b in cfg.forms]
    else:
        forms = [(int(a) % cfg.p, int(b) % cfg.p) for a, b in cfg.forms]
    rows = scan_linear_family(Q, forms, range(cfg.t_min, cfg.t_max + 1), cfg.ext)
    return {
        "kind": "scan",
        "constants": [dump_value(c) for c in Q.constants],
        "rows": [{"t": dump_value(t), "hits": hits} for t, hits in rows],
    }


def density_sweep_config(cfg: DensityConfig) -> SweepConfig:
    curve = base = None
    if cfg.curve is not None:
        curve, base = _curve_and_point(cfg.curve, cfg.base_point or "", None)
    return SweepConfig(
        prime_min=cfg.prime_min,
        prime_max=cfg.prime_max,
        n=cfg.n,
        k=cfg.k,
        m=cfg.m,
        seed=cfg.seed,
        budget=cfg.budget,
        form_sets=cfg.form_sets,
        p_min=cfg.p_min,
        curve=curve,
        base_point=base,
    )


def run_avoid(cfg: AvoidConfig) -> dict:
    p = cfg.p
    rng = instance_rng(cfg.seed, p, "avoid")
    if cfg.curve is not None:
        C, P0 = _curve_and_point(cfg.curve, cfg.base_point or "", None)
        Q = reduce_model(C, P0, p)
    else:
        Q = random_model(rng, p)
    sigmas = [random_forms(rng, p, cfg.n) for _ in range(cfg.k)]
    w = avoidance_search(Q, sigmas, cfg.m, AvoidBudget(max_tuples=cfg.budget, seed=cfg.seed))
    payload = {
        "kind": "avoid",
        "p": p,
        "m": cfg.m,
        "curve": [str(e) for e in Q.base.roots],
        "constants": [str(c) for c in Q.constants],
        "sigmas": [[list(f) for f in sig] for sig in sigmas],
        "found": w is not None,
    }
    if w is not None:
        payload["witness"] = w.to_dict()
        payload["verified"] = verify_witness(Q, sigmas, cfg.m, w)
    return payload


def run_certify(cfg: CertifyConfig) -> dict:
    C = parse_split_curve(cfg.curve)
    pts = [_point(t) for t in cfg.points]
    cert = certify(C, pts, cfg.B, primes=cfg.primes, prime_budget=cfg.prime_budget, p_min=cfg.p_min)
    payload = {"kind": "certificate"}
    payload.update(cert.to_dict())
    return payload


def run_growth(cfg: GrowthConfig) -> dict:
    C, P0 = _curve_and_point(cfg.curve, cfg.base_point, None)
    schedule = [
        Budget(
            restarts=r,
            n_max=cfg.n_max,
            line_limit=cfg.line_limit,
            extensions=tuple(cfg.extensions),
            seed=cfg.seed + i,
        )
        for i, r in enumerate(cfg.schedule)
    ]
    return rank_growth_report(C, P0, schedule, cfg.B)


def run_convert(cfg: ConvertConfig) -> dict:
    C, P0 = _curve_and_point(cfg.curve, cfg.base_point, cfg.p)
    Q = to_quartic(C, P0)
    forward = []
    for text in cfg.points:
        P = _point(text, cfg.p)
        R = weierstrass_to_quartic_point(Q, P)
        forward.append({"point": dump_point(P), "u": dump_value(R.u), "v": dump_value(R.v)})
    backward = []
    for text in cfg.quartic_points:
        u, v = _point(text, cfg.p)
        R = QuarticPoint(u, v)
        backward.append({"u": dump_value(u), "v": dump_value(v), "point": dump_point(quartic_to_weierstrass_point(Q, R))})
    return {
        "kind": "convert",
        "curve": [str(e) for e in C.roots],
        "p": cfg.p,
        "base_point": dump_point(P0),
        "constants": [dump_value(c) for c in Q.constants],
        "x0": dump_value(Q.x0),
        "y0": dump_value(Q.y0),
        "forward": forward,
        "backward": backward,
    }


RUNNERS = {
    "forge": run_forge,
    "scan": run_scan,
    "avoid": run_avoid,
    "certify": run_certify,
    "growth": run_growth,
    "convert": run_convert,
}
