"""Text formats shared by the CLI and the JSON payloads.

Rationals are written as ``"num/den"`` (``str(Fraction)``, so integers drop
the denominator), elements of Q(sqrt d) as ``"a+b√d"`` and points as
``{"x": ..., "y": ...}`` or ``null`` for the point at infinity.
"""
from __future__ import annotations

import re
from fractions import Fraction
from typing import Any, Optional

from .arith import QuadExtElement
from .curves import Point, SplitCurve
from .errors import ConfigError

_QUAD = re.compile(
    r"^\s*(?P<a>[+-]?\d+(?:/\d+)?)\s*(?P<sign>[+-])\s*(?P<b>\d+(?:/\d+)?)\s*\*?\s*"
    r"(?:√\s*\(?\s*(?P<d1>-?\d+)\s*\)?|sqrt\s*\(\s*(?P<d2>-?\d+)\s*\))\s*$"
)


def parse_rational(text: str) -> Fraction:
    try:
        return Fraction(text.strip().replace("−", "-"))
    except (ValueError, ZeroDivisionError) as exc:
        raise ConfigError(f"cannot parse rational {text!r}") from exc


def parse_value(text: str):
    """A rational, or ``a+b√d`` / ``a+b*sqrt(d)``."""
    text = text.strip().replace("−", "-")
    m = _QUAD.match(text)
    if m:
        b = Fraction(m["b"]) * (1 if m["sign"] == "+" else -1)
        d = int(m["d1"] or m["d2"])
        try:
            z = QuadExtElement(Fraction(m["a"]), b, d)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        return z.a if z.b == 0 else z
    return parse_rational(text)


def _split(text: str, n: int, what: str) -> list[str]:
    parts = [t for t in text.split(",")]
    if len(parts) != n or any(not t.strip() for t in parts):
        raise ConfigError(f"{what} must be {n} comma-separated values, got {text!r}")
    return parts


def parse_split_curve(text: str, p: Optional[int] = None) -> SplitCurve:
    """``"e1,e2,e3"``."""
    roots = [parse_rational(t) for t in _split(text, 3, "curve")]
    try:
        if p is None:
            return SplitCurve(*roots)
        return SplitCurve(*(r.numerator * pow(r.denominator, -1, p) % p for r in roots), p=p)
    except Exception as exc:
        raise ConfigError(f"bad curve {text!r}: {exc}") from exc


def parse_quartic_constants(text: str) -> tuple[Fraction, ...]:
    """``"c0,c1,c2,c3"``."""
    return tuple(parse_rational(t) for t in _split(text, 4, "quartic"))


def parse_point(text: str) -> Optional[Point]:
    """``"x,y"``, or ``"inf"`` for the point at infinity."""
    if text.strip().lower() in ("inf", "infinity", "o"):
        return None
    x, y = (parse_value(t) for t in _split(text, 2, "point"))
    return Point(x, y)


def dump_value(z: Any) -> str:
    if isinstance(z, QuadExtElement):
        if z.b == 0:
            return str(z.a)
        sign = "+" if z.b > 0 else "-"
        return f"{z.a}{sign}{abs(z.b)}√{z.d}"
    if isinstance(z, Fraction):
        return str(z)
    return str(int(z))


def dump_point(P: Optional[Point]) -> Optional[dict]:
    if P is None:
        return None
    return {"x": dump_value(P.x), "y": dump_value(P.y)}


def load_point(obj: Optional[dict]) -> Optional[Point]:
    if obj is None:
        return None
    return Point(parse_value(obj["x"]), parse_value(obj["y"]))
