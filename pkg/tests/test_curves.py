from fractions import Fraction as F
from itertools import product

import pytest
from hypothesis import given, strategies as st

from qforge.arith import QuadExtElement
from qforge.curves import (
    Point,
    QuarticPoint,
    SplitCurve,
    add,
    conjugate_point,
    count_points,
    halve,
    is_double,
    is_torsion_Q,
    neg,
    quartic_to_weierstrass_point,
    scalar_mul,
    to_quartic,
    torsion_subgroup_Q,
    trace_point,
    weierstrass_to_quartic_point,
)
from qforge.errors import (
    BadReduction,
    MapsToBasePointPair,
    MapsToInfinity,
    NotOnCurve,
    SingularCurve,
    SingularTranslate,
    TwoTorsionBasePoint,
    TwoTorsionInput,
)

from .strategies import curve_through_point, fp_curve

O = None


def test_singular_curve_rejected():
    with pytest.raises(SingularCurve):
        SplitCurve(1, 1, 2)
    with pytest.raises(SingularCurve):
        SplitCurve(1, 8, 2, p=7)


def test_coefficients(congruent):
    C, _ = congruent
    assert (C.a2, C.a4, C.a6) == (0, -25, 0)
    assert C.rhs(F(-4)) == 36


def test_add_examples(congruent):
    C, P = congruent
    T = Point(F(0), F(0))
    assert add(C, T, O) == T
    assert add(C, T, T) is O
    assert add(C, P, P) == Point(F(1681, 144), F(-62279, 1728))
    assert C.contains(add(C, P, P))


def test_add_rejects_points_off_curve(congruent):
    C, _ = congruent
    with pytest.raises(NotOnCurve):
        add(C, Point(F(1), F(1)), O)


def test_scalar_mul_examples(congruent):
    C, P = congruent
    assert scalar_mul(C, 1, P) == P
    assert scalar_mul(C, 0, P) is O
    assert scalar_mul(C, 2, Point(F(0), F(0))) is O
    chain = O
    for _ in range(8):
        chain = add(C, chain, P)
    assert scalar_mul(C, 8, P) == chain
    assert scalar_mul(C, -8, P) == neg(C, chain)


@given(curve_through_point(), st.integers(-4, 4), st.integers(-4, 4), st.integers(-4, 4))
def test_group_law_over_q(cp, i, j, k):
    C, P = cp
    T = Point(C.e1, F(0))
    A, B, D = scalar_mul(C, i, P), add(C, scalar_mul(C, j, P), T), scalar_mul(C, k, add(C, P, T))
    assert add(C, add(C, A, B), D) == add(C, A, add(C, B, D))
    assert add(C, A, B) == add(C, B, A)
    assert add(C, A, neg(C, A)) is O
    assert C.contains(add(C, A, B))


@pytest.mark.parametrize("p", [7, 11, 13])
def test_group_law_exhaustive_small_field(p):
    C = SplitCurve(0, 1, p - 1, p=p)
    pts = C.points()
    for P, Q in product(pts, repeat=2):
        assert C.add(P, Q) == C.add(Q, P)
    for P, Q, R in product(pts, repeat=3):
        assert C.add(C.add(P, Q), R) == C.add(P, C.add(Q, R))


@given(fp_curve())
def test_count_points_hasse_and_lagrange(C):
    n = count_points(C)
    p = C.p
    assert n == len(C.points())
    assert (n - p - 1) ** 2 <= 4 * p
    assert n % 4 == 0


def test_count_points_example():
    assert count_points(SplitCurve(0, 1, -1, p=7)) == 8
    with pytest.raises(BadReduction):
        SplitCurve(0, 5, -5).reduce(5)


def test_to_quartic_regression(congruent):
    C, P0 = congruent
    Q = to_quartic(C, P0)
    assert Q.constants == (0, F(1, 4), F(1, 9), -1)
    e = [r - P0.x for r in C.roots]
    assert P0.y ** 2 == -e[0] * e[1] * e[2]


def test_to_quartic_errors():
    with pytest.raises(TwoTorsionBasePoint):
        to_quartic(SplitCurve(0, 5, -5), Point(F(5), F(0)))
    with pytest.raises(SingularTranslate):
        to_quartic(SplitCurve(0, 1, -1), Point(F(1), F(1)))
    with pytest.raises(NotOnCurve):
        to_quartic(SplitCurve(0, 5, -5), Point(F(1), F(1)))


def test_point_maps_examples(congruent):
    C, P0 = congruent
    Q = to_quartic(C, P0)
    with pytest.raises(MapsToInfinity):
        weierstrass_to_quartic_point(Q, P0)
    with pytest.raises(MapsToBasePointPair):
        quartic_to_weierstrass_point(Q, QuarticPoint(F(0), F(0)))
    P2 = scalar_mul(C, 2, P0)
    R = weierstrass_to_quartic_point(Q, P2)
    assert R.u == F(-144, 2257)
    assert R.v == P2.y / (6 * F(2257, 144) ** 2)
    assert Q.contains(R)
    assert quartic_to_weierstrass_point(Q, R) == P2


@given(curve_through_point(), st.integers(-5, 5))
def test_round_trip_and_identity(cp, n):
    C, P0 = cp
    Q = to_quartic(C, P0)
    e = [r - P0.x for r in C.roots]
    assert P0.y ** 2 == -e[0] * e[1] * e[2]
    assert Q.c0 == 0
    P = scalar_mul(C, n, P0)
    if P is None or P.x == P0.x:
        return
    R = weierstrass_to_quartic_point(Q, P)
    assert Q.contains(R)
    assert quartic_to_weierstrass_point(Q, R) == P


@given(fp_curve(primes=(11, 13, 101, 103)))
def test_round_trip_over_fp(C):
    p = C.p
    base = next((P for P in C.points() if P is not None and P.y != 0 and P.x not in C.roots), None)
    if base is None:
        return
    Q = to_quartic(C, base)
    for P in C.points():
        if P is None or P.x == base.x:
            continue
        R = weierstrass_to_quartic_point(Q, P)
        assert Q.contains(R)
        assert quartic_to_weierstrass_point(Q, R) == P


def test_torsion_examples(congruent):
    C, P = congruent
    tors = torsion_subgroup_Q(C)
    assert set(tors) == {O, Point(0, 0), Point(5, 0), Point(-5, 0)}
    assert not is_torsion_Q(C, P)
    assert {O, Point(0, 0), Point(1, 0), Point(-1, 0)} <= set(torsion_subgroup_Q(SplitCurve(0, 1, -1)))


@pytest.mark.parametrize(
    "roots, size",
    [((1, 2, -2), 8), ((0, 5, -5), 4), ((0, -1, -49), 8), ((0, 7, -10), 4), ((F(1, 2), F(3, 2), F(-5, 2)), 8)],
)
def test_torsion_sizes_and_closure(roots, size):
    C = SplitCurve(*roots)
    tors = torsion_subgroup_Q(C)
    assert len(tors) == size
    ts = set(tors)
    for A in tors:
        assert C.neg(A) in ts
        for B in tors:
            assert C.add(A, B) in ts


def test_is_double_examples(congruent):
    C, P = congruent
    assert not is_double(C, P)
    assert halve(C, P) == []
    with pytest.raises(TwoTorsionInput):
        is_double(C, Point(F(0), F(0)))


@given(curve_through_point(), st.integers(1, 3))
def test_is_double_agrees_with_halving(cp, n):
    C, P0 = cp
    P = scalar_mul(C, n, P0)
    if P is None or P.y == 0:
        return
    D = C.add(P, P)
    if D is None or D.y == 0:
        return
    assert is_double(C, D)
    halves = halve(C, D)
    assert P in halves and all(C.add(H, H) == D for H in halves)
    assert is_double(C, P) == bool(halve(C, P))


def test_is_double_over_fp_matches_image():
    C = SplitCurve(0, 1, 12, p=13)
    doubles = {C.add(P, P) for P in C.points()}
    for P in C.points():
        if P is not None and P.y != 0:
            assert is_double(C, P) == (P in doubles)


def test_conjugation_and_trace(congruent):
    C, P = congruent
    assert conjugate_point(P) == P
    assert trace_point(C, P) == C.add(P, P)
    s = QuadExtElement(0, 3, 2)
    R = Point(F(1), s)
    assert conjugate_point(R) == Point(F(1), QuadExtElement(0, -3, 2))
    assert conjugate_point(conjugate_point(R)) == R
    # a twist point: x rational, y = s*sqrt(d), trace is O
    C2 = SplitCurve(0, 1, -1)
    x = F(2)  # rhs = 6, so y = sqrt 6
    T = Point(x, QuadExtElement(0, 1, 6))
    assert C2.contains(T)
    assert trace_point(C2, T) is None


def test_trace_of_generic_quadratic_point(congruent):
    C, B = congruent
    A = Point(F(1), QuadExtElement(0, 2, -6))  # rhs(1) = -24 = -6 * 2^2
    assert C.contains(A)
    P = C.add(A, B)
    assert isinstance(P.x, QuadExtElement) and isinstance(P.y, QuadExtElement)
    T = trace_point(C, P)
    # (A + B) + (conj(A) + B) = O + 2B
    assert T == C.add(B, B)
    assert conjugate_point(T) == T
