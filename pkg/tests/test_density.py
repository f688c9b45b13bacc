import random
from fractions import Fraction as F
from itertools import product

import pytest
from hypothesis import given, strategies as st

from qforge.arith import FpElement, fp_square_class
from qforge.curves import Point, QuarticCurve, SplitCurve, to_quartic
from qforge.density import (
    AvoidBudget,
    AvoidanceWitness,
    SweepConfig,
    aggregate,
    avoidance_search,
    compatible_tuples,
    instance_rng,
    multiquadratic_count,
    prime_sweep,
    quartic_to_group,
    random_forms,
    random_model,
    reduce_model,
    subgroup_mE,
    verify_witness,
)
from qforge.errors import BadReductionF, TorsionNotRational


def oracle_count(cs, forms, p):
    def good(u):
        val = 1
        for c in cs:
            val = val * (u + c) % p
        return val != 0 and fp_square_class(FpElement(val, p)).is_residue

    return sum(all(good((a * u + b) % p) for a, b in forms) for u in range(p))


def test_multiquadratic_example_p17():
    Q = to_quartic(SplitCurve(0, 5, -5), Point(F(-4), F(6))).constants
    cs = [c.numerator * pow(c.denominator, -1, 17) % 17 for c in Q]
    rep = multiquadratic_count(cs, [(1, 0)], 17)
    assert rep.epsilon_bound == F(17, 4)
    assert rep.count == oracle_count(cs, [(1, 0)], 17)
    assert rep.count > 4 and rep.passed


def test_multiquadratic_trivial_cases():
    cs = (0, 1, 2, 3)
    assert multiquadratic_count(cs, [], 101).count == 101
    once = multiquadratic_count(cs, [(3, 7)], 101).count
    assert multiquadratic_count(cs, [(3, 7), (3, 7)], 101).count == once
    with pytest.raises(BadReductionF):
        multiquadratic_count((0, 1, 1, 3), [(1, 0)], 101)
    with pytest.raises(ValueError):
        multiquadratic_count(cs, [(0, 1)], 101)


@given(st.sampled_from([101, 103, 997, 1009, 7919]), st.integers(0, 3), st.integers(0, 10**6))
def test_multiquadratic_matches_oracle(p, n, seed):
    rng = random.Random(seed)
    Q = random_model(rng, p)
    forms = random_forms(rng, p, n)
    rep = multiquadratic_count(Q, forms, p)
    assert 0 <= rep.count <= p
    assert rep.passed == (rep.count > rep.epsilon_bound)
    assert rep.heuristic == F(p, 2**n)
    if p < 1100:
        assert rep.count == oracle_count(Q.constants, forms, p)


def test_compatible_tuples_counts():
    p = 101
    Q = random_model(random.Random(4), p)
    squares = {x * x % p for x in range(1, p)}
    res = next(u for u in range(p) if Q.f(u) in squares)
    non = next(u for u in range(p) if Q.f(u) and Q.f(u) not in squares)
    assert len(compatible_tuples(Q, [[(1, 0)]], [res])) == 2
    assert compatible_tuples(Q, [[(1, 0)]], [non]) == []
    sig = [[(1, 0), (2, 3)], [(5, 1), (1, 9)]]
    for u1, u2 in [(3, 4), (10, 20), (res, non)]:
        both = compatible_tuples(Q, sig, [u1, u2])
        a = compatible_tuples(Q, sig[:1], [u1])
        b = compatible_tuples(Q, sig[1:], [u2])
        assert len(both) == len(a) * len(b)
        # direct enumeration over all quartic points
        pts = [(u, v) for u in range(p) for v in range(p) if v * v % p == Q.f(u)]
        want = {u1 * a_ + b_ for a_, b_ in sig[0]}
        want = {x % p for x in want}
        assert sorted(t[0] for t in a) == sorted(tuple(x) for x in pts if x[0] in want)


def test_subgroup_mE_examples():
    E = SplitCurve(0, 1, -1, p=7)
    assert len(E.points()) == 8
    assert len(subgroup_mE(E, 2)) == 2
    assert subgroup_mE(E, 1) == frozenset(E.points())
    with pytest.raises(TorsionNotRational):
        subgroup_mE(E, 4)  # 4 does not divide 6
    with pytest.raises(TorsionNotRational):
        subgroup_mE(SplitCurve(0, 1, -1, p=11), 5)


@pytest.mark.parametrize("seed", range(8))
def test_subgroup_mE_is_index_m2_subgroup(seed):
    rng = random.Random(seed)
    p = rng.choice([103, 109, 113, 127, 131, 137])
    E = random_model(rng, p).base
    H = subgroup_mE(E, 2)
    assert None in H
    assert len(H) * 4 == len(E.points())
    for A in H:
        for B in H:
            assert E.add(A, B) in H


def test_avoidance_k1_is_direct_membership():
    p = 103
    Q = random_model(random.Random(1), p)
    sig = [[(1, 0)]]
    w = avoidance_search(Q, sig, 2, AvoidBudget(max_tuples=p))
    assert w is not None
    H = subgroup_mE(Q.base, 2)
    for (R,) in compatible_tuples(Q, sig, w.u_tuple):
        assert quartic_to_group(Q, R) not in H
    assert verify_witness(Q, sig, 2, w)


@pytest.mark.parametrize("seed", range(6))
def test_small_witness_found_and_verified(seed):
    rng = instance_rng(seed, 0, "t")
    p = rng.choice([101, 107, 131, 163, 199])
    Q = random_model(rng, p)
    sig = [random_forms(rng, p, 2) for _ in range(2)]
    w = avoidance_search(Q, sig, 2)
    assert w is not None and verify_witness(Q, sig, 2, w)


def test_verify_witness_rejects_false_witness():
    p = 101
    Q = random_model(random.Random(3), p)
    sig = [[(1, 0)], [(1, 1)]]
    H = subgroup_mE(Q.base, 2)
    bad = None
    for u1, u2 in product(range(p), repeat=2):
        tups = compatible_tuples(Q, sig, (u1, u2))
        if tups and any(quartic_to_group(Q, t[0]) in H for t in tups):
            bad = AvoidanceWitness(p, 2, (u1, u2), len(tups))
            break
    assert bad is not None and not verify_witness(Q, sig, 2, bad)


def test_avoidance_not_found_when_m_is_large():
    p = 101
    Q = random_model(random.Random(0), p)
    assert avoidance_search(Q, [[(1, 0)]], 100, AvoidBudget(max_tuples=50)) is None
    assert avoidance_search(Q, [[(1, 0)]], 7, AvoidBudget(max_tuples=50)) is None


def test_reduce_model_matches_to_quartic():
    C, P0 = SplitCurve(0, 5, -5), Point(F(-4), F(6))
    Q = reduce_model(C, P0, 101)
    assert Q.constants == tuple(int(c.numerator * pow(c.denominator, -1, 101) % 101) for c in to_quartic(C, P0).constants)


def test_prime_sweep_small_range():
    out = prime_sweep(SweepConfig(prime_min=100, prime_max=1000, n=2, seed=0))
    dens = [r for r in out["records"] if r["kind"] == "density"]
    assert [r["p"] for r in dens] == sorted(r["p"] for r in dens)
    assert out["aggregate"]["all_pass"] and out["aggregate"]["all_weil"]
    assert prime_sweep(SweepConfig(prime_min=1000, prime_max=1000))["aggregate"] == aggregate([])


def test_sweep_is_deterministic_and_thread_independent():
    cfg = SweepConfig(prime_min=100, prime_max=300, n=2, k=2, seed=5, budget=3000)
    assert prime_sweep(cfg) == prime_sweep(cfg, threads=2)


def test_mean_ratio_tends_to_one():
    low = prime_sweep(SweepConfig(prime_min=100, prime_max=400, n=2, form_sets=4, seed=0))["aggregate"]
    high = prime_sweep(SweepConfig(prime_min=20000, prime_max=21000, n=2, form_sets=4, seed=0))["aggregate"]
    assert abs(float(high["mean_ratio"]) - 1) < 0.05
    assert float(high["min_ratio"]) > float(low["min_ratio"])
