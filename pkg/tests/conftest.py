from fractions import Fraction as F

import pytest
from hypothesis import HealthCheck, settings

from qforge.curves import Point, SplitCurve

settings.register_profile(
    "repo", deadline=None, derandomize=True, max_examples=60, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("repo")


@pytest.fixture
def congruent():
    """y^2 = x^3 - 25x with its non-torsion point (-4, 6)."""
    return SplitCurve(0, 5, -5), Point(F(-4), F(6))


@pytest.fixture
def rank_two():
    """y^2 = x(x-7)(x+10) with two independent points."""
    return SplitCurve(0, 7, -10), Point(F(-2), F(12)), Point(F(8), F(12))
