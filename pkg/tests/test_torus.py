import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from surfrot.exceptions import DegenerateSlope
from surfrot.torus import (
    GOLDEN,
    OxtobyField,
    TorusPoint,
    cutting_sequence,
    divergence,
    flow,
    is_balanced,
    oxtoby_eval,
    torus_rotation_vector,
)


def test_field_worked_values():
    F = OxtobyField(0.3)
    assert oxtoby_eval(F, 0.0, 0.0) == (0.0, 0.0)
    assert oxtoby_eval(F, 0.5, 0.0) == pytest.approx((0.6, 0.6), abs=1e-15)
    assert oxtoby_eval(F, 0.0, 0.5) == pytest.approx((2.0, 0.6), abs=1e-15)
    assert F(TorusPoint(1.5, 2.0)) == pytest.approx((0.6, 0.6), abs=1e-12)


def test_alpha_range():
    for a in (0.0, 1.0, -0.2):
        with pytest.raises(ValueError):
            OxtobyField(a)


def test_divergence_free():
    g = np.linspace(0, 1, 100, endpoint=False)
    X, Y = np.meshgrid(g, g)
    assert np.max(np.abs(divergence(OxtobyField(), X, Y))) <= 1e-6


def test_fixed_point_does_not_move():
    v, _ = torus_rotation_vector(OxtobyField(), TorusPoint(0.0, 0.0), T=100.0)
    assert v == (0.0, 0.0)
    assert flow(OxtobyField(), TorusPoint(1.0, 2.0), 10.0).lift_x == 1.0


@pytest.fixture(scope="module")
def golden_runs():
    F = OxtobyField()
    return [torus_rotation_vector(F, TorusPoint(x, y), T=1e4, h=1e-3) for x, y in ((0.3, 0.1), (0.71, 0.45))]


def test_rotation_slope(golden_runs):
    slopes = [d["slope"] for _, d in golden_runs]
    for s in slopes:
        assert s == pytest.approx(GOLDEN, rel=2e-2)
    assert slopes[0] == pytest.approx(slopes[1], rel=2e-2)
    for _, d in golden_runs:
        assert d["cauchy_tail"] < 1e-2


def test_flow_is_periodic_in_lift():
    F = OxtobyField(0.4)
    a = flow(F, TorusPoint(0.2, 0.3), 5.0)
    b = flow(F, TorusPoint(1.2, -0.7), 5.0)
    assert (a.lift_x + 1 - b.lift_x, a.lift_y - 1 - b.lift_y) == pytest.approx((0.0, 0.0), abs=1e-9)


@pytest.mark.parametrize("slope", [GOLDEN, 0.3, math.sqrt(2) - 1, 2.5])
def test_cutting_density(slope):
    word, density = cutting_sequence(slope, 100_000)
    assert len(word) == 100_000
    assert density == pytest.approx(1.0 / (1.0 + slope), rel=1e-2)
    assert is_balanced(word[:4000], 400)


def test_cutting_worked_prefix():
    # slope 1/2 from the origin: x=1 alone, then x=2 and y=1 together as "ab"
    word, _ = cutting_sequence(0.5, 6)
    assert word == "babbab"


def test_cutting_degenerate():
    assert cutting_sequence(1e6, 1000)[1] == 0.0
    for s in (0.0, -1.0, math.inf, math.nan):
        with pytest.raises(DegenerateSlope):
            cutting_sequence(s, 10)


def test_unbalanced_word_detected():
    assert not is_balanced("aabb")
    assert is_balanced("abab")


@settings(max_examples=50, deadline=None)
@given(st.floats(0.05, 20.0))
def test_cutting_counts_match_lattice(slope):
    # after nb vertical lines the line sits in x in [nb, nb + 1)
    word, _ = cutting_sequence(slope, 500)
    nb, na = word.count("b"), word.count("a")
    assert slope * nb - 1 <= na <= slope * (nb + 1) + 1
