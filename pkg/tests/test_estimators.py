import math
from fractions import Fraction

import numpy as np
import pytest
from sklearn.base import clone

from surfrot.dynamics import IdentityMap, make_scenario
from surfrot.estimators import (
    NO_SPEED,
    TRACKED,
    EquidistributionTransformer,
    HomologyRotation,
    TrackingEstimator,
    axis_measure,
    boundary_limits,
    direction_increments,
    equidistribute,
    homology_rotation,
    rotation_speed,
    run_orbit,
    time_cocycle_mean,
    tracking_geodesic,
)
from surfrot.exceptions import NoEscape
from surfrot.geometry import dist
from surfrot.group import HomologyVector


@pytest.fixture(scope="module")
def single(scenario_runs):
    return scenario_runs("single-push")


def _axis_through(sc, G, point):
    return sc.dynamics.active(G.reduce(point)[0]).geodesic


def test_identity_map_orbit(G):
    rec = run_orbit(IdentityMap(G), 0.1 + 0.2j, 200, with_backward=True)
    assert np.all(rec.L == 0)
    fwd, bwd, _ = rotation_speed(rec)
    assert (fwd, bwd) == (0.0, 0.0)
    with pytest.raises(NoEscape):
        boundary_limits(rec)
    assert tracking_geodesic(rec).status == NO_SPEED
    vec, _ = homology_rotation(rec)
    assert vec.is_zero()


def test_seed_outside_supports_is_fixed(G):
    sc = make_scenario("single-push", G)
    axis = sc.dynamics.pushes[0].axis
    p = axis.point_from_fermi(0.5, 2.5 * sc.dynamics.pushes[0].radius)
    rec = run_orbit(sc.dynamics, p, 100)
    assert np.all(rec.L == 0)


def test_short_on_axis_orbit(G):
    sc = make_scenario("single-push", G)
    ell = sc.dynamics.pushes[0].spec.speed
    rec = run_orbit(sc.dynamics, sc.seeds[0]["point"], 100)
    assert np.max(np.abs(rec.L - ell * np.arange(101))) < 1e-4


def test_speed_and_limits_on_axis(G, single):
    sc, runs = single
    rec, est = runs["core-a1"]
    ell = sc.dynamics.pushes[0].length / 10
    fwd, bwd, diag = rotation_speed(rec)
    assert fwd == pytest.approx(ell, rel=1e-2)
    assert bwd == pytest.approx(fwd, rel=1e-2)
    assert diag["subadditivity_violations"] == 0
    axis = _axis_through(sc, G, rec.seed)
    alpha, omega, gap = boundary_limits(rec)
    assert alpha.distance(axis.alpha) < 1e-3 and omega.distance(axis.omega) < 1e-3
    assert gap < 1e-3


def test_angular_increments_bound(single):
    _, runs = single
    for rec, _ in runs.values():
        fwd, _, diag = rotation_speed(rec)
        inc = direction_increments(rec)
        n = np.arange(1, rec.N + 1)
        with np.errstate(over="ignore"):
            bound = np.sinh(diag["max_step"]) / np.sinh(0.9 * fwd * n)
        tail = slice(rec.N // 10, None)
        assert np.all(np.sin(inc[tail]) <= np.maximum(bound[tail], 1e-12))


def test_tracking_on_axis(G, single):
    sc, runs = single
    rec, fit = runs["core-a1"]
    est = fit.estimate_
    assert est.status == TRACKED
    assert np.max(est.residuals) <= 1e-3
    axis = _axis_through(sc, G, rec.seed)
    assert est.alpha_hat.distance(axis.alpha) < 1e-3
    assert est.omega_hat.distance(axis.omega) < 1e-3


def test_tracking_off_axis(single):
    _, runs = single
    rec, fit = runs["off-axis"]
    est = fit.estimate_
    assert est.status == TRACKED
    assert est.trend_decreasing()
    assert est.residuals[-1] <= 5e-2


def test_time_cocycle(single):
    _, runs = single
    rec, fit = runs["core-a1"]
    mean_t, _ = time_cocycle_mean(rec, fit.estimate_)
    assert mean_t == pytest.approx(fit.theta_, abs=1e-9)
    rec, fit = runs["off-axis"]
    mean_t, series = time_cocycle_mean(rec, fit.estimate_)
    assert mean_t == pytest.approx(fit.theta_, rel=2e-2)
    # each increment is bounded by the largest one-step displacement
    _, _, diag = rotation_speed(rec)
    assert series["max_increment"] <= diag["max_step"] + 1e-9


def test_homology_of_core_orbit(single):
    _, runs = single
    vec, series = homology_rotation(runs["core-a1"][0])
    assert vec == HomologyVector([Fraction(1, 10), 0, 0, 0])
    assert series.shape == (10_001, 4)


def test_trivial_homology_push(scenario_runs):
    _, runs = scenario_runs("trivial-homology-push")
    for rec, fit in runs.values():
        vec, series = homology_rotation(rec)
        assert vec.norm() <= 5e-2
        # partial sums stay bounded, so the running means decay
        assert np.abs(series[-1]).max() <= np.abs(series[100]).max() + 1e-12
        assert fit.theta_ > 0.4


def test_equidistribution_on_axis(G, single):
    sc, runs = single
    rec, fit = runs["core-a1"]
    m = equidistribute(rec, fit.estimate_)
    assert m.total_mass == pytest.approx(1.0, abs=1e-12)
    axis = _axis_through(sc, G, rec.seed)
    ref = axis_measure(G, axis, sc.dynamics.pushes[0].length, ds=1e-3)
    off = sum(v for k, v in m.bins.items() if k not in ref.support())
    assert off < 1e-6
    assert m.total_variation(ref) < 0.05


def test_equidistribution_two_seeds(single):
    _, runs = single
    (r1, f1), (r2, f2) = runs["core-a1"], runs["off-axis"]
    m1 = equidistribute(r1, f1.estimate_)
    m2 = equidistribute(r2, f2.estimate_)
    assert m1.total_variation(m2) <= 0.1


def test_speed_bounds_homology(scenario_runs):
    # the speed dominates a fixed multiple of the homological rotation
    ratios = []
    for name in ("single-push", "disjoint-pushes"):
        _, runs = scenario_runs(name)
        for rec, fit in runs.values():
            vec, _ = homology_rotation(rec)
            if not vec.is_zero():
                ratios.append(fit.theta_ / vec.norm())
    assert ratios and min(ratios) > 0


def test_sklearn_api(single):
    _, runs = single
    rec, _ = runs["core-a1"]
    est = TrackingEstimator(speed_floor=1e-3, gap_floor=1e-2)
    assert est.get_params() == {"speed_floor": 1e-3, "gap_floor": 1e-2}
    c = clone(est).set_params(gap_floor=0.05)
    assert c.gap_floor == 0.05
    assert est.fit(rec) is est
    pts = est.predict([0, 10])
    assert pts.shape == (2,)
    assert dist(complex(pts[0]), complex(est.geodesic_.origin)) < 1e-12
    assert est.score() <= 0
    h = HomologyRotation().fit(rec)
    assert h.predict() == pytest.approx([0.1, 0, 0, 0])
    tr = EquidistributionTransformer(cells=8, sectors=6).fit([])
    X = tr.transform([(rec, est.estimate_)])
    assert X.shape == (1, 8 * 8 * 6)
    assert X.sum() == pytest.approx(1.0)


def test_estimator_rejects_bad_input():
    with pytest.raises(TypeError):
        TrackingEstimator().fit([1, 2, 3])


def test_record_serialises(single):
    _, runs = single
    d = runs["core-a1"][0].to_dict()
    assert d["N"] == 10_000 and d["homology_sum"] == [1000, 0, 0, 0]
    assert math.isfinite(d["L_final"])
