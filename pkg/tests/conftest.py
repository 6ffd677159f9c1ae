import pytest

from surfrot import build_group, make_scenario, run_orbit
from surfrot.estimators import TrackingEstimator

N_LONG = 10_000


@pytest.fixture(scope="session")
def G():
    return build_group(2)


@pytest.fixture(scope="session")
def scenario_runs(G):
    """Lazily computed long orbits shared across modules: name -> {label: (record, estimator)}."""
    cache = {}

    def get(name):
        if name not in cache:
            sc = make_scenario(name, G)
            runs = {}
            for s in sc.seeds:
                rec = run_orbit(sc.dynamics, s["point"], N_LONG, with_backward=True)
                runs[s["label"]] = (rec, TrackingEstimator().fit(rec))
            cache[name] = (sc, runs)
        return cache[name]

    return get
