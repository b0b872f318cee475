import numpy as np
import pytest
from hypothesis import given, strategies as st

from hybridfx import ga_tune, svm_core
from hybridfx.config import GaConfig

BOUNDS = ((0.001, 10.0), (1.0, 2000.0))


def surrogate(x):
    """Smooth quadratic bowl with its peak inside the default box."""
    a, g = x
    return -((a - 2.5) / 10.0) ** 2 - ((g - 700.0) / 2000.0) ** 2


@given(st.integers(0, 10_000))
def test_history_monotone(seed):
    rep = ga_tune.evolve(surrogate, BOUNDS, GaConfig(population=8, generations=10, rng_seed=seed))
    h = np.array(rep.history)
    assert len(h) == 11 and np.all(np.diff(h) >= 0)
    assert rep.best_fitness == h[-1]


@pytest.mark.parametrize("seed", range(5))
def test_ga_beats_random_search(seed):
    rep = ga_tune.evolve(surrogate, BOUNDS, GaConfig(population=20, generations=30, rng_seed=seed))
    _, rs = ga_tune.random_search(surrogate, BOUNDS, 600, seed)
    assert rep.best_fitness >= rs


def test_deterministic():
    cfg = GaConfig(population=10, generations=5, rng_seed=3)
    assert ga_tune.evolve(surrogate, BOUNDS, cfg) == ga_tune.evolve(surrogate, BOUNDS, cfg)
    other = ga_tune.evolve(surrogate, BOUNDS, GaConfig(population=10, generations=5, rng_seed=4))
    assert other.best_params != ga_tune.evolve(surrogate, BOUNDS, cfg).best_params


def test_individuals_stay_in_bounds():
    rep = ga_tune.evolve(surrogate, BOUNDS, GaConfig(population=10, generations=10, mutation_rate=1.0,
                                                      mutation_scale=5.0))
    for x, _ in rep.evaluated:
        assert BOUNDS[0][0] <= x[0] <= BOUNDS[0][1] and BOUNDS[1][0] <= x[1] <= BOUNDS[1][1]


def test_failures_score_minus_inf():
    def flaky(x):
        if x[0] < 5:
            raise ValueError("bad region")
        return -x[0]
    rep = ga_tune.evolve(flaky, BOUNDS, GaConfig(population=6, generations=3))
    assert np.isfinite(rep.best_fitness) and rep.best_params[0] >= 5


def test_zero_generations():
    rep = ga_tune.evolve(surrogate, BOUNDS, GaConfig(population=5, generations=0))
    assert len(rep.history) == 1 and len(rep.evaluated) == 5


def test_fitness_composite():
    rng = np.random.default_rng(0)
    X = rng.normal(size=(30, 2))
    y = X.sum(axis=1)
    fit_set, cal_set = ga_tune.calibration_split(X, y, 0.2)
    assert len(cal_set[1]) == 6
    spec = svm_core.KernelSpec("rbf", 1.0)
    cal, fit = ga_tune.fitness_terms(fit_set, cal_set, spec, 10.0)
    assert ga_tune.fitness(fit_set, cal_set, spec, 10.0) == pytest.approx(-(0.3 * cal + 0.7 * fit))


def test_tune_reports_rmse():
    rng = np.random.default_rng(1)
    X = rng.normal(size=(25, 2))
    y = np.sin(X[:, 0])
    fit_set, cal_set = ga_tune.calibration_split(X, y)
    rep = ga_tune.tune(fit_set, cal_set, "rbf", GaConfig(population=6, generations=3, a_min=0.1))
    assert np.isfinite(rep.rmse_calibration) and np.isfinite(rep.rmse_fitting)
    assert rep.best_fitness == pytest.approx(-(0.3 * rep.rmse_calibration + 0.7 * rep.rmse_fitting))
