"""Real-coded genetic algorithm for the kernel width and regularization.

Fitness is ``-(eta1 * RMSE_cal + eta2 * RMSE_fit)``: RMSE_fit is the in-sample
error on the fitting set, RMSE_cal the error on a held-out calibration set.

Operators: tournament selection of size 2, blend (BLX-alpha) crossover,
Gaussian mutation with standard deviation ``mutation_scale * (hi - lo)``,
clipping to bounds, and one elite carried into every generation. Each
individual draws from its own generator seeded by (seed, generation, slot),
so the result does not depend on evaluation order.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from . import svm_core
from .config import GaConfig
from .errors import HybridFxError


@dataclass(frozen=True)
class FitnessReport:
    best_params: tuple
    best_fitness: float
    history: tuple  # best fitness so far, one entry per generation (initial population first)
    rmse_calibration: float = math.nan
    rmse_fitting: float = math.nan
    evaluated: tuple = ()  # every individual evaluated, in order


def _rmse(a, b) -> float:
    a, b = np.asarray(a, float), np.asarray(b, float)
    return float(np.sqrt(np.mean((a - b) ** 2)))


def fitness_terms(fit_set, cal_set, spec: svm_core.KernelSpec, gamma: float) -> tuple[float, float]:
    """(RMSE_cal, RMSE_fit) for a model trained on ``fit_set``."""
    Xf, yf = fit_set
    Xc, yc = cal_set
    if len(yf) == 0 or len(yc) == 0:
        raise ValueError("fitting and calibration sets must be nonempty")
    model = svm_core.train(Xf, yf, spec, gamma)
    rmse_fit = _rmse(svm_core.predict(model, np.atleast_2d(Xf)), yf)
    rmse_cal = _rmse(svm_core.predict(model, np.atleast_2d(Xc)), yc)
    return rmse_cal, rmse_fit


def fitness(fit_set, cal_set, spec, gamma, eta1=0.3, eta2=0.7) -> float:
    rmse_cal, rmse_fit = fitness_terms(fit_set, cal_set, spec, gamma)
    return -(eta1 * rmse_cal + eta2 * rmse_fit)


def calibration_split(inputs, targets, fraction: float = 0.2):
    """Last ``ceil(fraction * N)`` samples form the calibration set."""
    X, y = np.asarray(inputs, float), np.asarray(targets, float)
    n_cal = max(1, math.ceil(fraction * len(y)))
    if n_cal >= len(y):
        raise ValueError("not enough samples for a calibration split")
    return (X[:-n_cal], y[:-n_cal]), (X[-n_cal:], y[-n_cal:])


def _rng(seed: int, generation: int, slot: int) -> np.random.Generator:
    return np.random.default_rng([seed, generation, slot])


def evolve(objective: Callable[[np.ndarray], float], bounds: Sequence[tuple], config: GaConfig,
           ) -> FitnessReport:
    """Maximize ``objective`` over the box ``bounds``."""
    config.validate()
    lo = np.array([b[0] for b in bounds], float)
    hi = np.array([b[1] for b in bounds], float)
    span = hi - lo
    P = config.population
    evaluated = []

    def score(x):
        try:
            f = float(objective(x))
        except (HybridFxError, np.linalg.LinAlgError, ValueError, FloatingPointError):
            f = -math.inf
        if not math.isfinite(f):
            f = -math.inf
        evaluated.append((tuple(float(v) for v in x), f))
        return f

    pop = np.array([lo + _rng(config.rng_seed, 0, i).random(len(lo)) * span for i in range(P)])
    fit = np.array([score(x) for x in pop])
    best = int(np.argmax(fit))
    best_x, best_f = pop[best].copy(), fit[best]
    history = [best_f]

    for g in range(1, config.generations + 1):
        new_pop = [best_x.copy()]
        new_fit = [best_f]
        for slot in range(1, P):
            rng = _rng(config.rng_seed, g, slot)
            parents = []
            for _ in range(2):
                i, j = rng.integers(0, P, size=2)
                parents.append(pop[i] if fit[i] >= fit[j] else pop[j])
            p1, p2 = parents
            if rng.random() < config.crossover_rate:
                cmin, cmax = np.minimum(p1, p2), np.maximum(p1, p2)
                ext = config.blend_alpha * (cmax - cmin)
                child = rng.uniform(cmin - ext, cmax + ext)
            else:
                child = p1.copy()
            mutate = rng.random(len(lo)) < config.mutation_rate
            child = child + mutate * rng.normal(0.0, config.mutation_scale * span)
            child = np.clip(child, lo, hi)
            new_pop.append(child)
            new_fit.append(score(child))
        pop, fit = np.array(new_pop), np.array(new_fit)
        i = int(np.argmax(fit))
        if fit[i] > best_f:
            best_x, best_f = pop[i].copy(), fit[i]
        history.append(best_f)

    return FitnessReport(tuple(float(v) for v in best_x), float(best_f), tuple(history),
                         evaluated=tuple(evaluated))


def random_search(objective, bounds, samples: int, seed: int) -> tuple[tuple, float]:
    """Uniform random search baseline; returns (best_x, best_value)."""
    lo = np.array([b[0] for b in bounds], float)
    hi = np.array([b[1] for b in bounds], float)
    rng = np.random.default_rng(seed)
    xs = lo + rng.random((samples, len(lo))) * (hi - lo)
    vals = np.array([objective(x) for x in xs])
    i = int(np.argmax(vals))
    return tuple(xs[i]), float(vals[i])


def tune(fit_set, cal_set, kernel_kind: str, config: GaConfig = GaConfig(),
         base_kernel: svm_core.KernelSpec | None = None) -> FitnessReport:
    """Search (width a, gamma) maximizing the composite fitness."""
    cfg = config.normalized()
    base = base_kernel or svm_core.KernelSpec(kernel_kind)

    def objective(x):
        spec = svm_core.KernelSpec(kernel_kind, float(x[0]), base.offset, base.degree, base.scale)
        return fitness(fit_set, cal_set, spec, float(x[1]), cfg.eta1, cfg.eta2)

    rep = evolve(objective, cfg.bounds, cfg)
    a, gamma = rep.best_params
    spec = svm_core.KernelSpec(kernel_kind, a, base.offset, base.degree, base.scale)
    try:
        rmse_cal, rmse_fit = fitness_terms(fit_set, cal_set, spec, gamma)
    except HybridFxError:
        rmse_cal = rmse_fit = math.nan
    return FitnessReport(rep.best_params, rep.best_fitness, rep.history, rmse_cal, rmse_fit,
                         rep.evaluated)
