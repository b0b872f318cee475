"""Combination weights and combined forecasts.

Weight schemes (all return nonnegative weights summing to one):

    avg       1/m
    std       (S - S_j) / S / (m - 1), S_j the error standard deviation
    devcoef   same shape with deviation-from-the-cross-method-mean coefficients
    lsm       diagonal least squares, w_j proportional to 1 / sum_t eps_jt^2
    lsm_exact full-covariance least squares on the simplex (grid refinement)
    ed        effective degree S = E (1 - sigma) of the pointwise accuracy
    grd       normalized grey relation degrees
    gro       weights maximizing the grey relation degree of the combination
    rs        rough-set attribute importance from conditional entropies

Errors follow e_j(t) = y(t) - yhat_j(t).
"""
from __future__ import annotations

import itertools
import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import ConfigError, DataError

SCHEMES = ("avg", "std", "devcoef", "lsm", "lsm_exact", "ed", "grd", "gro", "rs")
FORMS = ("arithmetic", "geometric", "harmonic")
STAGE1_ALLOWED = ("rs", "gro", "grd", "lsm", "ed")

# the simplex grid search never enumerates more points than this per pass
GRID_BUDGET = 60_000
IMPROVE_RTOL = 1e-12


@dataclass(frozen=True)
class ForecastMatrix:
    actual: np.ndarray
    forecasts: np.ndarray  # (m, N)
    labels: tuple = ()

    def __post_init__(self):
        y = np.asarray(self.actual, dtype=float)
        f = np.atleast_2d(np.asarray(self.forecasts, dtype=float))
        if y.ndim != 1 or f.shape[1] != len(y):
            raise DataError(f"forecasts shape {f.shape} not aligned with {len(y)} actuals")
        if f.shape[0] < 1:
            raise DataError("need at least one forecast sequence")
        if not (np.all(np.isfinite(y)) and np.all(np.isfinite(f))):
            raise DataError("forecast matrix contains non-finite values")
        labels = tuple(self.labels) or tuple(str(j + 1) for j in range(f.shape[0]))
        if len(labels) != f.shape[0]:
            raise DataError("one label per forecast sequence")
        object.__setattr__(self, "actual", y)
        object.__setattr__(self, "forecasts", f)
        object.__setattr__(self, "labels", labels)

    @property
    def m(self) -> int:
        return self.forecasts.shape[0]

    @property
    def n(self) -> int:
        return self.forecasts.shape[1]

    @property
    def errors(self) -> np.ndarray:
        """e_j(t) = y(t) - yhat_j(t), shape (m, N)."""
        return self.actual[None, :] - self.forecasts

    def take(self, idx) -> "ForecastMatrix":
        idx = list(idx)
        return ForecastMatrix(self.actual, self.forecasts[idx], tuple(self.labels[i] for i in idx))


@dataclass(frozen=True)
class WeightVector:
    weights: np.ndarray
    method: str = ""

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if w.ndim != 1 or len(w) < 1:
            raise DataError("weights must be a nonempty vector")
        if np.any(w < 0) or abs(w.sum() - 1.0) > 1e-12:
            raise DataError(f"weights {w} are not on the simplex")
        w = w.copy()
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    def __len__(self):
        return len(self.weights)


@dataclass(frozen=True)
class GreyRelationReport:
    gamma_per_method: np.ndarray
    coefficients: np.ndarray  # (m, N)
    rho: float


def _simplex(w, method: str) -> WeightVector:
    w = np.asarray(w, dtype=float)
    if np.any(w < 0):
        warnings.warn(f"{method}: negative weights clamped to 0", stacklevel=3)
        w = np.maximum(w, 0.0)
    s = w.sum()
    if not s > 0:
        w = np.ones_like(w)
        s = w.sum()
    w = w / s
    # push the rounding residue onto the largest weight so the sum is 1 to the last bit
    w[int(np.argmax(w))] += 1.0 - w.sum()
    return WeightVector(np.maximum(w, 0.0), method)


# ---- combination forms -------------------------------------------------

def _check(fm: ForecastMatrix, w: WeightVector):
    if len(w) != fm.m:
        raise DataError(f"{len(w)} weights for {fm.m} forecasts")


def _positive(fm: ForecastMatrix):
    bad = np.argwhere(fm.forecasts <= 0)
    if bad.size:
        j, t = bad[0]
        raise DataError(f"nonpositive forecast at t={int(t)}, j={int(j)}")


def combine_arithmetic(fm: ForecastMatrix, w: WeightVector) -> np.ndarray:
    _check(fm, w)
    return w.weights @ fm.forecasts


def combine_geometric(fm: ForecastMatrix, w: WeightVector) -> np.ndarray:
    _check(fm, w)
    _positive(fm)
    return np.exp(w.weights @ np.log(fm.forecasts))


def combine_harmonic(fm: ForecastMatrix, w: WeightVector) -> np.ndarray:
    _check(fm, w)
    _positive(fm)
    return 1.0 / (w.weights @ (1.0 / fm.forecasts))


def combine(fm: ForecastMatrix, w: WeightVector, form: str = "arithmetic") -> np.ndarray:
    try:
        fn = {"arithmetic": combine_arithmetic, "geometric": combine_geometric,
              "harmonic": combine_harmonic}[form]
    except KeyError:
        raise ConfigError(f"unknown combination form {form!r}") from None
    return fn(fm, w)


# ---- classical schemes --------------------------------------------------

def weights_average(m: int) -> WeightVector:
    if m < 1:
        raise DataError("m must be >= 1")
    return _simplex(np.full(m, 1.0 / m), "avg")


def _dispersion_weights(s: np.ndarray, method: str) -> WeightVector:
    m = len(s)
    if m == 1:
        raise DataError(f"{method} weights need at least two methods")
    total = s.sum()
    if total == 0:
        return _simplex(np.ones(m), method)
    return _simplex((total - s) / total / (m - 1), method)


def weights_stddev(fm: ForecastMatrix) -> WeightVector:
    return _dispersion_weights(fm.errors.std(axis=1), "std")


def weights_devcoef(fm: ForecastMatrix) -> WeightVector:
    dev = fm.forecasts - fm.forecasts.mean(axis=0)
    d = np.sqrt(np.sum(dev ** 2, axis=1)) / fm.n
    return _dispersion_weights(d, "devcoef")


def weights_least_squares(fm: ForecastMatrix) -> WeightVector:
    """Diagonal closed form: cross products of errors are taken as zero."""
    h = np.sum(fm.errors ** 2, axis=1)
    zero = h == 0
    if np.any(zero):
        return _simplex(zero.astype(float), "lsm")
    inv = 1.0 / h
    return _simplex(inv / inv.sum(), "lsm")


def weights_least_squares_exact(fm: ForecastMatrix) -> WeightVector:
    e = fm.errors
    H = e @ e.T
    w = simplex_maximize(lambda W: -np.einsum("ij,jk,ik->i", W, H, W), fm.m)
    return _simplex(w, "lsm_exact")


def _accuracy_series(fm: ForecastMatrix) -> np.ndarray:
    zero = np.flatnonzero(fm.actual == 0)
    if zero.size:
        raise DataError(f"zero actual value at index {int(zero[0])}")
    return np.clip(1.0 - np.abs(fm.errors / fm.actual[None, :]), 0.0, 1.0)


def effective_degree(fm: ForecastMatrix) -> np.ndarray:
    A = _accuracy_series(fm)
    E = A.mean(axis=1)
    sigma = np.sqrt(np.sum((A - E[:, None]) ** 2, axis=1)) / fm.n
    return E * (1.0 - sigma)


def weights_effective_degree(fm: ForecastMatrix) -> WeightVector:
    S = effective_degree(fm)
    if S.sum() == 0:
        return _simplex(np.ones(fm.m), "ed")
    return _simplex(S / S.sum(), "ed")


# ---- grey relation ------------------------------------------------------

def _grey_constants(abs_err: np.ndarray) -> tuple[float, float]:
    return float(abs_err.min()), float(abs_err.max())


def grey_relation_degree(fm: ForecastMatrix, rho: float = 0.5) -> GreyRelationReport:
    if not 0 < rho < 1:
        raise ConfigError(f"identification coefficient must lie in (0, 1), got {rho}")
    a = np.abs(fm.errors)
    lo, hi = _grey_constants(a)
    if hi == 0:
        coef = np.ones_like(a)
    else:
        coef = (lo + rho * hi) / (a + rho * hi)
    return GreyRelationReport(coef.mean(axis=1), coef, rho)


def weights_grey_relation(fm: ForecastMatrix, rho: float = 0.5) -> WeightVector:
    g = grey_relation_degree(fm, rho).gamma_per_method
    return _simplex(g / g.sum(), "grd")


def grey_objective(fm: ForecastMatrix, rho: float = 0.5) -> Callable[[np.ndarray], np.ndarray]:
    """gamma(W) for a batch of weight rows, with the min/max constants of the base errors.

    The constants are held fixed, so gamma decreases monotonically in every
    |combined error| and a vertex W scores exactly its method's degree. A
    combination that beats every base method can score above 1.
    """
    e = fm.errors
    lo, hi = _grey_constants(np.abs(e))

    def gamma(W):
        W = np.atleast_2d(W)
        if hi == 0:
            return np.ones(len(W))
        comb = np.abs(W @ e)
        return np.mean((lo + rho * hi) / (comb + rho * hi), axis=1)

    return gamma


def weights_optimal_grey(fm: ForecastMatrix, rho: float = 0.5) -> WeightVector:
    if not 0 < rho < 1:
        raise ConfigError(f"identification coefficient must lie in (0, 1), got {rho}")
    w = simplex_maximize(grey_objective(fm, rho), fm.m)
    return _simplex(w, "gro")


# ---- simplex search -----------------------------------------------------

def simplex_grid(m: int, divisions: int) -> np.ndarray:
    """Every point of the simplex with coordinates in multiples of 1/divisions."""
    if m == 1:
        return np.ones((1, 1))
    bars = np.array(list(itertools.combinations(range(divisions + m - 1), m - 1)))
    edges = np.column_stack([np.full(len(bars), -1), bars, np.full(len(bars), divisions + m - 1)])
    return (np.diff(edges, axis=1) - 1) / divisions


def _coarse_divisions(m: int) -> int:
    for n in (100, 50, 40, 20, 10, 5, 2, 1):
        if math.comb(n + m - 1, m - 1) <= GRID_BUDGET:
            return n
    return 1


def _local_offsets(m: int, radius: int) -> np.ndarray:
    """Integer offset vectors with zero sum and every entry in [-radius, radius]."""
    free = np.array(list(itertools.product(range(-radius, radius + 1), repeat=m - 1)))
    last = -free.sum(axis=1)
    keep = np.abs(last) <= radius
    return np.column_stack([free[keep], last[keep]])


def _batched(f, W: np.ndarray, chunk: int = 20_000) -> np.ndarray:
    return np.concatenate([np.asarray(f(W[i:i + chunk]), dtype=float)
                           for i in range(0, len(W), chunk)])


def _improve(f, W, best_w, best_v):
    W = W[np.all(W >= -1e-15, axis=1)]
    if not len(W):
        return best_w, best_v
    W = np.maximum(W, 0.0)
    v = _batched(f, W)
    i = int(np.argmax(v))  # first maximum in enumeration order
    # gains below rounding level are ignored, so flat objectives keep the incumbent
    if v[i] > best_v + IMPROVE_RTOL * max(abs(best_v), np.finfo(float).tiny):
        return W[i].copy(), float(v[i])
    return best_w, best_v


def _golden(g, lo: float, hi: float, tol: float = 1e-10) -> float:
    r = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c, d = b - r * (b - a), a + r * (b - a)
    gc, gd = g(c), g(d)
    while b - a > tol:
        if gc >= gd:
            b, d, gd = d, c, gc
            c = b - r * (b - a)
            gc = g(c)
        else:
            a, c, gc = c, d, gd
            d = a + r * (b - a)
            gd = g(d)
    return 0.5 * (a + b)


def simplex_maximize(f, m: int, final_step: float = 1e-4) -> np.ndarray:
    """Deterministic maximization of ``f`` (batched over weight rows) on the simplex.

    The centroid is the starting incumbent and is only replaced by a strictly
    better point, so objectives that are symmetric in the methods return
    uniform weights. A coarse simplex grid (every vertex included) is followed
    by local grids, each ten times finer, centred on the incumbent.
    """
    if m == 1:
        return np.ones(1)
    best_w = np.full(m, 1.0 / m)
    best_v = float(f(best_w[None, :])[0])
    if m == 2:
        grid = simplex_grid(2, 100)
        best_w, best_v = _improve(f, grid, best_w, best_v)
        g = lambda t: float(f(np.array([[t, 1.0 - t]]))[0])
        t0 = best_w[0]
        t = _golden(g, max(0.0, t0 - 0.01), min(1.0, t0 + 0.01))
        return _improve(f, np.array([[t, 1.0 - t]]), best_w, best_v)[0]
    divisions = _coarse_divisions(m)
    best_w, best_v = _improve(f, simplex_grid(m, divisions), best_w, best_v)
    step = 1.0 / divisions
    radius = 10
    while step > final_step * (1 + 1e-9):
        step /= radius
        if (2 * radius + 1) ** (m - 1) > 4 * GRID_BUDGET:
            radius_used = max(2, int((4 * GRID_BUDGET) ** (1.0 / (m - 1)) // 2))
        else:
            radius_used = radius
        offs = _local_offsets(m, radius_used)
        best_w, best_v = _improve(f, best_w[None, :] + offs * step, best_w, best_v)
    return best_w


# ---- rough set ----------------------------------------------------------

def quantile_classes(x, classes: int) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    edges = np.quantile(x, np.linspace(0.0, 1.0, classes + 1)[1:-1])
    return np.searchsorted(edges, x, side="left")


def conditional_entropy(decision: np.ndarray, condition: np.ndarray | None) -> float:
    """H(D|C) in nats; ``condition`` holds one attribute per column (None means no attributes)."""
    n = len(decision)
    if condition is None or condition.shape[1] == 0:
        groups = np.zeros(n, dtype=int)
    else:
        _, groups = np.unique(condition, axis=0, return_inverse=True)
        groups = groups.ravel()
    h = 0.0
    for g in np.unique(groups):
        d = decision[groups == g]
        p = np.bincount(d) / len(d)
        p = p[p > 0]
        h += len(d) / n * float(-np.sum(p * np.log(p)))
    return h


def rough_set_importance(fm: ForecastMatrix, classes: int = 5) -> np.ndarray:
    if classes < 2:
        raise ConfigError("rough-set classes must be >= 2")
    if fm.n < classes:
        raise DataError(f"{fm.n} observations fewer than {classes} classes")
    D = quantile_classes(fm.actual, classes)
    if len(np.unique(D)) < 2:
        raise DataError("actual series discretizes to a single class")
    C = np.column_stack([quantile_classes(f, classes) for f in fm.forecasts])
    base = conditional_entropy(D, C)
    sig = np.array([conditional_entropy(D, np.delete(C, j, axis=1)) - base for j in range(fm.m)])
    return np.maximum(sig, 0.0)


def weights_rough_set(fm: ForecastMatrix, classes: int = 5) -> WeightVector:
    sig = rough_set_importance(fm, classes)
    if sig.sum() <= 0:
        return _simplex(np.ones(fm.m), "rs")
    return _simplex(sig / sig.sum(), "rs")


# ---- dispatch and two-stage --------------------------------------------

def fit_weights(fm: ForecastMatrix, method: str, rho: float = 0.5, classes: int = 5) -> WeightVector:
    if method not in SCHEMES:
        raise ConfigError(f"unknown weight scheme {method!r}; choose from {', '.join(SCHEMES)}")
    if method == "avg":
        return weights_average(fm.m)
    if method in ("grd", "gro"):
        return (weights_grey_relation if method == "grd" else weights_optimal_grey)(fm, rho)
    if method == "rs":
        return weights_rough_set(fm, classes)
    return {"std": weights_stddev, "devcoef": weights_devcoef, "lsm": weights_least_squares,
            "lsm_exact": weights_least_squares_exact, "ed": weights_effective_degree}[method](fm)


def scheme_label(method: str, classes: int = 5) -> str:
    return f"RS-{classes}" if method == "rs" else method.upper()


@dataclass(frozen=True)
class TwoStageModel:
    stage1: tuple  # WeightVector per stage-1 scheme
    stage2: dict = field(default_factory=dict)  # stage-2 scheme -> WeightVector over stage-1 models

    @property
    def stage1_methods(self) -> tuple:
        return tuple(w.method for w in self.stage1)

    def stage1_matrix(self, fm: ForecastMatrix) -> ForecastMatrix:
        rows = np.array([combine_arithmetic(fm, w) for w in self.stage1])
        return ForecastMatrix(fm.actual, rows, self.stage1_methods)

    def apply(self, fm: ForecastMatrix) -> dict:
        """Stage-2 combined forecast for every stage-2 scheme."""
        inner = self.stage1_matrix(fm)
        return {k: combine_arithmetic(inner, w) for k, w in self.stage2.items()}


def fit_two_stage(fm: ForecastMatrix, stage1_methods: Sequence[str], stage2_methods: Sequence[str],
                  rho: float = 0.5, classes: int = 5) -> TwoStageModel:
    if fm.m < 2:
        raise DataError("two-stage combining needs at least two base forecasts")
    bad = [s for s in stage1_methods if s not in STAGE1_ALLOWED]
    if bad:
        raise ConfigError(f"stage-1 schemes must come from {STAGE1_ALLOWED}, got {bad}")
    stage1 = tuple(fit_weights(fm, s, rho, classes) for s in stage1_methods)
    model = TwoStageModel(stage1)
    inner = model.stage1_matrix(fm)
    stage2 = {s: fit_weights(inner, s, rho, classes) for s in stage2_methods}
    return TwoStageModel(stage1, stage2)


def two_stage_combine(fm: ForecastMatrix, stage1_methods: Sequence[str], stage2_method: str,
                      rho: float = 0.5, classes: int = 5):
    """Fit and apply both stages on the same window; returns (sequence, audit)."""
    model = fit_two_stage(fm, stage1_methods, [stage2_method], rho, classes)
    out = model.apply(fm)[stage2_method]
    audit = {"stage1": {w.method: w.weights for w in model.stage1},
             "stage2": {stage2_method: model.stage2[stage2_method].weights}}
    return out, audit
