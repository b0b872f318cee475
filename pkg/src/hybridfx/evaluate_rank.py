"""Forecast performance measures and TOPSIS-style ranking of methods.

Errors are eps(t) = y(t) - yhat(t). Relative error is |eps| / |y| and the
accuracy is 100 (1 - mean relative error). Consistency (directional hit
rate) needs the actual value y(0) preceding the evaluation window.
"""
from __future__ import annotations

from dataclasses import dataclass, fields

import numpy as np

from .errors import ConfigError, DataError

CRITERIA = ("accuracy", "feasibility", "consistency", "mae", "rmse")
BENEFIT = np.array([True, True, True, False, False])
HEADLINE = ("accuracy", "feasibility", "consistency", "MAE", "RMSE")


@dataclass(frozen=True)
class PerformanceRecord:
    accuracy: float
    feasibility: float
    consistency: float
    mae: float
    rmse: float
    mse: float
    mape: float
    c_ratio: float
    small_error_p: float
    theil_u2: float
    mean_abs_rel_error: float

    def headline(self) -> tuple:
        return tuple(getattr(self, k) for k in CRITERIA)

    def as_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


def performance(actual, forecast, y0: float, feasibility_threshold: float = 0.005,
                theil: str = "printed") -> PerformanceRecord:
    y = np.asarray(actual, dtype=float)
    f = np.asarray(forecast, dtype=float)
    if y.shape != f.shape or y.ndim != 1 or len(y) < 2:
        raise DataError("actual and forecast must be aligned with length >= 2")
    if not (np.all(np.isfinite(y)) and np.all(np.isfinite(f)) and np.isfinite(y0)):
        raise DataError("non-finite values in evaluation window")
    zero = np.flatnonzero(y == 0)
    if zero.size:
        raise DataError(f"zero actual value at index {int(zero[0])}")
    if theil not in ("printed", "classical"):
        raise ConfigError(f"unknown theil variant {theil!r}")
    eps = y - f
    mse = float(np.mean(eps ** 2))
    mae = float(np.mean(np.abs(eps)))
    q = np.abs(eps) / np.abs(y)
    qbar = float(q.mean())
    prev = np.concatenate([[y0], y[:-1]])
    hits = (y - prev) * (f - prev) >= 0
    s1 = float(np.sqrt(np.mean((eps - eps.mean()) ** 2)))
    s2 = float(np.sqrt(np.mean((y - y.mean()) ** 2)))
    if s2 > 0:
        c = s1 / s2
    else:
        c = 0.0 if s1 == 0 else float("inf")
    denom = np.sum((f if theil == "printed" else y) ** 2)
    u2 = float(np.sum(eps ** 2) / denom) if denom > 0 else (0.0 if mse == 0 else float("inf"))
    return PerformanceRecord(
        accuracy=(1.0 - qbar) * 100.0,
        feasibility=float(np.mean(np.abs(eps) <= feasibility_threshold)) * 100.0,
        consistency=float(np.mean(hits)) * 100.0,
        mae=mae,
        rmse=float(np.sqrt(mse)),
        mse=mse,
        mape=qbar * 100.0,
        c_ratio=c,
        small_error_p=float(np.mean(np.abs(eps - eps.mean()) < 0.6745 * s2)) if s2 > 0
        else float(np.all(eps == eps.mean())),
        theil_u2=u2,
        mean_abs_rel_error=qbar,
    )


@dataclass(frozen=True)
class DecisionMatrix:
    alternatives: tuple
    values: np.ndarray  # (m, 5) in CRITERIA order
    weights: np.ndarray = np.array([0.15, 0.2, 0.3, 0.2, 0.15])

    def __post_init__(self):
        v = np.atleast_2d(np.asarray(self.values, dtype=float))
        w = np.asarray(self.weights, dtype=float)
        if v.shape[1] != len(CRITERIA):
            raise DataError(f"decision matrix needs {len(CRITERIA)} criteria columns")
        if len(self.alternatives) != v.shape[0]:
            raise DataError("one label per alternative")
        if v.shape[0] < 2:
            raise DataError("ranking needs at least two alternatives")
        if not np.all(np.isfinite(v)):
            raise DataError("decision matrix has non-finite entries")
        if len(w) != v.shape[1] or np.any(w < 0) or not w.sum() > 0:
            raise ConfigError("criterion weights must be 5 nonnegative numbers")
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "weights", w / w.sum())
        object.__setattr__(self, "alternatives", tuple(self.alternatives))

    @classmethod
    def from_records(cls, labels, records, weights=(0.15, 0.2, 0.3, 0.2, 0.15)):
        return cls(tuple(labels), np.array([r.headline() for r in records]), np.asarray(weights))

    def weighted_normalized(self) -> np.ndarray:
        norm = np.sqrt(np.sum(self.values ** 2, axis=0))
        zero = np.flatnonzero(norm == 0)
        if zero.size:
            raise DataError(f"criterion {CRITERIA[zero[0]]!r} is zero for every alternative")
        return self.values / norm * self.weights

    def ideal(self, v: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        best = np.where(BENEFIT, v.max(axis=0), v.min(axis=0))
        worst = np.where(BENEFIT, v.min(axis=0), v.max(axis=0))
        return best, worst


def ranks_from_scores(scores) -> np.ndarray:
    """1 = highest score; equal scores keep their original order."""
    order = np.argsort(-np.asarray(scores, dtype=float), kind="stable")
    r = np.empty(len(order), dtype=int)
    r[order] = np.arange(1, len(order) + 1)
    return r


def rank_rtopsis(dm: DecisionMatrix) -> tuple[np.ndarray, np.ndarray]:
    v = dm.weighted_normalized()
    best, worst = dm.ideal(v)
    dp = np.sqrt(np.sum((v - best) ** 2, axis=1))
    dn = np.sqrt(np.sum((v - worst) ** 2, axis=1))
    tot = dp + dn
    close = np.divide(dn, tot, out=np.full(len(v), 0.5), where=tot > 0)
    return ranks_from_scores(close), close


def _grey_coefficients(delta: np.ndarray, rho: float) -> np.ndarray:
    lo, hi = delta.min(), delta.max()
    if hi == 0:
        return np.ones_like(delta)
    return (lo + rho * hi) / (delta + rho * hi)


def rank_gctopsis(dm: DecisionMatrix, rho: float = 0.5) -> tuple[np.ndarray, np.ndarray]:
    """Closeness r+ / (r+ + r-) with mean grey coefficients to the ideal and anti-ideal rows."""
    if not 0 < rho < 1:
        raise ConfigError("identification coefficient must lie in (0, 1)")
    v = dm.weighted_normalized()
    best, worst = dm.ideal(v)
    rp = _grey_coefficients(np.abs(v - best), rho).mean(axis=1)
    rn = _grey_coefficients(np.abs(v - worst), rho).mean(axis=1)
    close = rp / (rp + rn)
    return ranks_from_scores(close), close


def rank_protopsis(dm: DecisionMatrix, rho: float = 0.5) -> tuple[np.ndarray, np.ndarray]:
    """Projection of each row's weighted grey coefficients (to the ideal) on the weight vector."""
    v = dm.weighted_normalized()
    best, _ = dm.ideal(v)
    xi = _grey_coefficients(np.abs(v - best), rho)
    w = dm.weights
    proj = xi @ (w ** 2) / np.linalg.norm(w)
    return ranks_from_scores(proj), proj


def comprehensive_rank(r1, r2, r3) -> np.ndarray:
    """Rank by the sum of the three rank positions; ties go to R1, then to input order."""
    r1, r2, r3 = (np.asarray(r, dtype=int) for r in (r1, r2, r3))
    if not (len(r1) == len(r2) == len(r3)):
        raise DataError("rank vectors must have equal length")
    total = r1 + r2 + r3
    order = np.lexsort((np.arange(len(r1)), r1, total))
    out = np.empty(len(r1), dtype=int)
    out[order] = np.arange(1, len(r1) + 1)
    return out


@dataclass(frozen=True)
class RankReport:
    alternatives: tuple
    r1: np.ndarray  # GCTOPSIS
    r2: np.ndarray  # PROTOPSIS
    r3: np.ndarray  # RTOPSIS
    comprehensive: np.ndarray
    closeness: dict


def rank_all(dm: DecisionMatrix, rho: float = 0.5) -> RankReport:
    r1, c1 = rank_gctopsis(dm, rho)
    r2, c2 = rank_protopsis(dm, rho)
    r3, c3 = rank_rtopsis(dm)
    return RankReport(dm.alternatives, r1, r2, r3, comprehensive_rank(r1, r2, r3),
                      {"gctopsis": c1, "protopsis": c2, "rtopsis": c3})
