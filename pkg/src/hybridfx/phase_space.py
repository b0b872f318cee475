"""Delay embedding with delay chosen by average mutual information (AMI)
and dimension chosen by false nearest neighbours (FNN).

State vectors look backwards in time::

    Y_k = [y(k), y(k - tau), ..., y(k - (dim - 1) tau)]

so that the supervised target for ``Y_k`` is ``y(k + 1)``.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import DataError

COINCIDENT_RTOL = 1e-10


@dataclass(frozen=True)
class AmiProfile:
    lags: np.ndarray
    values: np.ndarray  # bits
    bins: int


@dataclass(frozen=True)
class FnnProfile:
    dims: np.ndarray
    false_percent: np.ndarray
    threshold_percent: float
    truncated: bool = False

    @property
    def saturated(self) -> bool:
        return not np.any(self.false_percent <= self.threshold_percent)


@dataclass(frozen=True)
class EmbeddedMatrix:
    rows: np.ndarray  # (N_m, dim)
    tau: int
    dim: int
    source_length: int

    @property
    def index(self) -> np.ndarray:
        """Source index of the newest component of each row."""
        return np.arange((self.dim - 1) * self.tau, self.source_length)


def _bin_index(values: np.ndarray, bins: int) -> np.ndarray:
    lo, hi = values.min(), values.max()
    if hi <= lo:
        raise DataError("constant series: histogram range has zero width")
    idx = np.floor((values - lo) / (hi - lo) * bins).astype(int)
    return np.clip(idx, 0, bins - 1)


def mutual_information(values, lag: int, bins: int = 16) -> float:
    """Histogram mutual information (bits) between y(k) and y(k - lag).

    Equal-width bins over the full range of the series; ``lag=0`` gives the
    entropy of the marginal histogram.
    """
    y = np.asarray(values, dtype=float)
    if lag < 0 or lag >= len(y) - 1:
        raise DataError(f"lag {lag} out of range for length {len(y)}")
    idx = _bin_index(y, bins)
    return _mi_from_index(idx, lag, bins)


def _mi_from_index(idx: np.ndarray, lag: int, bins: int) -> float:
    cur, past = idx[lag:], idx[: len(idx) - lag]
    joint = np.zeros((bins, bins))
    np.add.at(joint, (cur, past), 1.0)
    joint /= joint.sum()
    pa, pb = joint.sum(axis=1), joint.sum(axis=0)
    nz = joint > 0
    ratio = joint[nz] / np.outer(pa, pb)[nz]
    return float(np.sum(joint[nz] * np.log2(ratio)))


def ami(values, max_lag: int = 20, bins: int = 16) -> AmiProfile:
    y = np.asarray(values, dtype=float)
    if len(y) <= max_lag + 1:
        raise DataError(f"series length {len(y)} too short for max_lag {max_lag}")
    if bins < 2:
        raise DataError("bins must be >= 2")
    idx = _bin_index(y, bins)
    lags = np.arange(1, max_lag + 1)
    vals = np.array([_mi_from_index(idx, int(t), bins) for t in lags])
    return AmiProfile(lags, vals, bins)


def select_delay(profile: AmiProfile, rule: str = "first_minimum") -> int:
    """First interior local minimum of I(tau), else the global minimum.

    Ties resolve toward the smaller lag.
    """
    v = profile.values
    if len(v) == 0:
        raise DataError("empty AMI profile")
    if rule == "first_minimum":
        for i in range(1, len(v) - 1):
            if v[i] < v[i - 1] and v[i] <= v[i + 1]:
                return int(profile.lags[i])
    elif rule != "global_minimum":
        raise ValueError(f"unknown delay rule {rule!r}")
    return int(profile.lags[int(np.argmin(v))])


def embed(values, tau: int, dim: int) -> EmbeddedMatrix:
    y = np.asarray(values, dtype=float)
    if tau < 1 or dim < 1:
        raise DataError("tau and dim must be positive")
    n_rows = len(y) - (dim - 1) * tau
    if n_rows < 1:
        raise DataError(f"series of length {len(y)} too short to embed at dim={dim}, tau={tau}")
    start = (dim - 1) * tau
    cols = [y[start - j * tau: start - j * tau + n_rows] for j in range(dim)]
    return EmbeddedMatrix(np.column_stack(cols), tau, dim, len(y))


def supervised_pairs(values, tau: int, dim: int) -> tuple[np.ndarray, np.ndarray]:
    """Inputs ``Y_k`` and targets ``y(k+1)`` for every k with a known successor."""
    y = np.asarray(values, dtype=float)
    em = embed(y[:-1], tau, dim)
    return em.rows, y[em.index + 1]


def _nearest(points: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Exhaustive nearest neighbour; equal distances resolve to the smaller index."""
    n = len(points)
    nn = np.empty(n, dtype=int)
    dist = np.empty(n)
    for i in range(n):
        d2 = np.sum((points - points[i]) ** 2, axis=1)
        d2[i] = np.inf
        j = int(np.argmin(d2))
        nn[i], dist[i] = j, np.sqrt(d2[j])
    return nn, dist


def fnn(values, tau: int, max_dim: int = 8, ratio_threshold: float = 1.0,
        distance_threshold: float = 15.0) -> FnnProfile:
    """Percentage of false nearest neighbours for dims 1..max_dim.

    At dimension D only points whose next-older component ``y(n - D tau)``
    exists take part; a neighbour is false when that component separates the
    pair by more than ``distance_threshold`` times their D-dimensional
    distance. Pairs closer than ``COINCIDENT_RTOL * max|y|`` are treated as
    coincident and count as false only if the extra component differs by
    more than that amount.
    """
    y = np.asarray(values, dtype=float)
    # distances below this are rounding noise (periodic samples repeat exactly)
    tiny = COINCIDENT_RTOL * float(np.max(np.abs(y))) if len(y) else 0.0
    dims, pct = [], []
    truncated = False
    for d in range(1, max_dim + 1):
        start = d * tau
        n_pts = len(y) - start
        if n_pts < 2:
            truncated = True
            warnings.warn(f"fnn: series too short beyond dim {d - 1}; profile truncated", stacklevel=2)
            break
        pts = np.column_stack([y[start - j * tau: start - j * tau + n_pts] for j in range(d)])
        extra = y[0:n_pts]  # y(n - d*tau) for n = start..N-1
        nn, dist = _nearest(pts)
        gap = np.abs(extra - extra[nn])
        with np.errstate(divide="ignore", invalid="ignore"):
            false = np.where(dist > tiny, gap > distance_threshold * dist, gap > tiny)
        dims.append(d)
        pct.append(100.0 * false.mean())
    if not dims:
        raise DataError("series too short for false nearest neighbour analysis")
    return FnnProfile(np.array(dims), np.array(pct), float(ratio_threshold), truncated)


def select_dim(profile: FnnProfile) -> int:
    """Smallest dimension at or below the threshold; the largest tested one otherwise."""
    ok = np.flatnonzero(profile.false_percent <= profile.threshold_percent)
    if ok.size:
        return int(profile.dims[ok[0]])
    warnings.warn("fnn: no dimension reached the threshold; returning max_dim", stacklevel=2)
    return int(profile.dims[-1])
