"""Markov-chain correction of regression forecasts.

The relative residual ``z_t = (Y_t - Xhat_t) / Y_{t-1}`` is discretised
into ``k`` interval states. Two corrections are produced for the next step
and averaged:

* fuzzy Markov: triangular memberships, fuzzy transition frequencies
  ``a_ij = sum_t mu_i(z_t) mu_j(z_{t+1})``, expected interval midpoint;
* weighted Markov: k-step transition matrices mixed with weights
  proportional to ``|r_k|`` (lag-k autocorrelation), most probable state.

State indices are 0-based. A value equal to an interior boundary belongs
to the lower state.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import gammainccinv

from .errors import DataError

BOUNDARY_PAD = 1e-12


@dataclass(frozen=True)
class StatePartition:
    boundaries: np.ndarray  # m_0 < m_1 < ... < m_k

    def __post_init__(self):
        b = np.asarray(self.boundaries, dtype=float)
        if b.ndim != 1 or len(b) < 3:
            raise DataError("a partition needs at least 2 states (3 boundaries)")
        if not np.all(np.diff(b) > 0):
            raise DataError("partition boundaries must be strictly increasing")
        b.setflags(write=False)
        object.__setattr__(self, "boundaries", b)

    @property
    def k(self) -> int:
        return len(self.boundaries) - 1

    @property
    def midpoints(self) -> np.ndarray:
        b = self.boundaries
        return 0.5 * (b[:-1] + b[1:])

    def state_of(self, z) -> np.ndarray:
        """Intervals are (m_{i-1}, m_i]; the first one is closed on both sides."""
        z = np.asarray(z, dtype=float)
        return np.searchsorted(self.boundaries[1:-1], z, side="left")

    def scaled(self, c: float) -> "StatePartition":
        return StatePartition(self.boundaries * c)


@dataclass(frozen=True)
class TransitionMatrix:
    step: int
    counts: np.ndarray
    probabilities: np.ndarray


@dataclass(frozen=True)
class MarkovTestResult:
    chi_square: float
    dof: int
    critical_value: float
    alpha: float
    is_markov: bool


def residual_series(actual, fitted) -> np.ndarray:
    """z_t for t = 2..N (``fitted[0]`` is never used)."""
    y = np.asarray(actual, dtype=float)
    x = np.asarray(fitted, dtype=float)
    if y.shape != x.shape or y.ndim != 1:
        raise DataError("actual and fitted must be aligned 1-D sequences")
    if len(y) < 3:
        raise DataError("need at least 3 points")
    zero = np.flatnonzero(y[:-1] == 0)
    if zero.size:
        raise DataError(f"zero denominator Y_(t-1) at index {int(zero[0])}")
    z = (y[1:] - x[1:]) / y[:-1]
    if not np.all(np.isfinite(z)):
        raise DataError("non-finite relative residuals")
    return z


def partition(z, k: int = 5, rule: str = "quantile") -> StatePartition:
    z = np.asarray(z, dtype=float)
    if k < 2:
        raise DataError("need k >= 2 states")
    if z.size == 0:
        raise DataError("empty residual series")
    lo, hi = float(z.min()), float(z.max())
    if rule == "equal_width":
        if hi == lo:
            lo, hi = lo - 0.5, hi + 0.5
        b = np.linspace(lo, hi, k + 1)
    elif rule == "quantile":
        if hi == lo:
            raise DataError("all residuals equal; use the equal_width rule")
        b = np.quantile(z, np.linspace(0.0, 1.0, k + 1))
        if not np.all(np.diff(b) > 0):
            raise DataError("too few distinct residuals for quantile states; use equal_width")
    else:
        raise DataError(f"unknown partition rule {rule!r}")
    b[0] -= BOUNDARY_PAD
    b[-1] += BOUNDARY_PAD
    return StatePartition(b)


def transition_matrix(states, step: int, k: int) -> TransitionMatrix:
    s = np.asarray(states, dtype=int)
    if len(s) <= step:
        raise DataError(f"sequence of length {len(s)} too short for step {step}")
    counts = np.zeros((k, k))
    np.add.at(counts, (s[:-step], s[step:]), 1.0)
    return TransitionMatrix(step, counts, _row_normalize(counts))


def _row_normalize(counts: np.ndarray) -> np.ndarray:
    k = counts.shape[1]
    rows = counts.sum(axis=1, keepdims=True)
    with np.errstate(invalid="ignore", divide="ignore"):
        p = np.where(rows > 0, counts / rows, 1.0 / k)
    return p


def chi2_critical(dof: int, alpha: float) -> float:
    """Upper-alpha quantile of chi-square(dof), via the inverse regularized gamma."""
    return float(2.0 * gammainccinv(dof / 2.0, alpha))


def markov_property_test(states, k: int, alpha: float = 0.05) -> MarkovTestResult:
    s = np.asarray(states, dtype=int)
    if len(s) < k + 1:
        raise DataError(f"need at least k+1 = {k + 1} observations")
    if not 0 < alpha < 1:
        raise DataError("alpha must lie in (0, 1)")
    n = transition_matrix(s, 1, k).counts
    n_i = n.sum(axis=1, keepdims=True)
    p0 = n.sum(axis=0) / n.sum()
    stat = 0.0
    for i in range(k):
        for j in range(k):
            if n[i, j] > 0:
                stat += n[i, j] * abs(np.log((n[i, j] / n_i[i, 0]) / p0[j]))
    stat *= 2.0
    dof = (k - 1) ** 2
    crit = chi2_critical(dof, alpha)
    return MarkovTestResult(float(stat), dof, crit, alpha, bool(stat > crit))


def memberships(u, part: StatePartition, kind: str = "triangular") -> np.ndarray:
    """Membership matrix of shape (len(u), k); each row sums to 1.

    Triangular memberships peak at the interval midpoints, fall to zero at
    the neighbouring midpoints and stay flat at 1 beyond the outer midpoints.
    ``kind="crisp"`` gives interval indicators.
    """
    u = np.atleast_1d(np.asarray(u, dtype=float))
    k = part.k
    if kind == "crisp":
        out = np.zeros((len(u), k))
        out[np.arange(len(u)), part.state_of(u)] = 1.0
        return out
    if kind != "triangular":
        raise DataError(f"unknown membership kind {kind!r}")
    c = part.midpoints
    out = np.zeros((len(u), k))
    uc = np.clip(u, c[0], c[-1])
    j = np.clip(np.searchsorted(c, uc, side="right") - 1, 0, k - 2)
    t = (uc - c[j]) / (c[j + 1] - c[j])
    rows = np.arange(len(u))
    out[rows, j] = 1.0 - t
    out[rows, j + 1] += t
    return out


def fuzzy_transition(z, part: StatePartition, kind: str = "triangular") -> tuple[np.ndarray, np.ndarray]:
    """Fuzzy transition frequencies ``a`` and their row-normalized probabilities."""
    mu = memberships(z, part, kind)
    a = mu[:-1].T @ mu[1:]
    return a, _row_normalize(a)


def fuzzy_markov_correction(z, part: StatePartition, reading: str = "destination",
                            kind: str = "triangular") -> float:
    """Expected relative residual for the step after the last ``z``."""
    z = np.asarray(z, dtype=float)
    if len(z) < 2:
        raise DataError("need at least two residuals")
    _, P = fuzzy_transition(z, part, kind)
    mu_last = memberships(z[-1:], part, kind)[0]
    c = part.midpoints
    if reading == "destination":
        return float(mu_last @ (P @ c))
    if reading == "source":
        return float(mu_last @ (c * P.sum(axis=1)))
    raise DataError(f"unknown midpoint reading {reading!r}")


def fuzzy_markov_forecast(z, part, fitted_next: float, y_prev: float, reading: str = "destination",
                          kind: str = "triangular") -> float:
    if y_prev == 0:
        raise DataError("y_prev must be nonzero")
    return float(fitted_next + fuzzy_markov_correction(z, part, reading, kind) * y_prev)


def autocorrelation(x, lag: int) -> float:
    x = np.asarray(x, dtype=float)
    d = x - x.mean()
    den = np.sum(d ** 2)
    if den == 0:
        return 0.0
    return float(np.sum(d[: len(x) - lag] * d[lag:]) / den)


@dataclass(frozen=True)
class WeightedMarkovModel:
    order: int
    autocorrelations: np.ndarray
    weights: np.ndarray
    matrices: tuple  # TransitionMatrix for steps 1..order
    partition: StatePartition

    def state_probabilities(self, recent_states) -> np.ndarray:
        """Mix of rows: ``recent_states[-k]`` selects the row of the k-step matrix."""
        s = list(recent_states)
        probs = np.zeros(self.partition.k)
        for k in range(1, self.order + 1):
            probs += self.weights[k - 1] * self.matrices[k - 1].probabilities[s[-k]]
        return probs

    def predict_state(self, recent_states) -> int:
        return int(np.argmax(self.state_probabilities(recent_states)))


def fit_weighted_markov(z, part: StatePartition, order: int = 3) -> WeightedMarkovModel:
    z = np.asarray(z, dtype=float)
    if order < 1 or len(z) <= order:
        raise DataError(f"series of length {len(z)} too short for order {order}")
    r = np.array([autocorrelation(z, k) for k in range(1, order + 1)])
    tot = np.abs(r).sum()
    w = np.abs(r) / tot if tot > 0 else np.full(order, 1.0 / order)
    states = part.state_of(z)
    mats = tuple(transition_matrix(states, k, part.k) for k in range(1, order + 1))
    return WeightedMarkovModel(order, r, w, mats, part)


def weighted_markov_correction(z, part: StatePartition, order: int = 3) -> float:
    model = fit_weighted_markov(z, part, order)
    state = model.predict_state(part.state_of(z))
    return float(part.midpoints[state])


def weighted_markov_forecast(z, part, order: int, fitted_next: float, y_prev: float) -> float:
    if y_prev == 0:
        raise DataError("y_prev must be nonzero")
    return float(fitted_next + weighted_markov_correction(z, part, order) * y_prev)


def comprehensive_correction(fuzzy_fc: float, weighted_fc: float) -> float:
    if not (np.isfinite(fuzzy_fc) and np.isfinite(weighted_fc)):
        raise DataError("corrections must be finite")
    return 0.5 * (fuzzy_fc + weighted_fc)


@dataclass(frozen=True)
class CorrectionPath:
    svr: np.ndarray
    fuzzy: np.ndarray
    weighted: np.ndarray
    comprehensive: np.ndarray


def correct_recursive(z_fit, part: StatePartition, svr_forecast, y_last: float, order: int = 3,
                      reading: str = "destination") -> CorrectionPath:
    """Multi-step correction of an out-of-sample forecast path.

    Both chains are estimated once on ``z_fit``. At each step the predicted
    residual ``(z_fuzzy + z_weighted) / 2`` is appended to the residual
    history, and the corrected value becomes ``Y_{t-1}`` for the next step.
    """
    z_hist = list(np.asarray(z_fit, dtype=float))
    _, P = fuzzy_transition(z_hist, part)
    wm = fit_weighted_markov(z_hist, part, order)
    states = list(part.state_of(z_hist))
    c = part.midpoints
    svr = np.asarray(svr_forecast, dtype=float)
    fz, wz, comp = (np.empty(len(svr)) for _ in range(3))
    y_prev = float(y_last)
    for t, xhat in enumerate(svr):
        if y_prev == 0:
            raise DataError(f"zero Y_(t-1) at forecast step {t}")
        mu = memberships(z_hist[-1:], part)[0]
        z_f = float(mu @ (P @ c)) if reading == "destination" else float(mu @ (c * P.sum(axis=1)))
        s_w = wm.predict_state(states)
        z_w = float(c[s_w])
        fz[t] = xhat + z_f * y_prev
        wz[t] = xhat + z_w * y_prev
        comp[t] = comprehensive_correction(fz[t], wz[t])
        z_new = 0.5 * (z_f + z_w)
        z_hist.append(z_new)
        states.append(s_w)
        y_prev = comp[t]
    return CorrectionPath(svr.copy(), fz, wz, comp)
