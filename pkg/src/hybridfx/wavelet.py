"""Multilevel orthogonal DWT and universal-threshold denoising.

Filters are the standard Coiflet-3 (18 taps) and Daubechies-4 (8 taps)
scaling filters. The default boundary handling is half-point symmetric
extension: each level yields ``(n + F - 1) // 2`` coefficients per band and
the synthesis bank keeps the valid part, which reconstructs exactly.
``periodization`` is also available; it yields exactly ``ceil(n/2)``
coefficients and is the energy-preserving variant.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DataError

COIF3_LO = np.array([
    -3.459977319727278e-05, -7.0983302506379e-05, 0.0004662169598204029,
    0.0011175187708306303, -0.0025745176881367972, -0.009007976136730624,
    0.015880544863669452, 0.03455502757329774, -0.08230192710629983,
    -0.07179982161915484, 0.42848347637737, 0.7937772226260872,
    0.40517690240911824, -0.06112339000297255, -0.06577191128146936,
    0.023452696142077168, 0.007782596425672746, -0.003793512864380802,
])

DB4_LO = np.array([
    -0.010597401785069032, 0.0328830116668852, 0.030841381835560764,
    -0.18703481171909309, -0.027983769416859854, 0.6308807679298589,
    0.7148465705529157, 0.2303778133088965,
])

_FAMILIES = {"coif3": COIF3_LO, "coiflet3": COIF3_LO, "db4": DB4_LO, "daubechies4": DB4_LO}
_CANONICAL = {"coiflet3": "coif3", "daubechies4": "db4"}


def filter_bank(family: str):
    """(dec_lo, dec_hi, rec_lo, rec_hi) for an orthogonal family."""
    try:
        dec_lo = _FAMILIES[family]
    except KeyError:
        raise DataError(f"unknown wavelet family {family!r}") from None
    rec_lo = dec_lo[::-1].copy()
    k = np.arange(len(dec_lo))
    dec_hi = (-1.0) ** (k + 1) * rec_lo
    rec_hi = dec_hi[::-1].copy()
    return dec_lo, dec_hi, rec_lo, rec_hi


@dataclass(frozen=True)
class WaveletSpec:
    family: str = "coif3"
    level: int = 3
    threshold_rule: str = "universal_soft"
    extension: str = "symmetric"

    def __post_init__(self):
        object.__setattr__(self, "family", _CANONICAL.get(self.family, self.family))
        filter_bank(self.family)
        if self.level < 1:
            raise DataError("wavelet level must be >= 1")
        if self.threshold_rule not in ("universal_soft", "universal_hard"):
            raise DataError(f"unknown threshold rule {self.threshold_rule!r}")
        if self.extension not in ("symmetric", "periodization"):
            raise DataError(f"unknown extension mode {self.extension!r}")

    @property
    def filter_length(self) -> int:
        return len(_FAMILIES[self.family])


@dataclass(frozen=True)
class WaveletDecomposition:
    approx: np.ndarray
    details: tuple  # details[0] is level 1 (finest) ... details[-1] is level L
    original_length: int
    family: str
    level: int
    extension: str

    def coefficients(self) -> np.ndarray:
        return np.concatenate([self.approx, *self.details])


def _symmetric_index(idx: np.ndarray, n: int) -> np.ndarray:
    # half-point reflection: ... x1 x0 | x0 x1 ... x_{n-1} | x_{n-1} x_{n-2} ...
    m = np.mod(idx, 2 * n)
    return np.where(m < n, m, 2 * n - 1 - m)


def _periodic_index(m: int, F: int) -> np.ndarray:
    # row o holds the input positions hit by taps 0..F-1 for output o
    out = np.arange(1, m, 2)
    return np.mod(out[:, None] + (F // 2 - 1) - np.arange(F)[None, :], m)


def _analysis(x: np.ndarray, lo: np.ndarray, hi: np.ndarray, extension: str):
    n, F = len(x), len(lo)
    if extension == "periodization":
        xp = np.append(x, x[-1]) if n % 2 else x
        seg = xp[_periodic_index(len(xp), F)]
        return seg @ lo, seg @ hi
    out = np.arange(1, n + F - 1, 2)
    idx = _symmetric_index(out[:, None] - np.arange(F)[None, :], n)
    seg = x[idx]
    return seg @ lo, seg @ hi


def _synthesis(a: np.ndarray, d: np.ndarray, dlo: np.ndarray, dhi: np.ndarray, extension: str):
    F = len(dlo)
    if extension == "periodization":
        # transpose of the orthogonal periodic analysis operator
        m = 2 * len(a)
        idx = _periodic_index(m, F)
        out = np.zeros(m)
        np.add.at(out, idx, a[:, None] * dlo[None, :] + d[:, None] * dhi[None, :])
        return out
    up_a = np.zeros(2 * len(a))
    up_d = np.zeros(2 * len(d))
    up_a[1::2] = a
    up_d[1::2] = d
    rlo, rhi = dlo[::-1], dhi[::-1]
    full = np.convolve(up_a, rlo) + np.convolve(up_d, rhi)
    out_len = 2 * len(a) - F + 2
    return full[F - 1: F - 1 + out_len]


def dwt_forward(values, spec: WaveletSpec) -> WaveletDecomposition:
    x = np.asarray(values, dtype=float)
    n = len(x)
    F = spec.filter_length
    if n < F:
        raise DataError(f"series of length {n} shorter than the {F}-tap {spec.family} filter")
    max_level = int(math.floor(math.log2(n)))
    if spec.level > max_level:
        raise DataError(f"level {spec.level} exceeds floor(log2({n})) = {max_level}")
    dec_lo, dec_hi, _, _ = filter_bank(spec.family)
    details = []
    a = x
    for _ in range(spec.level):
        a, d = _analysis(a, dec_lo, dec_hi, spec.extension)
        details.append(d)
    return WaveletDecomposition(a, tuple(details), n, spec.family, spec.level, spec.extension)


def dwt_inverse(decomp: WaveletDecomposition, spec: WaveletSpec) -> np.ndarray:
    if (decomp.family, decomp.level, decomp.extension) != (spec.family, spec.level, spec.extension):
        raise DataError("wavelet spec does not match the decomposition (family/level/extension)")
    dec_lo, dec_hi, _, _ = filter_bank(spec.family)
    a = decomp.approx
    for d in reversed(decomp.details):
        if len(a) == len(d) + 1:
            a = a[:-1]
        a = _synthesis(a, d, dec_lo, dec_hi, spec.extension)
    return a[: decomp.original_length]


def universal_threshold(decomp: WaveletDecomposition) -> float:
    """sigma * sqrt(2 ln N) with sigma = median(|d_1|) / 0.6745."""
    sigma = np.median(np.abs(decomp.details[0])) / 0.6745
    return float(sigma * math.sqrt(2.0 * math.log(decomp.original_length)))


def soft_threshold(c: np.ndarray, t: float) -> np.ndarray:
    return np.sign(c) * np.maximum(np.abs(c) - t, 0.0)


def hard_threshold(c: np.ndarray, t: float) -> np.ndarray:
    return np.where(np.abs(c) > t, c, 0.0)


def denoise(values, spec: WaveletSpec = WaveletSpec(), threshold: float | None = None):
    """Threshold every detail band and reconstruct.

    ``threshold`` overrides the universal rule (``0`` makes this a no-op).
    A :class:`~hybridfx.series_store.Series` input returns a Series with the
    same timestamps; anything array-like returns an ndarray.
    """
    x = np.asarray(values, dtype=float)
    dec = dwt_forward(x, spec)
    t = universal_threshold(dec) if threshold is None else float(threshold)
    shrink = soft_threshold if spec.threshold_rule == "universal_soft" else hard_threshold
    details = tuple(shrink(d, t) for d in dec.details)
    out = dwt_inverse(
        WaveletDecomposition(dec.approx, details, dec.original_length, dec.family, dec.level,
                             dec.extension),
        spec,
    )
    if hasattr(values, "with_values"):
        return values.with_values(out)
    return out
