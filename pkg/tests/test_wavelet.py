import numpy as np
import pytest
from hypothesis import given, strategies as st

import oracles
from hybridfx import wavelet as wv
from hybridfx.errors import DataError


@pytest.mark.parametrize("family", ["coif3", "db4"])
def test_filter_bank_orthonormal(family):
    lo, hi, _, _ = wv.filter_bank(family)
    assert np.sum(lo) == pytest.approx(np.sqrt(2), abs=1e-12)
    assert np.dot(lo, lo) == pytest.approx(1.0, abs=1e-12)
    assert np.dot(lo, hi) == pytest.approx(0.0, abs=1e-12)
    for k in range(1, len(lo) // 2):
        assert np.dot(lo[2 * k:], lo[:-2 * k]) == pytest.approx(0.0, abs=1e-12)


def test_filter_lengths():
    assert wv.WaveletSpec("coiflet3").filter_length == 18
    assert wv.WaveletSpec("daubechies4").family == "db4"


@given(st.integers(18, 200), st.sampled_from(["coif3", "db4"]), st.integers(0, 2**31))
def test_first_level_matches_padded_convolution(n, family, seed):
    x = np.random.default_rng(seed).normal(size=n)
    dec = wv.dwt_forward(x, wv.WaveletSpec(family, 1))
    lo, hi, _, _ = wv.filter_bank(family)
    a, d = oracles.dwt_symmetric_level(x, lo, hi)
    np.testing.assert_allclose(dec.approx, a, atol=1e-12)
    np.testing.assert_allclose(dec.details[0], d, atol=1e-12)


def test_round_trip_100_signals():
    rng = np.random.default_rng(7)
    worst = 0.0
    for _ in range(100):
        n = int(rng.integers(64, 513))
        spec = wv.WaveletSpec(rng.choice(["coif3", "db4"]), int(rng.integers(1, 4)),
                              extension=rng.choice(["symmetric", "periodization"]))
        x = rng.normal(size=n) * rng.uniform(0.01, 100)
        back = wv.dwt_inverse(wv.dwt_forward(x, spec), spec)
        worst = max(worst, np.max(np.abs(back - x)))
    assert worst <= 1e-9


def test_periodization_conserves_energy():
    x = np.random.default_rng(3).normal(size=256)
    dec = wv.dwt_forward(x, wv.WaveletSpec("coif3", 3, extension="periodization"))
    assert np.sum(dec.coefficients() ** 2) == pytest.approx(np.sum(x ** 2), rel=1e-12)
    assert [len(d) for d in dec.details] == [128, 64, 32]


def test_symmetric_band_lengths():
    dec = wv.dwt_forward(np.zeros(100), wv.WaveletSpec("coif3", 2))
    assert len(dec.details[0]) == (100 + 17) // 2
    assert len(dec.details[1]) == (58 + 17) // 2


def test_denoise_reduces_rmse():
    t = np.linspace(0, 4 * np.pi, 512)
    clean = np.sin(t)
    noisy = clean + np.random.default_rng(11).normal(0, 0.2, t.size)
    for rule in ("universal_soft", "universal_hard"):
        out = wv.denoise(noisy, wv.WaveletSpec("coif3", 3, rule))
        assert np.sqrt(np.mean((out - clean) ** 2)) < np.sqrt(np.mean((noisy - clean) ** 2))


def test_zero_threshold_is_identity():
    x = np.random.default_rng(5).normal(size=128)
    np.testing.assert_allclose(wv.denoise(x, threshold=0.0), x, atol=1e-10)


def test_threshold_rules():
    c = np.array([-3.0, -1.0, 0.5, 2.0])
    np.testing.assert_array_equal(wv.soft_threshold(c, 1.0), [-2.0, 0.0, 0.0, 1.0])
    np.testing.assert_array_equal(wv.hard_threshold(c, 1.0), [-3.0, 0.0, 0.0, 2.0])


def test_universal_threshold_value():
    dec = wv.dwt_forward(np.random.default_rng(1).normal(size=256), wv.WaveletSpec("db4", 2))
    sigma = np.median(np.abs(dec.details[0])) / 0.6745
    assert wv.universal_threshold(dec) == pytest.approx(sigma * np.sqrt(2 * np.log(256)))


def test_errors():
    with pytest.raises(DataError, match="shorter"):
        wv.dwt_forward(np.zeros(10), wv.WaveletSpec("coif3", 1))
    with pytest.raises(DataError, match="exceeds"):
        wv.dwt_forward(np.zeros(20), wv.WaveletSpec("db4", 5))
    with pytest.raises(DataError):
        wv.WaveletSpec("haar")
    dec = wv.dwt_forward(np.zeros(64), wv.WaveletSpec("db4", 2))
    with pytest.raises(DataError, match="does not match"):
        wv.dwt_inverse(dec, wv.WaveletSpec("db4", 3))


def test_series_in_series_out(bundled_frame):
    s = bundled_frame.series()
    out = wv.denoise(s)
    assert out.timestamps == s.timestamps and len(out) == len(s)
