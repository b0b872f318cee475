import numpy as np
import pytest
from hypothesis import given, strategies as st

import oracles
from conftest import henon_x, logistic_map
from hybridfx import phase_space as ps
from hybridfx.errors import DataError

series = st.lists(st.floats(-5, 5, allow_nan=False), min_size=40, max_size=120).filter(
    lambda v: max(v) - min(v) > 1e-6)


# ---- AMI ---------------------------------------------------------------

@given(series, st.integers(1, 10), st.sampled_from([4, 8, 16]))
def test_mi_matches_loop_oracle(vals, lag, bins):
    assert ps.mutual_information(vals, lag, bins) == pytest.approx(
        oracles.histogram_mi(vals, lag, bins), abs=1e-12)


def test_ami_profile_on_500_points_matches_oracle():
    y = logistic_map(500)
    prof = ps.ami(y, 20, 16)
    ref = [oracles.histogram_mi(y, t, 16) for t in range(1, 21)]
    np.testing.assert_allclose(prof.values, ref, rtol=0, atol=1e-12)


def test_mi_lag0_is_entropy():
    y = np.repeat(np.arange(4.0), 25)  # four equally filled bins
    assert ps.mutual_information(y, 0, 4) == pytest.approx(2.0, abs=1e-12)


def test_constant_series_rejected():
    with pytest.raises(DataError, match="constant"):
        ps.ami(np.ones(50), 5)


def test_select_delay_rules():
    prof = ps.AmiProfile(np.arange(1, 7), np.array([3.0, 2.0, 2.5, 1.0, 1.5, 0.5]), 16)
    assert ps.select_delay(prof) == 2
    assert ps.select_delay(prof, "global_minimum") == 6
    mono = ps.AmiProfile(np.arange(1, 5), np.array([4.0, 3.0, 2.0, 1.0]), 16)
    assert ps.select_delay(mono) == 4
    flat = ps.AmiProfile(np.arange(1, 5), np.array([4.0, 2.0, 2.0, 3.0]), 16)
    assert ps.select_delay(flat) == 2  # plateau resolves toward the smaller lag


# ---- FNN ---------------------------------------------------------------

@given(series, st.integers(1, 3), st.integers(1, 4))
def test_fnn_matches_loop_oracle(vals, tau, max_dim):
    prof = ps.fnn(vals, tau, max_dim)
    tiny = ps.COINCIDENT_RTOL * max(abs(v) for v in vals)
    for d, p in zip(prof.dims, prof.false_percent):
        assert p == pytest.approx(oracles.fnn_percent(vals, tau, int(d), 15.0, tiny), abs=1e-12)


def test_fnn_500_points_matches_oracle():
    y = henon_x(500)[:300]  # the pure-python oracle is quadratic; 300 keeps it quick
    prof = ps.fnn(y, 1, 3)
    tiny = ps.COINCIDENT_RTOL * np.max(np.abs(y))
    for d, p in zip(prof.dims, prof.false_percent):
        assert p == pytest.approx(oracles.fnn_percent(y, 1, int(d), 15.0, tiny), abs=1e-12)


def test_fnn_truncation_warns():
    with pytest.warns(UserWarning, match="truncated"):
        prof = ps.fnn(np.sin(np.arange(12.0)), 3, 6)
    assert prof.truncated and prof.dims[-1] < 6


def test_select_dim_and_saturation():
    p = ps.FnnProfile(np.arange(1, 5), np.array([60.0, 5.0, 0.5, 0.0]), 1.0)
    assert ps.select_dim(p) == 3 and not p.saturated
    s = ps.FnnProfile(np.arange(1, 4), np.array([60.0, 50.0, 40.0]), 1.0)
    assert s.saturated
    with pytest.warns(UserWarning):
        assert ps.select_dim(s) == 3


@given(st.lists(st.floats(0, 100), min_size=1, max_size=8), st.floats(0, 100), st.floats(0, 100))
def test_select_dim_monotone_in_threshold(pct, t1, t2):
    lo, hi = sorted((t1, t2))
    dims = np.arange(1, len(pct) + 1)
    import warnings
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        d_lo = ps.select_dim(ps.FnnProfile(dims, np.array(pct), lo))
        d_hi = ps.select_dim(ps.FnnProfile(dims, np.array(pct), hi))
    assert d_hi <= d_lo


# ---- fixtures with documented (tau, dim) --------------------------------

def test_logistic_fixture():
    y = logistic_map(2000)
    tau = ps.select_delay(ps.ami(y, 20, 16))
    assert tau == 7
    prof = ps.fnn(y, tau, 6)
    assert ps.select_dim(prof) == 5
    np.testing.assert_allclose(prof.false_percent, [98.0, 76.0, 29.3, 4.6, 0.31, 0.0], atol=0.06)


def test_henon_fixture():
    y = henon_x(2000)
    assert ps.select_delay(ps.ami(y, 20, 16)) == 17
    prof = ps.fnn(y, 1, 4)
    assert ps.select_dim(prof) == 2
    assert prof.false_percent[0] > 50 and np.all(prof.false_percent[1:] == 0)


def test_sine_dimension_two():
    y = np.sin(2 * np.pi * np.arange(1000) / 100)
    prof = ps.fnn(y, 25, 3)
    assert prof.false_percent[1] == 0.0 and ps.select_dim(prof) == 2


# ---- embedding ---------------------------------------------------------

def test_embed_example():
    em = ps.embed(np.arange(1.0, 8.0), 2, 3)
    np.testing.assert_array_equal(em.rows, [[5, 3, 1], [6, 4, 2], [7, 5, 3]])
    np.testing.assert_array_equal(em.index, [4, 5, 6])


def test_supervised_pairs_targets():
    X, t = ps.supervised_pairs(np.arange(1.0, 8.0), 1, 2)
    np.testing.assert_array_equal(X[0], [2, 1])
    np.testing.assert_array_equal(t, [3, 4, 5, 6, 7])


def test_embed_too_short():
    with pytest.raises(DataError, match="too short"):
        ps.embed(np.arange(5.0), 3, 3)


@given(st.integers(10, 60), st.integers(1, 4), st.integers(1, 5))
def test_embed_shape_and_entries(n, tau, dim):
    y = np.arange(n, dtype=float)
    if n - (dim - 1) * tau < 1:
        return
    em = ps.embed(y, tau, dim)
    assert em.rows.shape == (n - (dim - 1) * tau, dim)
    for r, k in zip(em.rows, em.index):
        np.testing.assert_array_equal(r, [y[k - j * tau] for j in range(dim)])
