import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import stats

from hybridfx import markov_correct as mk
from hybridfx.errors import DataError

states_st = st.integers(2, 6).flatmap(
    lambda k: st.tuples(st.just(k), st.lists(st.integers(0, k - 1), min_size=k + 2, max_size=80)))
resid_st = st.lists(st.floats(-0.05, 0.05, allow_nan=False), min_size=12, max_size=60).filter(
    lambda v: len(set(v)) >= 8)


def test_residual_series_example():
    z = mk.residual_series([100.0, 102.0, 100.0], [0.0, 101.0, 101.0])
    np.testing.assert_allclose(z, [0.01, -1 / 102], rtol=1e-15)


def test_residual_zero_denominator():
    with pytest.raises(DataError, match="zero"):
        mk.residual_series([0.0, 1.0, 2.0], [0.0, 1.0, 2.0])


def test_transition_example():
    s = [0, 1, 0, 1, 1]
    t1 = mk.transition_matrix(s, 1, 2)
    np.testing.assert_array_equal(t1.probabilities, [[0, 1], [0.5, 0.5]])
    t2 = mk.transition_matrix(s, 2, 2)  # pairs (0,0), (1,1), (0,1)
    np.testing.assert_array_equal(t2.probabilities, [[0.5, 0.5], [0, 1]])


def test_empty_row_is_uniform():
    p = mk.transition_matrix([1, 1, 1], 1, 3).probabilities
    np.testing.assert_array_equal(p[1], [0, 1, 0])
    np.testing.assert_array_equal(p[0], [1 / 3] * 3)
    np.testing.assert_array_equal(p[2], [1 / 3] * 3)


@given(states_st, st.integers(1, 3))
def test_rows_sum_to_one(ks, step):
    k, s = ks
    if len(s) <= step:
        return
    p = mk.transition_matrix(s, step, k).probabilities
    assert np.all(np.abs(p.sum(axis=1) - 1) <= 1e-12) and np.all(p >= 0)


def test_chi2_zero_on_marginal_equal():
    # every row of the step-1 counts equals the column marginal
    s = [0, 0, 1, 1, 0]  # counts [[1,1],[1,1]]
    res = mk.markov_property_test(s, 2)
    assert res.chi_square == 0.0 and not res.is_markov


@pytest.mark.parametrize("k", [2, 3, 5, 7])
def test_dof_and_critical(k):
    s = list(range(k)) * 4
    res = mk.markov_property_test(s, k, 0.05)
    assert res.dof == (k - 1) ** 2
    assert res.critical_value == pytest.approx(stats.chi2.ppf(0.95, (k - 1) ** 2), rel=1e-10)


def test_alternation_is_markov():
    # 20 transitions 0->1 and 19 transitions 1->0, column marginals 19/39 and 20/39
    res = mk.markov_property_test([0, 1] * 20, 2)
    expect = 2 * (20 * np.log(39 / 20) + 19 * np.log(39 / 19))
    assert res.chi_square == pytest.approx(expect, rel=1e-12)
    assert res.is_markov


def test_partition_quantile_balanced():
    z = np.random.default_rng(0).normal(size=200)
    part = mk.partition(z, 5)
    assert np.array_equal(np.bincount(part.state_of(z), minlength=5), [40] * 5)


def test_boundary_goes_to_lower_state():
    part = mk.StatePartition(np.array([-1.0, 0.0, 1.0]))
    np.testing.assert_array_equal(part.state_of([-1.0, 0.0, 1.0]), [0, 0, 1])


def test_partition_rules():
    with pytest.raises(DataError):
        mk.partition(np.ones(10), 3, "quantile")
    part = mk.partition(np.ones(10), 3, "equal_width")
    assert part.k == 3
    with pytest.raises(DataError):
        mk.partition([0.0, 1.0], 3, "median")


@given(resid_st, st.integers(2, 5))
def test_crisp_memberships_reduce_to_counts(z, k):
    part = mk.partition(z, k, "equal_width")
    a, P = mk.fuzzy_transition(z, part, "crisp")
    t = mk.transition_matrix(part.state_of(z), 1, k)
    assert np.array_equal(a, t.counts)  # bit-exact
    assert np.array_equal(P, t.probabilities)


@given(resid_st, st.integers(2, 5))
def test_memberships_partition_of_unity(z, k):
    part = mk.partition(z, k, "equal_width")
    mu = mk.memberships(np.linspace(min(z) - 1, max(z) + 1, 50), part)
    assert np.all(mu >= 0) and np.allclose(mu.sum(axis=1), 1.0, atol=1e-12)


def test_membership_peaks_at_midpoints():
    part = mk.StatePartition(np.array([0.0, 1.0, 2.0, 3.0]))
    np.testing.assert_allclose(mk.memberships(part.midpoints, part), np.eye(3))
    np.testing.assert_allclose(mk.memberships([1.0], part)[0], [0.5, 0.5, 0.0])


def test_fuzzy_toy_example():
    z = [0.01, -0.02, 0.015]
    part = mk.partition(z, 2, "equal_width")
    # boundaries -0.02, -0.0025, 0.015 (outer ones padded); every z sits beyond a midpoint,
    # so memberships are 0/1: states 1, 0, 1
    a, P = mk.fuzzy_transition(z, part)
    assert np.array_equal(a, [[0.0, 1.0], [1.0, 0.0]])
    c0 = 0.5 * ((-0.02 - mk.BOUNDARY_PAD) + -0.0025)
    # last membership is state 1, which moves to state 0 with probability 1
    assert mk.fuzzy_markov_forecast(z, part, 1.3, 1.25) == pytest.approx(1.3 + c0 * 1.25, abs=1e-12)


def test_zero_residuals_leave_forecast_unchanged():
    part = mk.StatePartition(np.array([-0.03, -0.01, 0.01, 0.03]))  # symmetric, k = 3
    assert mk.fuzzy_markov_forecast(np.zeros(10), part, 1.4, 1.39) == 1.4


def test_partition_of_unity_dense_grid():
    part = mk.partition(np.random.default_rng(2).normal(size=70), 5)
    u = np.linspace(part.boundaries[0] - 0.5, part.boundaries[-1] + 0.5, 10_001)
    assert np.max(np.abs(mk.memberships(u, part).sum(axis=1) - 1)) <= 1e-9


def test_fuzzy_correction_readings():
    part = mk.StatePartition(np.array([-2.0, 0.0, 2.0]))  # midpoints -1, 1
    z = [-1.0, 1.0, -1.0, 1.0]  # always switches
    assert mk.fuzzy_markov_correction(z, part, "destination") == pytest.approx(-1.0)
    assert mk.fuzzy_markov_correction(z, part, "source") == pytest.approx(1.0)
    assert mk.fuzzy_markov_forecast(z, part, 100.0, 50.0) == pytest.approx(50.0)


def test_autocorrelation_example():
    assert mk.autocorrelation([1.0, 2.0, 3.0, 4.0, 5.0], 1) == pytest.approx(0.4, abs=1e-15)
    assert mk.autocorrelation([2.0, 2.0, 2.0], 1) == 0.0


def test_order_one_weight():
    z = np.random.default_rng(0).normal(size=30)
    m = mk.fit_weighted_markov(z, mk.partition(z, 3), 1)
    np.testing.assert_array_equal(m.weights, [1.0])


def test_alternation_predicted_state_flips():
    part = mk.StatePartition(np.array([-2.0, 0.0, 2.0]))
    z = [-1.0, 1.0] * 10
    m = mk.fit_weighted_markov(z, part, 2)
    states = list(part.state_of(z))
    for _ in range(6):
        # hand-rolled chain: the next state is always the other one
        nxt = m.predict_state(states)
        assert nxt == 1 - states[-1]
        states.append(nxt)


@given(resid_st, st.floats(0.01, 100.0))
def test_weighted_state_rescale_invariant(z, c):
    z = np.asarray(z)
    part = mk.partition(z, 3, "equal_width")
    m1 = mk.fit_weighted_markov(z, part, 2)
    m2 = mk.fit_weighted_markov(z * c, part.scaled(c), 2)
    s1, s2 = part.state_of(z), part.scaled(c).state_of(z * c)
    if np.array_equal(s1, s2):  # rounding can move a value sitting on a boundary
        assert m1.predict_state(s1) == m2.predict_state(s2)


@given(states_st)
def test_chi2_zero_iff_rows_match_marginal(ks):
    k, s = ks
    res = mk.markov_property_test(s, k)
    n = mk.transition_matrix(s, 1, k).counts
    p0 = n.sum(axis=0) / n.sum()
    rows = n.sum(axis=1, keepdims=True)
    match = all(abs(n[i, j] / rows[i, 0] - p0[j]) <= 1e-12
                for i in range(k) for j in range(k) if n[i, j] > 0)
    assert (res.chi_square <= 1e-9) == match


def test_weighted_markov_deterministic_cycle():
    part = mk.StatePartition(np.array([0.0, 1.0, 2.0, 3.0]))
    z = np.array([0.5, 1.5, 2.5] * 6)
    m = mk.fit_weighted_markov(z, part, 3)
    assert m.weights.sum() == pytest.approx(1.0)
    assert m.predict_state(part.state_of(z)) == 0  # next after state 2 is state 0
    assert mk.weighted_markov_correction(z, part, 3) == 0.5


def test_weighted_equal_when_no_correlation():
    part = mk.StatePartition(np.array([0.0, 1.0, 2.0]))
    m = mk.fit_weighted_markov(np.full(6, 0.5), part, 2)
    np.testing.assert_array_equal(m.weights, [0.5, 0.5])


def test_comprehensive_is_mean():
    assert mk.comprehensive_correction(2.0, 4.0) == 3.0
    assert mk.comprehensive_correction(1.37, 1.37) == 1.37
    with pytest.raises(DataError):
        mk.comprehensive_correction(np.nan, 1.0)


def test_correct_recursive_first_step_matches_one_shot():
    rng = np.random.default_rng(4)
    z = rng.normal(0, 0.01, 60)
    part = mk.partition(z, 5)
    svr = np.array([1.30, 1.31, 1.32])
    path = mk.correct_recursive(z, part, svr, 1.29)
    assert path.fuzzy[0] == pytest.approx(mk.fuzzy_markov_forecast(z, part, 1.30, 1.29))
    assert path.weighted[0] == pytest.approx(mk.weighted_markov_forecast(z, part, 3, 1.30, 1.29))
    np.testing.assert_allclose(path.comprehensive, (path.fuzzy + path.weighted) / 2)
    np.testing.assert_array_equal(path.svr, svr)
