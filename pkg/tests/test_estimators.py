import itertools
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from oracles import naive_forward, naive_projection
from tailproc.estimators import (Absolute, EstimatorConfig, Quantile, Series, backward,
                                 backward_cdf, cdf_curve, forward, hill, projection,
                                 projection_hat, projection_weights, threshold)
from tailproc.exceptions import DegenerateThreshold, PaddingViolation
from tailproc.models import ModelSpec, simulate
from tailproc.spectral import IntervalSet
from tailproc.validation import linear_grid

LE, GT, ALL = IntervalSet.le, IntervalSet.gt, IntervalSet.all


def spiky(n=40, spikes=None, pad=5):
    x = np.full(n, 0.1)
    for t, v in (spikes or {}).items():
        x[t] = v
    return Series.padded(x, pad)


# hypothesis series: long enough for the largest padding used below
magnitudes = st.floats(1e-6, 50)
series_values = arrays(np.float64, st.integers(30, 60),
                       elements=st.one_of(st.just(0.0), magnitudes, magnitudes.map(lambda v: -v)))


def quantile_u(series, q=0.8):
    """Quantile threshold, or None when nothing exceeds it."""
    try:
        return threshold(series, Quantile(q))
    except DegenerateThreshold:
        return None


class TestSeries:
    def test_core_and_padding(self):
        s = Series.padded(np.arange(10.0), 3)
        assert s.n == 4 and s.padding == (3, 3)
        np.testing.assert_array_equal(s.core, [3, 4, 5, 6])

    def test_values_read_only(self):
        s = Series(np.ones(5))
        with pytest.raises(ValueError):
            s.values[0] = 2.0

    @pytest.mark.parametrize("start,stop", [(3, 3), (-1, 4), (0, 11)])
    def test_invalid_core(self, start, stop):
        with pytest.raises(ValueError):
            Series(np.ones(10), start, stop)

    def test_rejects_non_finite(self):
        with pytest.raises(ValueError):
            Series(np.array([1.0, np.nan]))


class TestThreshold:
    def test_order_statistic(self):
        s = Series(np.arange(1.0, 101.0))
        u = threshold(s, Quantile(0.95))
        assert u == 95.0 and np.sum(s.core > u) == 5

    def test_absolute(self):
        assert threshold(Series(np.array([1.0, 20.0])), Absolute(10)) == 10.0

    def test_constant_series_is_degenerate(self):
        with pytest.raises(DegenerateThreshold):
            threshold(Series(np.full(50, 3.0)), Quantile(0.95))

    def test_config_rule(self):
        s = Series(np.arange(1.0, 101.0))
        assert threshold(s, EstimatorConfig(Quantile(0.9))) == 90.0

    def test_padding_ignored(self):
        s = Series(np.array([1000.0, 1.0, 2.0, 3.0, 1000.0]), 1, 4)
        assert threshold(s, Quantile(0.5)) == 2.0

    @pytest.mark.parametrize("q", [0.0, 1.0, 1.5])
    def test_invalid_level(self, q):
        with pytest.raises(ValueError):
            Quantile(q)


class TestHill:
    def test_unit_log_excess(self):
        u = 2.0
        s = Series(np.array([1.0, u * math.e, 0.5, u * math.e, -u * math.e]))
        assert hill(s, u) == pytest.approx(1.0, rel=1e-15)

    def test_single_exceedance(self):
        assert hill(Series(np.array([1.0, 3 * math.exp(1 / 3)])), 3.0) == pytest.approx(3.0, rel=1e-14)

    def test_degenerate(self):
        with pytest.raises(DegenerateThreshold):
            hill(Series(np.ones(4)), 1.0)


class TestForward:
    def test_single_exceedance(self):
        s = spiky(spikes={10: 4.0, 11: 2.0})
        assert forward(s, 3.0, 1, LE(1)) == 1.0
        assert forward(s, 3.0, 1, LE(0.4)) == 0.0

    def test_two_exceedances(self):
        s = spiky(spikes={10: 10.0, 11: -2.0, 20: -10.0, 21: 7.0})
        assert forward(s, 8.0, 1, LE(0)) == 0.5

    def test_all_is_one(self):
        assert forward(spiky(spikes={10: 5.0}), 1.0, -2, ALL()) == 1.0

    def test_list_of_sets(self):
        s = spiky(spikes={10: 10.0, 11: -2.0, 20: -10.0, 21: 7.0})
        np.testing.assert_array_equal(forward(s, 8.0, 1, [LE(0), GT(0)]), [0.5, 0.5])

    @given(series_values, st.integers(-3, 3), st.floats(-3, 3))
    def test_matches_naive(self, x, i, thr):
        s = Series.padded(x, 3)
        u = np.sort(np.abs(s.core))[-3]
        if not np.any(np.abs(s.core) > u):
            return
        assert forward(s, u, i, LE(thr)) == naive_forward(x, s.start, s.stop, u, i, "le", thr)


class TestBackward:
    def test_single_term(self):
        x = np.zeros(10)
        x[4], x[5] = 1.0, 4.0
        assert backward(Series.padded(x, 2), 2.0, 1, GT(3), 1.0) == 0.25

    def test_zero_predecessor_contributes_nothing(self):
        x = np.zeros(10)
        x[5] = 4.0
        assert backward(Series.padded(x, 2), 2.0, 1, ALL(), 2.0) == 0.0

    @given(series_values, st.floats(-3, 3), st.floats(0.3, 5))
    def test_lag_zero_is_forward(self, x, thr, alpha):
        s = Series.padded(x, 2)
        u = quantile_u(s)
        if u is None:
            return
        for A in (LE(thr), GT(thr), ALL()):
            assert backward(s, u, 0, A, alpha) == forward(s, u, 0, A)

    def test_cdf_uses_complement_at_nonnegative_x(self):
        s = simulate(ModelSpec("garcht", 3), 600, padding=5)
        u = quantile_u(s, 0.9)
        a = hill(s, u)
        grid = np.array([-1.0, -0.25, 0.0, 0.5])
        got = backward_cdf(s, u, 2, grid, a)
        assert got[0] == backward(s, u, 2, LE(-1.0), a)
        assert got[1] == backward(s, u, 2, LE(-0.25), a)
        assert got[2] == 1.0 - backward(s, u, 2, GT(0.0), a)
        assert got[3] == 1.0 - backward(s, u, 2, GT(0.5), a)


class TestProjection:
    def test_toy_series(self):
        # hand count: each exceedance puts weight 1/11 on a ratio of -10
        x = np.zeros(12)
        x[5], x[6] = 1.0, -10.0
        s = Series.padded(x, 3)
        assert projection(s, 0.5, 2, 1, 1.0, LE(-5)) == pytest.approx(1 / 11, abs=1e-16)
        assert projection(s, 0.5, 2, 1, 1.0, LE(-5)) == naive_projection(x, 3, 9, 0.5, 2, 1, 1.0, "le", -5)

    def test_all_is_one(self):
        s = simulate(ModelSpec("sre", 1), 400, padding=12)
        assert projection(s, quantile_u(s, 0.9), 10, 2, 2.0, ALL()) == pytest.approx(1.0, abs=1e-14)

    def test_nonnegative_series_lag_zero(self):
        s = Series.padded(np.abs(simulate(ModelSpec("garcht", 2), 300).values), 5)
        assert projection(s, quantile_u(s, 0.9), 5, 0, 2.6, LE(1)) == pytest.approx(1.0, abs=1e-14)

    def test_padding_violation(self):
        s = Series.padded(np.arange(1.0, 30.0), 3)
        with pytest.raises(PaddingViolation):
            projection(s, 10.0, 3, 1, 1.0, LE(0))

    @pytest.mark.parametrize("thr", [-0.5, 0.0, 0.5])
    def test_lag_beyond_block_uses_zero(self, thr):
        # H_n is empty, so every summand is 1_A(0) and the weights sum to one
        x = np.sin(np.arange(1.0, 45.0)) * np.arange(1.0, 45.0)
        s = Series.padded(x, 8)
        got = projection(s, 10.0, 2, 6, 1.0, LE(thr))
        assert got == naive_projection(s.values, s.start, s.stop, 10.0, 2, 6, 1.0, "le", thr)
        assert got == pytest.approx(float(thr >= 0), abs=1e-15)

    @given(series_values, st.floats(-3, 3))
    def test_zero_block_is_forward(self, x, thr):
        s = Series.padded(x, 0)
        u = quantile_u(s)
        if u is None:
            return
        for A in (LE(thr), GT(thr)):
            assert projection(s, u, 0, 0, 1.7, A) == forward(s, u, 0, A)

    @given(series_values, st.integers(0, 4), st.floats(0.3, 5))
    def test_partition_of_unity(self, x, s_n, alpha):
        s = Series.padded(x, s_n)
        u = quantile_u(s)
        if u is None:
            return
        np.testing.assert_allclose(projection_weights(s, u, s_n, alpha).sum(axis=1), 1.0, atol=1e-12)

    def test_projection_hat_composes_hill(self):
        u = 2.0
        x = np.array([0.3, -0.2, 0.5, u * math.e, -1.0, 0.7, 0.1])
        s = Series.padded(x, 2)
        assert hill(s, u) == pytest.approx(1.0, rel=1e-15)
        assert projection_hat(s, u, 2, 0, LE(0.5)) == projection(s, u, 2, 0, hill(s, u), LE(0.5))


def exhaustive_cases(length=6, values=(0.0, 1.0, -1.0, 2.0, -2.0)):
    return [np.array(c) for c in itertools.product(values, repeat=length)]


EXHAUSTIVE_SETS = [("le", -1.5), ("le", -0.5), ("le", 0.0), ("le", 0.7), ("gt", 0.0), ("gt", 1.0)]


def run_exhaustive(cases, s_n, lag, alpha, u=1.0):
    """Count compared cases and mismatches against the naive triple loop."""
    pad = s_n + abs(lag)
    sets = [IntervalSet(k, v) for k, v in EXHAUSTIVE_SETS]
    compared = mismatches = 0
    for x in cases:
        s = Series.padded(x, pad)
        if not np.any(np.abs(s.core) > u):
            continue
        got = projection(s, u, s_n, lag, alpha, sets)
        for g, (kind, thr) in zip(got, EXHAUSTIVE_SETS):
            compared += 1
            mismatches += g != naive_projection(x, s.start, s.stop, u, s_n, lag, alpha, kind, thr)
    return compared, mismatches


class TestOracleEquivalence:
    @pytest.mark.parametrize("s_n,lag", [(1, -1), (2, 0), (1, 1)])
    @pytest.mark.parametrize("alpha", [1.0, 2.0])
    def test_exhaustive_tiny_series(self, s_n, lag, alpha):
        compared, mismatches = run_exhaustive(exhaustive_cases(), s_n, lag, alpha)
        assert compared > 1000 and mismatches == 0

    @given(arrays(np.float64, 12, elements=st.sampled_from([0.0, 1.0, -1.0, 2.0, -2.0])),
           st.integers(0, 2), st.data())
    def test_length_twelve(self, x, s_n, data):
        lag = data.draw(st.integers(-s_n, s_n))
        s = Series.padded(x, s_n + abs(lag))
        if not np.any(np.abs(s.core) > 1.0):
            return
        for kind, thr in EXHAUSTIVE_SETS:
            got = projection(s, 1.0, s_n, lag, 2.0, IntervalSet(kind, thr))
            assert got == naive_projection(x, s.start, s.stop, 1.0, s_n, lag, 2.0, kind, thr)

    @given(series_values, st.integers(0, 5), st.data(), st.floats(0.3, 5), st.floats(-3, 3))
    def test_real_valued(self, x, s_n, data, alpha, thr):
        lag = data.draw(st.integers(-s_n, s_n))
        s = Series.padded(x, s_n + abs(lag))
        u = quantile_u(s)
        if u is None:
            return
        got = projection(s, u, s_n, lag, alpha, LE(thr))
        assert got == pytest.approx(naive_projection(x, s.start, s.stop, u, s_n, lag, alpha, "le", thr),
                                    abs=1e-12)


class TestInvariances:
    @given(series_values, st.floats(1e-3, 1e3), st.integers(-2, 2), st.floats(-3, 3))
    def test_scale_invariance(self, x, c, lag, thr):
        s = Series.padded(x, 4)
        u = quantile_u(s)
        if u is None:
            return
        sc = s.scaled(c)
        uc = u * c
        if not np.array_equal(np.abs(sc.core) > uc, np.abs(s.core) > u):
            return  # rounding moved an observation across the threshold
        A = LE(thr)
        assert forward(sc, uc, lag, A) == pytest.approx(forward(s, u, lag, A), abs=1e-12)
        assert backward(sc, uc, lag, A, 2.0) == pytest.approx(backward(s, u, lag, A, 2.0), abs=1e-12)
        assert projection(sc, uc, 2, lag, 2.0, A) == pytest.approx(projection(s, u, 2, lag, 2.0, A), abs=1e-12)
        try:
            hill(s, u), hill(sc, uc)
        except DegenerateThreshold:
            return
        assert projection_hat(sc, uc, 2, lag, A) == pytest.approx(projection_hat(s, u, 2, lag, A), abs=1e-12)

    @given(st.integers(0, 2**32 - 1), st.sampled_from(["garcht", "sre", "sv"]), st.integers(-3, 3))
    def test_monotone_in_x(self, seed, kind, lag):
        cfg = EstimatorConfig(Quantile(0.9), 5, lag, 2.0)
        s = simulate(ModelSpec(kind, seed, burn_in=100), 300, padding=cfg.padding)
        rep = cdf_curve(s, cfg, linear_grid(-2, 2, 0.05), ("forward", "projection_hat", "projection"))
        for v in rep.values.values():
            assert np.all(np.diff(v) >= 0)
        u = rep.meta["u_n"]
        literal = backward(s, u, lag, [LE(x) for x in rep.x], 2.0)
        assert np.all(np.diff(literal) >= 0)


@pytest.fixture(scope="module")
def garch():
    cfg = EstimatorConfig(Quantile(0.95), 30, 1)
    return simulate(ModelSpec("garcht", 11), 2000 + 2 * cfg.padding, padding=cfg.padding), cfg


class TestCdfCurve:
    def test_matches_single_calls(self, garch):
        s, cfg = garch
        grid = linear_grid(-2, 2, 0.01)
        rep = cdf_curve(s, cfg, grid)
        u, a = rep.meta["u_n"], rep.meta["alpha_hat"]
        assert rep.x.size == 401
        fwd = np.array([forward(s, u, 1, LE(x)) for x in grid])
        proj = np.array([projection_hat(s, u, 30, 1, LE(x)) for x in grid])
        bwd = np.array([backward_cdf(s, u, 1, [x], a)[0] for x in grid])
        np.testing.assert_array_equal(rep.values["forward"], fwd)
        np.testing.assert_array_equal(rep.values["projection_hat"], proj)
        np.testing.assert_array_equal(rep.values["backward"], bwd)

    def test_singleton_grid(self, garch):
        s, cfg = garch
        rep = cdf_curve(s, cfg, [0.3])
        assert rep.values["projection_hat"][0] == projection_hat(s, rep.meta["u_n"], 30, 1, LE(0.3))

    def test_limits(self, garch):
        s, cfg = garch
        rep = cdf_curve(s, cfg, [-1e6, 1e6])
        assert rep.values["forward"].tolist() == [0.0, 1.0]
        assert rep.values["projection_hat"][0] == 0.0
        assert rep.values["projection_hat"][1] == pytest.approx(1.0, abs=1e-14)

    def test_known_alpha_requires_alpha(self, garch):
        s, cfg = garch
        with pytest.raises(ValueError):
            cdf_curve(s, cfg, [0.0], ("projection",))

    def test_meta_and_csv(self, garch):
        s, cfg = garch
        rep = cdf_curve(s, cfg, [0.0, 0.5])
        assert rep.meta["exceedances"] == 100 and rep.meta["n"] == 2000
        lines = rep.to_csv().splitlines()
        assert lines[-3] == "x,forward,backward,projection_hat"
        assert len(lines) == len(rep.meta) + 3

    def test_unsorted_grid_rejected(self, garch):
        s, cfg = garch
        with pytest.raises(ValueError):
            cdf_curve(s, cfg, [0.5, 0.0])
