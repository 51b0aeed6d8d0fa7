import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gtcorr import approx
from gtcorr.approx import ApproxConstants, FitError, MetricKind, NotBuiltIn

BUILTINS = [MetricKind.MEAN, MetricKind.MEDIAN, MetricKind.TAIL95]


class TestMetricKind:
    @pytest.mark.parametrize(
        "text,expected",
        [
            ("mean", MetricKind.MEAN),
            ("Median", MetricKind.MEDIAN),
            ("tail", MetricKind.TAIL95),
            ("tail95", MetricKind.TAIL95),
            ("p95", MetricKind.TAIL95),
            ("p50", MetricKind.MEDIAN),
            ("q25", MetricKind(0.25)),
            ("p2.5", MetricKind(0.025)),
        ],
    )
    def test_parse(self, text, expected):
        assert MetricKind.parse(text) == expected

    @pytest.mark.parametrize("text", ["", "avg", "p0", "p100", "p-3", "tail99x"])
    def test_parse_rejects(self, text):
        with pytest.raises(ValueError):
            MetricKind.parse(text)

    @pytest.mark.parametrize("q", [0.0, 1.0, -0.5, 2.0])
    def test_quantile_range(self, q):
        with pytest.raises(ValueError):
            MetricKind(q)

    def test_names(self):
        assert [m.name for m in BUILTINS] == ["mean", "median", "tail95"]
        assert MetricKind(0.25).name == "p25"
        assert str(MetricKind(0.75)) == "p75"

    def test_median_is_a_quantile(self):
        assert MetricKind.quantile(0.5) == MetricKind.MEDIAN
        assert hash(MetricKind.quantile(0.5)) == hash(MetricKind.MEDIAN)

    @pytest.mark.parametrize(
        "metric,gamma",
        [(MetricKind.MEAN, 1.2533), (MetricKind.MEDIAN, 1.1774), (MetricKind.TAIL95, 2.4477)],
    )
    def test_gamma_published_digits(self, metric, gamma):
        assert metric.gamma == pytest.approx(gamma, abs=5e-5)

    @settings(max_examples=30, deadline=None)
    @given(st.floats(0.01, 0.99))
    def test_gamma_is_rayleigh_unit_statistic(self, q):
        from gtcorr import dist

        assert MetricKind(q).gamma == pytest.approx(dist.rayleigh_quantile(dist.RayleighParams(1.0), q), rel=1e-14)


class TestConstants:
    @pytest.mark.parametrize(
        "metric,alpha,beta",
        [(MetricKind.MEAN, 1.2392, 2.3064), (MetricKind.MEDIAN, 1.1471, 2.3384), (MetricKind.TAIL95, 0.7870, 1.9452)],
    )
    def test_builtin_values(self, metric, alpha, beta):
        c = approx.builtin_constants(metric)
        assert (c.alpha, c.beta) == (alpha, beta)
        assert c.gamma == metric.gamma
        assert c.metric == metric

    def test_not_builtin(self):
        with pytest.raises(NotBuiltIn):
            approx.builtin_constants(MetricKind(0.25))

    @pytest.mark.parametrize("alpha,beta,gamma", [(0, 2, 1), (1, 1, 1), (1, 2, 0), (-1, 2, 1)])
    def test_validation(self, alpha, beta, gamma):
        with pytest.raises(ValueError):
            ApproxConstants(MetricKind.MEAN, alpha, beta, gamma)


class TestDelta:
    def test_exact_zero_offset(self):
        for m in BUILTINS:
            assert approx.delta_exact(0.0, 1.0, m) == 0.0

    def test_exact_mean_oracle(self):
        # x * pdf integrated with mpmath at 40 digits, minus sigma sqrt(pi/2)
        assert approx.delta_exact(2.0, 1.0, MetricKind.MEAN) == pytest.approx(1.0190692907532423, rel=1e-9)

    def test_exact_mean_large_offset(self):
        # Rice mean -> v + sigma^2/(2v) for v >> sigma
        assert approx.delta_exact(100.0, 1.0, MetricKind.MEAN) == pytest.approx(100.005 - 1.2533141373155, abs=1e-6)

    @pytest.mark.parametrize("metric", BUILTINS)
    def test_exact_nonnegative_and_increasing(self, metric):
        vals = approx.delta_exact_grid(metric, np.linspace(0, 6, 61))
        assert vals[0] == 0
        assert np.all(np.diff(vals) > 0)

    def test_exact_scales_with_sigma(self):
        for m in BUILTINS:
            assert approx.delta_exact(6.0, 2.0, m) == pytest.approx(2.0 * approx.delta_exact(3.0, 1.0, m), rel=1e-9)

    def test_exact_negative_offset(self):
        with pytest.raises(ValueError):
            approx.delta_exact(-1.0, 1.0, MetricKind.MEAN)

    def test_approx_oracle(self):
        c = approx.builtin_constants(MetricKind.MEAN)
        with mpmath.workdps(30):
            a, b = mpmath.mpf("1.2392"), mpmath.mpf("2.3064")
            expected = float(a * ((1 + (mpmath.mpf("0.433") / a) ** b) ** (1 / b) - 1))
        assert expected == pytest.approx(0.046392650105558434, rel=1e-12)
        assert approx.delta_approx(0.433, 1.0, c) == pytest.approx(expected, rel=1e-12)

    def test_approx_far_offset(self):
        c = approx.builtin_constants(MetricKind.MEAN)
        assert approx.delta_approx(100.0, 1.0, c) == pytest.approx(98.762534130541738, rel=1e-12)

    def test_approx_zero(self):
        for m in BUILTINS:
            assert approx.delta_approx(0.0, 3.0, approx.builtin_constants(m)) == 0.0

    @settings(max_examples=60)
    @given(st.floats(0.0, 1e3), st.floats(1e-2, 1e2))
    def test_approx_between_zero_and_offset(self, v, sigma):
        # delta is increasing, bounded below by 0 and above by v
        for m in BUILTINS:
            d = approx.delta_approx(v, sigma, approx.builtin_constants(m))
            assert 0.0 <= d <= v * (1 + 1e-12)

    @settings(max_examples=40)
    @given(st.floats(1e-3, 50.0), st.floats(0.1, 10.0), st.floats(1.0, 10.0))
    def test_approx_homogeneous(self, w, sigma, k):
        c = approx.builtin_constants(MetricKind.MEDIAN)
        assert approx.delta_approx(k * w * sigma, k * sigma, c) == pytest.approx(
            k * approx.delta_approx(w * sigma, sigma, c), rel=1e-12
        )

    @pytest.mark.parametrize("metric", BUILTINS)
    def test_builtin_approximation_error_small(self, metric):
        c = approx.builtin_constants(metric)
        grid = np.linspace(0, 10, 101)
        exact = approx.delta_exact_grid(metric, grid)
        appr = np.array([approx.delta_approx(v, 1.0, c) for v in grid])
        assert np.sqrt(np.mean((exact - appr) ** 2)) < 0.01
        assert np.max(np.abs(exact - appr)) < 0.03


class TestFit:
    def test_default_grid(self):
        g = approx.default_grid()
        assert g.size == 1001
        assert g[0] == 0 and g[-1] == pytest.approx(10.0)

    @pytest.mark.parametrize("grid", [[], [0.0], [1.0], [0.0, 2.0, 2.0], [-1.0, 1.0, 2.0], [1.0, math.nan]])
    def test_degenerate_grid(self, grid):
        with pytest.raises(ValueError):
            approx.fit_constants(MetricKind.MEAN, grid)

    def test_fit_coarse_grid_near_published(self):
        grid = np.arange(0, 10.0001, 0.1)
        c = approx.fit_constants(MetricKind.MEAN, grid)
        assert c.alpha == pytest.approx(1.2392, abs=0.05)
        assert c.beta == pytest.approx(2.3064, abs=0.10)
        assert c.rmse <= 0.01
        assert c.gamma == MetricKind.MEAN.gamma

    def test_fit_is_local_minimum_and_deterministic(self):
        grid = np.arange(0, 8.0001, 0.2)
        c1 = approx.fit_constants(MetricKind.MEDIAN, grid)
        c2 = approx.fit_constants(MetricKind.MEDIAN, grid[::-1])
        assert (c1.alpha, c1.beta) == pytest.approx((c2.alpha, c2.beta), abs=1e-9)
        target = approx.delta_exact_grid(MetricKind.MEDIAN, grid)
        base = approx._rmse((c1.alpha, c1.beta), grid, target)
        assert base == pytest.approx(c1.rmse, rel=1e-12)
        for da, db in [(1e-4, 0), (-1e-4, 0), (0, 1e-4), (0, -1e-4)]:
            assert approx._rmse((c1.alpha + da, c1.beta + db), grid, target) >= base

    def test_fit_non_builtin_metric(self):
        c = approx.fit_constants(MetricKind(0.25), np.arange(0, 6.0001, 0.2))
        assert c.metric == MetricKind(0.25)
        assert c.rmse < 0.02

    def test_fit_error_carries_best(self, monkeypatch):
        # a one-round cap cannot finish the polish
        orig = approx._compass_polish
        monkeypatch.setattr(approx, "_compass_polish", lambda *a, **k: orig(*a, max_rounds=1, **k))
        with pytest.raises(FitError) as info:
            approx.fit_constants(MetricKind.MEAN, [0.5, 1.0, 2.0], max_iter=1)
        assert isinstance(info.value.best, ApproxConstants)
