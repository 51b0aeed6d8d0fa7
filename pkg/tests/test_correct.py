import math

import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from gtcorr import approx, correct
from gtcorr.approx import MetricKind
from gtcorr.correct import ConvergenceError, CorrectionConfig, InfeasibleCorrection

BUILTINS = [MetricKind.MEAN, MetricKind.MEDIAN, MetricKind.TAIL95]


class TestMarking:
    def test_pythagorean(self):
        r = correct.correct_marking(5.0, 3.0)
        assert r.real_stat == 4.0
        assert r.impact == 1.0
        assert r.sigma_real == pytest.approx(4.0 / MetricKind.MEAN.gamma)

    def test_zero_marking(self):
        assert correct.correct_marking(2.5, 0.0, MetricKind.MEDIAN).real_stat == 2.5

    def test_bounds_example(self):
        lo, hi = correct.marking_impact_bounds(100.0, 3.0)
        assert lo == pytest.approx(0.045, rel=1e-15)
        assert hi == pytest.approx(0.045685279187817259, rel=1e-15)

    @pytest.mark.parametrize("u,v", [(1.0, 1.0), (1.0, 2.0)])
    def test_infeasible(self, u, v):
        with pytest.raises(InfeasibleCorrection) as info:
            correct.correct_marking(u, v)
        assert info.value.stage == "marking"

    @pytest.mark.parametrize("u,v", [(0.0, 0.0), (-1.0, 0.0), (1.0, -0.1), (math.nan, 0.1), (math.inf, 1.0)])
    def test_invalid_inputs(self, u, v):
        with pytest.raises(ValueError):
            correct.correct_marking(u, v)

    @settings(max_examples=200)
    @given(st.floats(1e-3, 1e4), st.floats(0.0, 0.999))
    def test_impact_inside_bounds(self, u, ratio):
        v = ratio * u
        assume(v > 0)
        r = correct.correct_marking(u, v)
        lo, hi = r.bounds
        # strict in exact arithmetic; allow one rounding unit either side
        tol = 4 * math.ulp(u)
        assert lo - tol <= r.impact <= hi + tol

    @settings(max_examples=200)
    @given(st.floats(1e-3, 1e3), st.floats(0.0, 1.0))
    def test_round_trip(self, real, ratio):
        v = ratio * real
        u = math.sqrt(real * real + v * v)
        assert correct.correct_marking(u, v).real_stat == pytest.approx(real, rel=1e-12)

    @settings(max_examples=200)
    @given(st.floats(1e-3, 1e3), st.floats(0.0, 1e4))
    def test_round_trip_ill_conditioned(self, real, v):
        # rounding u = hypot(real, v) perturbs u^2 - v^2 by ~u^2 eps, so the
        # recovered value can only be trusted to ~eps u^2 / real
        u = math.hypot(real, v)
        assume(v < u)
        tol = 8 * 2.0**-52 * u * u / real
        assert abs(correct.correct_marking(u, v).real_stat - real) <= tol

    def test_tail_ratios(self):
        med, mean = correct.tail_ratios()
        assert med == pytest.approx(2.0789, abs=1e-4)
        assert mean == pytest.approx(1.9530, abs=1e-4)


def _map_forward(sigma, v, metric):
    c = approx.builtin_constants(metric)
    return sigma * c.gamma + approx.delta_approx(v, sigma, c)


class TestMap:
    def test_known_solution(self):
        # independent bisection at 50 digits on the same model
        r = correct.correct_map(10.0, 5.0, MetricKind.MEAN)
        assert r.sigma_real == pytest.approx(7.2232998670630091, abs=1e-8)
        assert r.real_stat == pytest.approx(9.0530638414592429, abs=1e-8)
        assert r.impact == pytest.approx(10.0 - r.real_stat)

    def test_zero_offset_is_identity(self):
        for m in BUILTINS:
            r = correct.correct_map(3.0, 0.0, m)
            assert r.real_stat == pytest.approx(3.0, rel=1e-15)

    def test_root_residual(self):
        c = approx.builtin_constants(MetricKind.MEDIAN)
        r = correct.correct_map(4.0, 2.0, MetricKind.MEDIAN)
        assert abs(4.0 - _map_forward(r.sigma_real, 2.0, MetricKind.MEDIAN)) <= c.gamma * 1e-9

    @pytest.mark.parametrize("metric", BUILTINS)
    @settings(max_examples=40, deadline=None)
    @given(sigma=st.floats(0.05, 50.0), w=st.floats(0.0, 5.0))
    def test_round_trip_approx_model(self, metric, sigma, w):
        v = w * sigma
        u = _map_forward(sigma, v, metric)
        assume(v < u)
        r = correct.correct_map(u, v, metric)
        assert r.sigma_real == pytest.approx(sigma, rel=1e-7)

    @pytest.mark.parametrize("metric", BUILTINS)
    def test_correction_reduces_statistic(self, metric):
        for v in (0.1, 1.0, 2.0, 2.9):
            r = correct.correct_map(3.0, v, metric)
            assert 0 < r.real_stat < 3.0

    def test_infeasible(self):
        with pytest.raises(InfeasibleCorrection) as info:
            correct.correct_map(2.0, 2.0)
        assert info.value.stage == "map"

    def test_non_builtin_needs_constants(self):
        with pytest.raises(approx.NotBuiltIn):
            correct.correct_map(2.0, 1.0, MetricKind(0.25))

    def test_custom_constants_metric_mismatch(self):
        c = approx.builtin_constants(MetricKind.MEAN)
        with pytest.raises(ValueError):
            correct.correct_map(2.0, 1.0, MetricKind.MEDIAN, c)

    def test_iteration_cap(self):
        with pytest.raises(ConvergenceError):
            correct.correct_map(10.0, 5.0, cfg=CorrectionConfig(epsilon=1e-12, max_iterations=3))

    @pytest.mark.parametrize("eps,its", [(0.0, 10), (-1.0, 10), (1e-9, 0)])
    def test_config_validation(self, eps, its):
        with pytest.raises(ValueError):
            CorrectionConfig(epsilon=eps, max_iterations=its)

    def test_epsilon_controls_precision(self):
        loose = correct.correct_map(10.0, 5.0, cfg=CorrectionConfig(epsilon=1e-3))
        tight = correct.correct_map(10.0, 5.0)
        assert abs(loose.sigma_real - tight.sigma_real) <= 1e-3


class TestPipeline:
    def test_worked_example(self):
        r = correct.correct_pipeline(6.0, 2.0, 3.0, MetricKind.MEAN)
        assert r.provenance["validation"] == 6.0
        assert r.provenance["after_map"] == pytest.approx(5.79, abs=0.02)
        assert r.provenance["after_marking"] == pytest.approx(4.95, abs=0.02)
        assert r.real_stat == r.provenance["after_marking"]
        assert r.impact == pytest.approx(6.0 - r.real_stat)

    def test_composition(self):
        after = correct.correct_map(6.0, 2.0).real_stat
        final = correct.correct_marking(after, 3.0).real_stat
        assert correct.correct_pipeline(6.0, 2.0, 3.0).real_stat == final

    def test_marking_stage_infeasible(self):
        with pytest.raises(InfeasibleCorrection) as info:
            correct.correct_pipeline(6.0, 2.0, 5.9)
        assert info.value.stage == "marking"

    def test_map_stage_infeasible(self):
        with pytest.raises(InfeasibleCorrection) as info:
            correct.correct_pipeline(6.0, 6.5, 1.0)
        assert info.value.stage == "map"
