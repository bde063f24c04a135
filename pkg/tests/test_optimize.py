import math

import numpy as np
import pytest

from tempcal import (
    GradientDescentConfig,
    ScalarSearchConfig,
    minimize_gd,
    minimize_scalar,
)


class TestScalarSearch:
    def test_quadratic_in_log_space(self):
        result = minimize_scalar(lambda t: (math.log(t) - math.log(2.0)) ** 2)
        assert result.argmin == pytest.approx(2.0, abs=1e-4)
        assert result.converged

    def test_constant_objective(self):
        result = minimize_scalar(lambda t: 1.0)
        cfg = ScalarSearchConfig()
        assert cfg.lower <= result.argmin <= cfg.upper
        assert result.value == 1.0
        assert result.converged

    def test_non_finite_objective_rejected(self):
        def bad(t):
            return math.nan if t < 0.01 else t
        with pytest.raises(ValueError, match="non-finite"):
            minimize_scalar(bad)

    def test_result_beats_both_endpoints(self):
        cfg = ScalarSearchConfig(lower=0.1, upper=10.0)
        for objective in (lambda t: (t - 3.0) ** 2,
                          lambda t: abs(math.log(t)),
                          lambda t: t + 1.0 / t):
            result = minimize_scalar(objective, cfg)
            assert result.value <= objective(cfg.lower)
            assert result.value <= objective(cfg.upper)

    def test_deterministic(self):
        objective = lambda t: (math.log(t) + 1.2) ** 2 + 0.3
        a = minimize_scalar(objective)
        b = minimize_scalar(objective)
        assert (a.argmin, a.value, a.iterations) == (b.argmin, b.value, b.iterations)

    def test_grid_rescues_non_unimodal_objective(self):
        # wide flat shelf with shallow wiggles plus a sharp distant basin:
        # plain golden section can stall on the shelf
        def objective(t):
            u = math.log(t)
            shelf = 1.0 + 0.01 * math.sin(40.0 * u)
            basin = 0.5 * ((u - 5.0) ** 2) - 2.0 if abs(u - 5.0) < 1.5 else 1e9
            return min(shelf, basin)
        with pytest.warns(RuntimeWarning, match="not unimodal"):
            result = minimize_scalar(objective)
        assert result.argmin == pytest.approx(math.exp(5.0), rel=1e-3)

    def test_iteration_cap_reported(self):
        cfg = ScalarSearchConfig(max_iterations=3)
        result = minimize_scalar(lambda t: (math.log(t) - 1.0) ** 2, cfg)
        assert not result.converged

    def test_config_validation(self):
        with pytest.raises(ValueError):
            ScalarSearchConfig(lower=1.0, upper=0.5)
        with pytest.raises(ValueError):
            ScalarSearchConfig(tolerance=0.0)


class TestGradientDescent:
    @staticmethod
    def quadratic_about(center):
        def value_and_grad(p):
            d = p - center
            return float(d @ d), 2.0 * d
        return value_and_grad

    def test_converges_to_analytic_minimum(self):
        center = np.array([1.0, -2.0, 0.5])
        result = minimize_gd(self.quadratic_about(center), np.zeros(3),
                             GradientDescentConfig(learning_rate=0.1))
        assert np.abs(result.params - center).max() < 1e-4
        assert result.converged

    def test_init_at_minimum_stops_immediately(self):
        center = np.array([0.3, 0.7])
        result = minimize_gd(self.quadratic_about(center), center.copy())
        assert result.iterations <= 1
        assert result.converged

    def test_divergence_detected(self):
        with pytest.raises(ValueError, match="diverged"):
            minimize_gd(self.quadratic_about(np.array([1.0, 1.0])),
                        np.zeros(2), GradientDescentConfig(learning_rate=1e6))

    def test_iteration_cap_reported(self):
        result = minimize_gd(self.quadratic_about(np.array([100.0])), np.zeros(1),
                             GradientDescentConfig(learning_rate=1e-4, max_iterations=5))
        assert result.iterations == 5
        assert not result.converged

    def test_l2_penalty_shrinks_solution(self):
        center = np.array([2.0])
        plain = minimize_gd(self.quadratic_about(center), np.zeros(1),
                            GradientDescentConfig(learning_rate=0.1))
        ridged = minimize_gd(self.quadratic_about(center), np.zeros(1),
                             GradientDescentConfig(learning_rate=0.1, l2_penalty=1.0))
        assert abs(ridged.params[0]) < abs(plain.params[0])

    def test_config_validation(self):
        with pytest.raises(ValueError):
            GradientDescentConfig(learning_rate=0.0)
        with pytest.raises(ValueError):
            GradientDescentConfig(l2_penalty=-0.1)
