"""Elastic-net coordinate descent against closed forms and a least-squares oracle."""

import numpy as np
import pytest

from ruleens import _kernels
from ruleens.solvers import SolverError, cd_elastic_net, soft_threshold


def standardized_column(rng, n):
    x = rng.normal(size=n)
    x -= x.mean()
    x /= np.sqrt((x**2).mean())
    return x


def least_squares_with_intercept(x, y):
    design = np.column_stack([np.ones(len(y)), x])
    sol, *_ = np.linalg.lstsq(design, y, rcond=None)
    return sol[0], sol[1:]


class TestSinglePredictor:
    def lasso_fixed_point(self, x, y, lam, alpha):
        """Closed-form single-coordinate solution for standardized x."""
        rho = float(x @ (y - y.mean())) / len(y)
        return soft_threshold(rho, lam * alpha / 2.0) / (1.0 + lam * (1.0 - alpha))

    @pytest.mark.parametrize("alpha", [1.0, 0.5])
    @pytest.mark.parametrize("lam", [0.05, 0.3, 1.0])
    def test_matches_closed_form(self, alpha, lam):
        rng = np.random.default_rng(0)
        x = standardized_column(rng, 200)
        y = 0.8 * x + rng.normal(scale=0.3, size=200)
        report = cd_elastic_net(x[:, None], y, alpha=alpha, lambda_min=lam, n_steps=30)
        expected = self.lasso_fixed_point(x, y, lam, alpha)
        assert report.final.a[0] == pytest.approx(expected, abs=1e-6)


class TestPath:
    def instance(self, seed=1, n=80, k=6):
        rng = np.random.default_rng(seed)
        x = rng.normal(size=(n, k))
        beta = np.array([2.0, -1.0, 0.0, 0.0, 0.5, 0.0])[:k]
        y = x @ beta + rng.normal(scale=0.2, size=n)
        return x, y

    def test_null_solution_at_path_start(self):
        x, y = self.instance()
        report = cd_elastic_net(x, y, alpha=1.0, lambda_min=1e-3, n_steps=40)
        first = report.steps[0]
        assert first.nonzero_count == 0
        assert first.coefficients.a0 == pytest.approx(float(y.mean()))

    def test_small_lambda_matches_least_squares(self):
        x, y = self.instance(seed=2, n=100, k=5)
        report = cd_elastic_net(x, y, alpha=1.0, lambda_min=1e-8, n_steps=60)
        a0_ref, a_ref = least_squares_with_intercept(x, y)
        assert np.allclose(report.final.a, a_ref, atol=1e-3)
        assert report.final.a0 == pytest.approx(a0_ref, abs=1e-3)

    def test_nonzeros_grow_down_the_path(self):
        x, y = self.instance(seed=3)
        report = cd_elastic_net(x, y, alpha=1.0, lambda_min=1e-4, n_steps=50)
        counts = [s.nonzero_count for s in report.steps]
        assert counts[0] == 0
        assert counts[-1] >= max(counts[0], 1)
        assert report.steps[0].parameter > report.steps[-1].parameter

    def test_deterministic(self):
        x, y = self.instance(seed=4)
        r1 = cd_elastic_net(x, y, alpha=0.9, lambda_min=0.01)
        r2 = cd_elastic_net(x, y, alpha=0.9, lambda_min=0.01)
        assert np.array_equal(r1.final.a, r2.final.a)
        assert [s.objective for s in r1.steps] == [s.objective for s in r2.steps]

    def test_single_step_path_solves_at_lambda_min(self):
        x, y = self.instance(seed=5)
        report = cd_elastic_net(x, y, alpha=1.0, lambda_min=0.5, n_steps=1)
        assert len(report.steps) == 1
        assert report.steps[0].parameter == 0.5

    def test_constant_column_is_ignored_not_fatal(self):
        x, y = self.instance(seed=6)
        x = np.column_stack([x, np.full(len(y), 7.0)])
        report = cd_elastic_net(x, y, alpha=1.0, lambda_min=1e-3)
        assert report.final.a[-1] == 0.0


class TestSweepMonotonicity:
    def test_objective_non_increasing_over_sweeps(self):
        """Each full coordinate sweep of the kernel must not raise the objective."""
        rng = np.random.default_rng(7)
        n, k = 60, 8
        x = rng.normal(size=(n, k))
        x -= x.mean(axis=0)
        x /= np.sqrt((x**2).mean(axis=0))
        y = rng.normal(size=n)
        y -= y.mean()
        lam, alpha = 0.2, 0.8
        xf = np.asfortranarray(x)
        coef = np.zeros(k)
        resid = y.copy()

        def objective():
            penalty = alpha * np.abs(coef).sum() + (1 - alpha) * coef @ coef
            return float(resid @ resid) / n + lam * float(penalty)

        prev = objective()
        for _ in range(30):
            _kernels.cd_sweep(xf, resid, coef, lam * alpha / 2.0, 1.0 + lam * (1 - alpha))
            now = objective()
            assert now <= prev + 1e-12
            prev = now

    def test_residual_tracks_coefficients(self):
        rng = np.random.default_rng(8)
        x = rng.normal(size=(30, 4))
        x -= x.mean(axis=0)
        x /= np.sqrt((x**2).mean(axis=0))
        y = rng.normal(size=30)
        y -= y.mean()
        xf = np.asfortranarray(x)
        coef = np.zeros(4)
        resid = y.copy()
        for _ in range(10):
            _kernels.cd_sweep(xf, resid, coef, 0.05, 1.0)
        assert np.allclose(resid, y - x @ coef, atol=1e-10)


class TestValidation:
    def test_alpha_out_of_range(self):
        with pytest.raises(SolverError, match="alpha"):
            cd_elastic_net(np.ones((3, 1)), np.ones(3), alpha=1.5, lambda_min=0.1)

    def test_nonpositive_lambda_min(self):
        with pytest.raises(SolverError, match="lambda_min"):
            cd_elastic_net(np.ones((3, 1)), np.ones(3), lambda_min=0.0)

    def test_empty_feature_matrix(self):
        with pytest.raises(SolverError, match="feature"):
            cd_elastic_net(np.empty((3, 0)), np.ones(3))

    def test_non_finite_rejected(self):
        x = np.array([[1.0], [np.nan], [2.0]])
        with pytest.raises(SolverError, match="finite"):
            cd_elastic_net(x, np.ones(3))
