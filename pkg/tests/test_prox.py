"""Proximal primitives checked against slow independent oracles.

soft_threshold is validated against grid refinement of the prox objective
0.5*(t-z)^2 + gamma*|t|; project_l1 against bisection on the shrinkage
threshold theta solving sum(max(|v|-theta, 0)) = sigma.
"""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ruleens.solvers import project_l1, soft_threshold


def prox_grid_oracle(z: float, gamma: float) -> float:
    """Minimize 0.5*(t-z)^2 + gamma*|t| by successive grid refinement."""

    def objective(t):
        return 0.5 * (t - z) ** 2 + gamma * np.abs(t)

    lo, hi = -12.0, 12.0
    best = 0.0
    for _ in range(5):
        grid = np.linspace(lo, hi, 401)
        vals = objective(grid)
        best = float(grid[int(np.argmin(vals))])
        width = (hi - lo) / 400
        lo, hi = best - width, best + width
    return best


def project_bisect_oracle(v: np.ndarray, sigma: float) -> np.ndarray:
    """Bisection on theta >= 0 with sum(max(|v|-theta, 0)) = sigma."""
    av = np.abs(v)
    if av.sum() <= sigma:
        return v.copy()
    lo, hi = 0.0, float(av.max())
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if np.maximum(av - mid, 0.0).sum() > sigma:
            lo = mid
        else:
            hi = mid
    theta = 0.5 * (lo + hi)
    return np.sign(v) * np.maximum(av - theta, 0.0)


class TestSoftThreshold:
    def test_frozen_examples(self):
        assert soft_threshold(3.0, 1.0) == 2.0
        assert soft_threshold(-0.5, 1.0) == 0.0
        assert soft_threshold(-3.0, 0.5) == -2.5

    def test_array_input(self):
        out = soft_threshold(np.array([3.0, -0.5, -3.0, 0.0]), 0.5)
        assert np.array_equal(out, [2.5, 0.0, -2.5, 0.0])

    def test_zero_gamma_is_identity(self):
        z = np.linspace(-4, 4, 17)
        assert np.array_equal(soft_threshold(z, 0.0), z)

    def test_negative_gamma_rejected(self):
        with pytest.raises(ValueError):
            soft_threshold(1.0, -0.1)

    def test_matches_grid_oracle(self):
        rng = np.random.default_rng(7)
        for _ in range(500):
            z = float(rng.uniform(-8, 8))
            gamma = float(rng.uniform(0, 5))
            assert soft_threshold(z, gamma) == pytest.approx(
                prox_grid_oracle(z, gamma), abs=1e-6
            )

    @given(
        z=st.floats(-50, 50),
        gamma=st.floats(0, 20),
        t=st.floats(-100, 100),
    )
    @settings(max_examples=200)
    def test_is_prox_minimizer(self, z, gamma, t):
        s = soft_threshold(z, gamma)
        left = 0.5 * (s - z) ** 2 + gamma * abs(s)
        right = 0.5 * (t - z) ** 2 + gamma * abs(t)
        assert left <= right + 1e-9


class TestProjectL1:
    def test_frozen_examples(self):
        assert np.allclose(project_l1(np.array([3.0, 0.0]), 1.0), [1.0, 0.0])
        assert np.array_equal(project_l1(np.array([0.2, 0.3]), 1.0), [0.2, 0.3])
        assert np.allclose(project_l1(np.array([2.0, 1.0]), 2.0), [1.5, 0.5])

    def test_sigma_zero(self):
        out = project_l1(np.array([1.0, -2.0, 3.0]), 0.0)
        assert np.array_equal(out, np.zeros(3))

    def test_negative_sigma_rejected(self):
        with pytest.raises(ValueError):
            project_l1(np.array([1.0]), -1.0)

    def test_sign_preserved(self):
        v = np.array([-3.0, 2.0, -0.1, 0.5])
        out = project_l1(v, 1.0)
        assert np.all(out * v >= 0.0)

    def test_matches_bisection_oracle(self):
        rng = np.random.default_rng(11)
        for _ in range(200):
            dim = int(rng.integers(1, 101))
            v = rng.normal(scale=3.0, size=dim)
            sigma = float(rng.uniform(0, 1.2 * np.abs(v).sum() + 0.1))
            out = project_l1(v, sigma)
            assert np.abs(v).sum() <= sigma or np.abs(out).sum() <= sigma + 1e-12
            assert np.allclose(out, project_bisect_oracle(v, sigma), atol=1e-10)

    def test_idempotent(self):
        rng = np.random.default_rng(3)
        v = rng.normal(size=40)
        once = project_l1(v, 2.5)
        assert np.allclose(project_l1(once, 2.5), once, atol=1e-12)

    @given(
        st.lists(st.floats(-10, 10), min_size=1, max_size=30),
        st.floats(0, 20),
    )
    @settings(max_examples=200)
    def test_feasible_and_no_farther_than_oracle(self, values, sigma):
        v = np.array(values)
        out = project_l1(v, sigma)
        assert np.abs(out).sum() <= sigma + 1e-9
        ref = project_bisect_oracle(v, sigma)
        # Euclidean optimality: no farther from v than the oracle point.
        assert np.sum((out - v) ** 2) <= np.sum((ref - v) ** 2) + 1e-9
