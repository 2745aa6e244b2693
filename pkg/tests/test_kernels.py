"""Backend parity: the compiled kernels must match the numpy fallback."""

import os
import subprocess
import sys

import numpy as np
import pytest

from ruleens import _kernels
from ruleens._kernels import _py

try:
    from ruleens._kernels import _core
except ImportError:  # extension not built on this machine
    _core = None

needs_core = pytest.mark.skipif(_core is None, reason="compiled extension not built")


def sorted_instance(rng, n, ties=False):
    v = rng.normal(size=n)
    if ties:
        v = np.round(v * 2.0) / 2.0
    order = np.argsort(v, kind="stable")
    return np.ascontiguousarray(v[order]), np.ascontiguousarray(rng.normal(size=n)[order])


def random_rules(rng, n_rules, n_attrs):
    offsets = [0]
    attrs, los, his = [], [], []
    for _ in range(n_rules):
        for _ in range(rng.integers(1, 4)):
            attrs.append(rng.integers(0, n_attrs))
            lo = -np.inf if rng.random() < 0.3 else rng.normal()
            hi = np.inf if rng.random() < 0.3 else lo + abs(rng.normal()) + 0.1
            los.append(lo)
            his.append(hi)
        offsets.append(len(attrs))
    return (
        np.asarray(offsets, dtype=np.int64),
        np.asarray(attrs, dtype=np.int64),
        np.asarray(los, dtype=np.float64),
        np.asarray(his, dtype=np.float64),
    )


@needs_core
class TestScanParity:
    def test_random_instances_exact(self):
        rng = np.random.default_rng(10)
        for trial in range(300):
            n = int(rng.integers(2, 60))
            values, targets = sorted_instance(rng, n, ties=bool(trial % 3 == 0))
            min_count = int(rng.integers(1, 6))
            a = _py.scan_best_split(values, targets, min_count)
            b = _core.scan_best_split(values, targets, min_count)
            if a is None:
                assert b is None
            else:
                assert b is not None
                assert a[0] == b[0]
                assert a[1] == b[1]

    def test_all_equal_values(self):
        values = np.full(20, 3.0)
        targets = np.arange(20, dtype=np.float64)
        assert _py.scan_best_split(values, targets, 1) is None
        assert _core.scan_best_split(values, targets, 1) is None


@needs_core
class TestEvalParity:
    def test_random_rules_exact(self):
        rng = np.random.default_rng(11)
        for _ in range(50):
            n, k = int(rng.integers(1, 80)), int(rng.integers(1, 8))
            x = np.ascontiguousarray(rng.normal(size=(n, k)))
            offsets, attrs, los, his = random_rules(rng, int(rng.integers(1, 12)), k)
            a = _py.eval_rules(x, offsets, attrs, los, his)
            b = _core.eval_rules(x, offsets, attrs, los, his)
            assert np.array_equal(a, b)

    def test_boundary_membership(self):
        x = np.array([[1.0], [2.0], [3.0]])
        offsets = np.array([0, 1], dtype=np.int64)
        attrs = np.array([0], dtype=np.int64)
        los = np.array([1.0])
        his = np.array([3.0])
        for impl in (_py, _core):
            out = impl.eval_rules(x, offsets, attrs, los, his)
            assert out[:, 0].tolist() == [1.0, 1.0, 0.0]  # lo closed, hi open


@needs_core
class TestSweepParity:
    def test_multi_sweep_agreement(self):
        rng = np.random.default_rng(12)
        for _ in range(20):
            n, k = int(rng.integers(5, 60)), int(rng.integers(1, 15))
            x = rng.normal(size=(n, k))
            x -= x.mean(axis=0)
            norms = np.sqrt((x * x).mean(axis=0))
            norms[norms == 0.0] = 1.0
            x /= norms
            xf = np.asfortranarray(x)
            y = rng.normal(size=n)
            thr, denom = float(rng.uniform(0.0, 0.3)), float(rng.uniform(1.0, 2.0))

            coef_a, resid_a = np.zeros(k), y.copy()
            coef_b, resid_b = np.zeros(k), y.copy()
            for _ in range(10):
                da = _py.cd_sweep(xf, resid_a, coef_a, thr, denom)
                db = _core.cd_sweep(xf, resid_b, coef_b, thr, denom)
                assert abs(da - db) < 1e-10
            np.testing.assert_allclose(coef_a, coef_b, rtol=0, atol=1e-10)
            np.testing.assert_allclose(resid_a, resid_b, rtol=0, atol=1e-9)

    def test_inactive_sweep_returns_zero(self):
        x = np.asfortranarray(np.eye(3))
        coef = np.zeros(3)
        resid = np.zeros(3)
        for impl in (_py, _core):
            assert impl.cd_sweep(x, resid.copy(), coef.copy(), 0.5, 1.0) == 0.0


class TestBackendSelection:
    def test_active_backend_is_known(self):
        assert _kernels.BACKEND in ("numpy", "cython")

    def test_env_forces_numpy(self):
        env = dict(os.environ, RULEENS_KERNELS="py")
        out = subprocess.run(
            [sys.executable, "-c", "from ruleens import _kernels; print(_kernels.BACKEND)"],
            env=env, capture_output=True, text=True,
        )
        assert out.returncode == 0
        assert out.stdout.strip() == "numpy"

    def test_env_rejects_unknown(self):
        env = dict(os.environ, RULEENS_KERNELS="fortran")
        out = subprocess.run(
            [sys.executable, "-c", "import ruleens._kernels"],
            env=env, capture_output=True, text=True,
        )
        assert out.returncode != 0
        assert "RULEENS_KERNELS" in out.stderr

    @needs_core
    def test_env_forces_cython(self):
        env = dict(os.environ, RULEENS_KERNELS="cython")
        out = subprocess.run(
            [sys.executable, "-c", "from ruleens import _kernels; print(_kernels.BACKEND)"],
            env=env, capture_output=True, text=True,
        )
        assert out.returncode == 0
        assert out.stdout.strip() == "cython"

    def test_full_suite_importable_under_numpy_backend(self):
        env = dict(os.environ, RULEENS_KERNELS="py")
        code = (
            "import numpy as np\n"
            "from ruleens.dataset import Dataset\n"
            "from ruleens.model import fit_binary, predict_labels\n"
            "from ruleens.rulegen import BoostConfig\n"
            "from ruleens.tree import TreeConfig\n"
            "rng = np.random.default_rng(0)\n"
            "x = rng.normal(size=(40, 3)); x[:20, 0] += 4.0\n"
            "y = np.r_[np.ones(20), -np.ones(20)]\n"
            "d = Dataset(x, y, ('a', 'b', 'c'), ('n', 'p'))\n"
            "tree = TreeConfig(mean_leaves=3.0, attr_sample_fraction=1.0, min_node_count=2)\n"
            "cfg = BoostConfig(max_rules=16, eta=1.0, nu=0.1, tree=tree, seed=0)\n"
            "m = fit_binary(d, boost_cfg=cfg)\n"
            "err = float(np.mean(predict_labels(m, x) != y))\n"
            "assert err <= 0.1, err\n"
            "print('ok')\n"
        )
        out = subprocess.run(
            [sys.executable, "-c", code], env=env, capture_output=True, text=True
        )
        assert out.returncode == 0, out.stderr
        assert out.stdout.strip() == "ok"
