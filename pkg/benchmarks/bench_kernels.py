"""Micro-benchmark of the compiled kernels against the numpy fallback.

Run from the repository root after installing the package:

    python3 benchmarks/bench_kernels.py [--n 20000] [--k 60] [--repeats 5]

Each kernel is timed with identical inputs on both backends and the speedup
of the compiled extension is reported. The script exits nonzero when the
extension is not built, since then there is nothing to compare.
"""

from __future__ import annotations

import argparse
import sys
import time

import numpy as np

from ruleens._kernels import _py

try:
    from ruleens._kernels import _core
except ImportError:
    print("compiled extension is not built; nothing to benchmark", file=sys.stderr)
    raise SystemExit(1)


def timeit(fn, repeats):
    best = np.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_scan(n, repeats, rng):
    values = np.sort(rng.normal(size=n))
    targets = rng.normal(size=n)
    row = "{:<18} numpy {:>9.4f} ms   cython {:>9.4f} ms   speedup {:>6.1f}x"
    t_py = timeit(lambda: _py.scan_best_split(values, targets, 5), repeats)
    t_cy = timeit(lambda: _core.scan_best_split(values, targets, 5), repeats)
    print(row.format("scan_best_split", t_py * 1e3, t_cy * 1e3, t_py / t_cy))


def bench_eval(n, k, repeats, rng):
    x = np.ascontiguousarray(rng.normal(size=(n, k)))
    n_rules = 200
    offsets = [0]
    attrs, los, his = [], [], []
    for _ in range(n_rules):
        for _ in range(int(rng.integers(1, 5))):
            attrs.append(int(rng.integers(0, k)))
            lo = float(rng.normal())
            los.append(lo)
            his.append(lo + 1.0)
        offsets.append(len(attrs))
    args = (
        x,
        np.asarray(offsets, dtype=np.int64),
        np.asarray(attrs, dtype=np.int64),
        np.asarray(los),
        np.asarray(his),
    )
    row = "{:<18} numpy {:>9.4f} ms   cython {:>9.4f} ms   speedup {:>6.1f}x"
    t_py = timeit(lambda: _py.eval_rules(*args), repeats)
    t_cy = timeit(lambda: _core.eval_rules(*args), repeats)
    print(row.format("eval_rules", t_py * 1e3, t_cy * 1e3, t_py / t_cy))


def bench_sweep(n, k, repeats, rng):
    x = rng.normal(size=(n, k))
    x -= x.mean(axis=0)
    x /= np.sqrt((x * x).mean(axis=0))
    xf = np.asfortranarray(x)
    y = rng.normal(size=n)

    def run(impl):
        coef = np.zeros(k)
        resid = y.copy()
        for _ in range(20):
            impl.cd_sweep(xf, resid, coef, 0.05, 1.0)

    row = "{:<18} numpy {:>9.4f} ms   cython {:>9.4f} ms   speedup {:>6.1f}x"
    t_py = timeit(lambda: run(_py), repeats)
    t_cy = timeit(lambda: run(_core), repeats)
    print(row.format("cd_sweep x20", t_py * 1e3, t_cy * 1e3, t_py / t_cy))


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=20000)
    ap.add_argument("--k", type=int, default=60)
    ap.add_argument("--repeats", type=int, default=5)
    args = ap.parse_args()

    rng = np.random.default_rng(0)
    print(f"n={args.n} k={args.k} repeats={args.repeats} (best-of)")
    bench_scan(args.n, args.repeats, rng)
    bench_eval(args.n, args.k, args.repeats, rng)
    bench_sweep(args.n, args.k, args.repeats, rng)


if __name__ == "__main__":
    main()
