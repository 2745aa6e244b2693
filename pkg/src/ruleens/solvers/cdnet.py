"""Elastic-net coordinate descent over a geometric penalty path."""

from __future__ import annotations

import numpy as np

from .. import _kernels
from .common import (
    Coefficients,
    SolverError,
    SolverReport,
    SolverStep,
    as_labels,
    as_matrix,
    restore_intercept,
    standardize_columns,
)

_SWEEP_TOL = 1e-7
_MAX_SWEEPS = 100_000


def cd_elastic_net(
    features,
    labels,
    alpha: float = 1.0,
    lambda_min: float = 1e-3,
    n_steps: int = 100,
) -> SolverReport:
    """Minimize (1/N)||y - a0 - X a||^2 + lambda (alpha ||a||_1 + (1-alpha) ||a||_2^2).

    Columns are standardized internally (zero mean, unit second moment) and the
    label mean is absorbed into the intercept, so the penalty acts on a common
    scale; reported coefficients are mapped back to the original units.  The path
    starts at the smallest lambda that keeps every coefficient at zero and
    decreases geometrically to lambda_min, warm-starting each stage.
    """
    x = as_matrix(features)
    y = as_labels(labels, x.shape[0])
    n, k = x.shape
    if k == 0:
        raise SolverError("cd_elastic_net needs at least one feature column")
    if not 0.0 <= alpha <= 1.0:
        raise SolverError(f"alpha must be in [0, 1], got {alpha}")
    if lambda_min <= 0:
        raise SolverError(f"lambda_min must be positive, got {lambda_min}")
    if n_steps < 1:
        raise SolverError(f"n_steps must be at least 1, got {n_steps}")

    xs, means, stds = standardize_columns(x)
    ym = float(y.mean())
    yc = y - ym

    lam_max = 2.0 * float(np.abs(xs.T @ yc).max()) / (n * max(alpha, 1e-3))
    lam_hi = max(lam_max, lambda_min)
    if n_steps == 1:
        lambdas = np.array([lambda_min])
    else:
        lambdas = np.geomspace(lam_hi, lambda_min, n_steps)

    xf = np.asfortranarray(xs)
    coef = np.zeros(k)
    resid = yc.copy()
    steps = []
    for lam in lambdas:
        threshold = lam * alpha / 2.0
        denom = 1.0 + lam * (1.0 - alpha)
        for _ in range(_MAX_SWEEPS):
            if _kernels.cd_sweep(xf, resid, coef, threshold, denom) < _SWEEP_TOL:
                break
        a_out = coef / stds
        out = Coefficients(restore_intercept(a_out, means, ym), a_out)
        mse = float(resid @ resid) / n
        penalty = lam * (alpha * float(np.abs(coef).sum()) + (1.0 - alpha) * float(coef @ coef))
        steps.append(SolverStep(float(lam), mse + penalty, mse, out.nonzero_count, out))
    return SolverReport(tuple(steps))
