"""Spectral projected gradient for L1-ball-constrained least squares."""

from __future__ import annotations

from collections import deque

import numpy as np

from .common import (
    Coefficients,
    SolverError,
    SolverReport,
    SolverStep,
    as_labels,
    as_matrix,
    center_columns,
    project_l1,
    restore_intercept,
)

_PG_TOL = 1e-6
_ARMIJO = 1e-4
_ALPHA_MIN = 1e-12
_ALPHA_MAX = 1e12


def spg_lasso(
    features,
    labels,
    sigma: float,
    max_iter: int = 2000,
    ls_memory: int = 1,
) -> tuple[Coefficients, SolverReport]:
    """Minimize ||X a - y||^2 subject to ||a||_1 <= sigma.

    Columns and labels are centered (free intercept).  Each iteration projects
    a Barzilai-Borwein gradient step onto the ball and backtracks along the
    feasible segment until a nonmonotone Armijo test against the largest of the
    last ls_memory objective values passes; ls_memory=1 is plain monotone
    descent.  Stops when the projected gradient is flat or at max_iter.
    """
    x = as_matrix(features)
    y = as_labels(labels, x.shape[0])
    n, k = x.shape
    if k == 0:
        raise SolverError("spg_lasso needs at least one feature column")
    if sigma < 0:
        raise SolverError(f"sigma must be non-negative, got {sigma}")
    if max_iter < 1:
        raise SolverError(f"max_iter must be at least 1, got {max_iter}")
    if ls_memory < 1:
        raise SolverError(f"ls_memory must be at least 1, got {ls_memory}")

    xc, yc, means, ym = center_columns(x, y)
    a = np.zeros(k)
    resid = xc @ a - yc
    objective = float(resid @ resid)
    grad = 2.0 * (xc.T @ resid)
    history = deque([objective], maxlen=ls_memory)

    def snapshot(iteration: int) -> SolverStep:
        out = Coefficients(restore_intercept(a, means, ym), a)
        return SolverStep(float(iteration), objective, objective / n, out.nonzero_count, out)

    pg = project_l1(a - grad, sigma) - a
    pg_norm = float(np.abs(pg).max()) if k else 0.0
    alpha = min(max(1.0 / pg_norm, _ALPHA_MIN), _ALPHA_MAX) if pg_norm > 0 else 1.0
    steps = [snapshot(0)]

    for it in range(1, max_iter + 1):
        if pg_norm < _PG_TOL:
            break
        direction = project_l1(a - alpha * grad, sigma) - a
        slope = float(grad @ direction)
        if slope >= 0.0:
            direction = pg
            slope = float(grad @ pg)
            if slope >= 0.0:
                break
        x_dir = xc @ direction
        reference = max(history)
        lam = 1.0
        while True:
            resid_new = resid + lam * x_dir
            obj_new = float(resid_new @ resid_new)
            if obj_new <= reference + _ARMIJO * lam * slope or lam < 1e-13:
                break
            lam *= 0.5
        move = lam * direction
        a = a + move
        grad_new = 2.0 * (xc.T @ resid_new)
        dg = grad_new - grad
        curvature = float(move @ dg)
        if curvature > 0:
            alpha = min(max(float(move @ move) / curvature, _ALPHA_MIN), _ALPHA_MAX)
        else:
            alpha = _ALPHA_MAX
        resid = resid_new
        objective = obj_new
        grad = grad_new
        history.append(objective)
        steps.append(snapshot(it))
        pg = project_l1(a - grad, sigma) - a
        pg_norm = float(np.abs(pg).max())

    out = Coefficients(restore_intercept(a, means, ym), a)
    return out, SolverReport(tuple(steps))
