"""Fixed-point continuation for L1-penalized least squares."""

from __future__ import annotations

import numpy as np

from .common import (
    Coefficients,
    SolverError,
    SolverReport,
    SolverStep,
    as_labels,
    as_matrix,
    center_columns,
    restore_intercept,
    soft_threshold,
)

_STAGE_TOL = 1e-7
_MAX_INNER = 50_000


def fpc(
    features,
    labels,
    mu_max: float,
    n_steps: int = 20,
) -> SolverReport:
    """Minimize ||a||_1 + (mu/2) ||X a - y||^2 along an increasing mu path.

    Columns and labels are centered (free intercept).  Each stage iterates the
    shrinkage fixed point a <- soft(a - t mu X^T r, t).  The step starts at the
    safe value 1/(mu rho), rho the largest eigenvalue of X^T X, and thereafter
    uses a Barzilai-Borwein step accepted only when it does not increase the
    objective, falling back to the safe step otherwise.  Stages warm-start and
    mu grows geometrically from 0.99/||X^T y||_inf to mu_max.
    """
    x = as_matrix(features)
    y = as_labels(labels, x.shape[0])
    n, k = x.shape
    if k == 0:
        raise SolverError("fpc needs at least one feature column")
    if mu_max <= 0:
        raise SolverError(f"mu_max must be positive, got {mu_max}")
    if n_steps < 1:
        raise SolverError(f"n_steps must be at least 1, got {n_steps}")

    xc, yc, means, ym = center_columns(x, y)
    corr_max = float(np.abs(xc.T @ yc).max())
    a = np.zeros(k)

    if corr_max == 0.0:
        # Gradient at zero vanishes: zero solves every stage.
        out = Coefficients(restore_intercept(a, means, ym), a)
        base = float(yc @ yc)
        steps = [
            SolverStep(float(mu), 0.5 * float(mu) * base, base / n, 0, out)
            for mu in np.full(n_steps, mu_max)
        ]
        return SolverReport(tuple(steps))

    mu0 = 0.99 / corr_max
    mus = np.geomspace(mu0, mu_max, n_steps) if n_steps > 1 else np.array([mu_max])
    rho = float(np.linalg.eigvalsh(xc.T @ xc)[-1])

    resid = xc @ a - yc
    steps = []
    for mu in mus:
        t_safe = 1.0 / (mu * rho)
        objective = float(np.abs(a).sum()) + 0.5 * mu * float(resid @ resid)
        t_next = t_safe
        for _ in range(_MAX_INNER):
            grad = mu * (xc.T @ resid)
            cand = soft_threshold(a - t_next * grad, t_next)
            resid_cand = resid + xc @ (cand - a)
            obj_cand = float(np.abs(cand).sum()) + 0.5 * mu * float(resid_cand @ resid_cand)
            if t_next != t_safe and obj_cand > objective:
                cand = soft_threshold(a - t_safe * grad, t_safe)
                resid_cand = resid + xc @ (cand - a)
                obj_cand = float(np.abs(cand).sum()) + 0.5 * mu * float(resid_cand @ resid_cand)
            move = cand - a
            change = float(np.abs(move).max())
            dr = resid_cand - resid
            curvature = mu * float(dr @ dr)
            if curvature > 0:
                t_next = min(float(move @ move) / curvature, 1e12 * t_safe)
                t_next = max(t_next, t_safe)
            else:
                t_next = t_safe
            a = cand
            resid = resid_cand
            objective = obj_cand
            if change < _STAGE_TOL:
                break
        out = Coefficients(restore_intercept(a, means, ym), a)
        steps.append(
            SolverStep(float(mu), objective, float(resid @ resid) / n, out.nonzero_count, out)
        )
    return SolverReport(tuple(steps))
