"""Thresholded gradient descent on the squared ramp loss.

Coordinates whose gradient magnitude reaches a fraction tau of the largest
magnitude move together by a small step.  tau=0 updates every coordinate,
tau=1 only the steepest one, and values in between trace a path of
intermediate sparsity.

The expensive part of each iteration is refreshing the gradient.  Because
scores move by a sparse, known amount, PathbuildState folds each step into
the previous gradient instead of recomputing the full matrix product:
correlation rows for updated coordinates are cached and the ramp's active
indicator is patched only on the rows whose score crossed +-1.
"""

from __future__ import annotations

import numpy as np

from ..loss import LossKind, risk
from .common import (
    Coefficients,
    SolverError,
    SolverReport,
    SolverStep,
    as_labels,
    as_matrix,
    fit_intercept,
)


class PathbuildState:
    """Scores, active-row indicator, and gradient kept consistent incrementally.

    The gradient of the mean squared ramp loss with respect to coefficient k is

        g_k = (2/N) sum_i v_i (y_i - F_i) x_ik,   v_i = 1 if |F_i| < 1 else 0.

    After a step a_j += delta_j over a sparse index set, the new gradient is
    the old one, minus delta-weighted correlation rows computed under the old
    indicator, plus a correction restricted to rows whose indicator flipped.
    Cached correlation rows are then patched on the same flipped rows so they
    match the new indicator.
    """

    def __init__(self, features, labels, a0: float):
        x = as_matrix(features)
        y = as_labels(labels, x.shape[0])
        self.x = x
        self.y = y
        self.n, self.k = x.shape
        self.a0 = float(a0)
        self.a = np.zeros(self.k)
        self.f = np.full(self.n, self.a0)
        self.v = np.abs(self.f) < 1.0
        self.g = (2.0 / self.n) * (x.T @ (self.v * (y - self.f)))
        self._corr_rows: dict[int, np.ndarray] = {}
        self.flip_iterations = 0
        self.total_flips = 0

    def _corr_row(self, j: int) -> np.ndarray:
        """(2/N) X^T (v * x_j) under the current indicator, cached."""
        row = self._corr_rows.get(j)
        if row is None:
            row = (2.0 / self.n) * (self.x.T @ (self.v * self.x[:, j]))
            self._corr_rows[j] = row
        return row

    def apply_step(self, indices, deltas) -> None:
        indices = np.asarray(indices, dtype=np.int64)
        deltas = np.asarray(deltas, dtype=np.float64)
        if indices.shape != deltas.shape or indices.ndim != 1:
            raise SolverError("indices and deltas must be aligned 1-D arrays")
        live = deltas != 0.0
        indices, deltas = indices[live], deltas[live]
        if indices.size == 0:
            return

        shift = np.zeros(self.k)
        for j, dj in zip(indices, deltas):
            shift += dj * self._corr_row(int(j))

        f_new = self.f + self.x[:, indices] @ deltas
        v_new = np.abs(f_new) < 1.0
        flips = np.flatnonzero(v_new != self.v)

        self.g -= shift
        if flips.size:
            z = v_new[flips].astype(np.float64) - self.v[flips]  # +-1 per flip
            x_f = self.x[flips]
            self.g += (2.0 / self.n) * (x_f.T @ (z * (self.y[flips] - f_new[flips])))
            if self._corr_rows:
                js = np.fromiter(self._corr_rows.keys(), dtype=np.int64)
                adj = (2.0 / self.n) * (x_f.T @ (z[:, None] * x_f[:, js]))
                for t, j in enumerate(js):
                    self._corr_rows[int(j)] += adj[:, t]
            self.flip_iterations += 1
            self.total_flips += int(flips.size)

        self.a[indices] += deltas
        self.f = f_new
        self.v = v_new


def pathbuild_gradient_update(state: PathbuildState, indices, deltas) -> PathbuildState:
    """Fold one sparse coefficient step into the state; returns the same object."""
    state.apply_step(indices, deltas)
    return state


def pathbuild(
    features,
    labels,
    tau: float,
    delta: float = 0.01,
    max_iter: int = 5000,
    grad_tol: float = 1e-6,
) -> tuple[Coefficients, SolverReport]:
    """Fit a sparse linear score by thresholded gradient descent.

    Returns the coefficients of the best-risk iterate seen.  Stops when the
    gradient is flat, when the risk goes back up, or at max_iter.
    """
    x = as_matrix(features)
    y = as_labels(labels, x.shape[0])
    if x.size == 0 or not np.any(x):
        raise SolverError("pathbuild needs a feature matrix with at least one nonzero entry")
    if not set(np.unique(y)) <= {-1.0, 1.0}:
        raise SolverError("pathbuild needs labels in {-1, +1}")
    if not 0.0 <= tau <= 1.0:
        raise SolverError(f"tau must be in [0, 1], got {tau}")
    if delta <= 0:
        raise SolverError(f"delta must be positive, got {delta}")
    if max_iter < 1:
        raise SolverError(f"max_iter must be at least 1, got {max_iter}")

    kind = LossKind.SQUARED_RAMP
    a0 = fit_intercept(y, kind)
    state = PathbuildState(x, y, a0)

    def snapshot(iteration: int, current: float) -> SolverStep:
        coef = Coefficients(a0, state.a)
        return SolverStep(float(iteration), current, current, coef.nonzero_count, coef)

    current = risk(kind, y, state.f)
    best_risk = current
    best_a = state.a.copy()
    prev_risk = current
    steps = [snapshot(0, current)]

    for it in range(1, max_iter + 1):
        gmax = float(np.abs(state.g).max())
        if gmax < grad_tol:
            break
        active = np.flatnonzero(np.abs(state.g) >= tau * gmax)
        state.apply_step(active, delta * state.g[active])
        current = risk(kind, y, state.f)
        steps.append(snapshot(it, current))
        if current < best_risk:
            best_risk = current
            best_a = state.a.copy()
        if current > prev_risk:
            break
        prev_risk = current

    return Coefficients(a0, best_a), SolverReport(tuple(steps))
