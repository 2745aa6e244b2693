"""Shared solver types and proximal primitives."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..loss import LossKind


class SolverError(Exception):
    """Raised for invalid solver inputs or unusable feature matrices."""


def as_matrix(features) -> np.ndarray:
    """Accept a FeatureMatrix or a plain 2-D array."""
    x = getattr(features, "values", features)
    x = np.ascontiguousarray(np.asarray(x, dtype=np.float64))
    if x.ndim != 2:
        raise SolverError(f"feature matrix must be 2-D, got shape {x.shape}")
    if not np.isfinite(x).all():
        raise SolverError("feature matrix contains non-finite values")
    return x


def as_labels(labels, n: int) -> np.ndarray:
    y = np.asarray(labels, dtype=np.float64)
    if y.shape != (n,):
        raise SolverError(f"labels must have length {n}, got shape {y.shape}")
    return y


@dataclass(frozen=True)
class Coefficients:
    a0: float
    a: np.ndarray
    nonzero_count: int = field(init=False)

    def __post_init__(self):
        arr = np.array(self.a, dtype=np.float64)  # defensive copy
        object.__setattr__(self, "a", arr)
        object.__setattr__(self, "a0", float(self.a0))
        object.__setattr__(self, "nonzero_count", int(np.count_nonzero(arr)))


@dataclass(frozen=True)
class SolverStep:
    parameter: float
    objective: float
    risk: float
    nonzero_count: int
    coefficients: Coefficients


@dataclass(frozen=True)
class SolverReport:
    steps: tuple[SolverStep, ...]

    def __post_init__(self):
        object.__setattr__(self, "steps", tuple(self.steps))

    @property
    def final(self) -> Coefficients:
        if not self.steps:
            raise SolverError("solver produced no steps")
        return self.steps[-1].coefficients

    def to_csv(self) -> str:
        lines = ["step,parameter,objective,risk,nonzeros"]
        for i, s in enumerate(self.steps):
            lines.append(f"{i},{s.parameter!r},{s.objective!r},{s.risk!r},{s.nonzero_count}")
        return "\n".join(lines) + "\n"


def fit_intercept(labels: np.ndarray, kind: LossKind) -> float:
    """Risk-minimizing constant score: the label mean (clamped for ramp loss)."""
    y = np.asarray(labels, dtype=np.float64)
    if y.size == 0:
        raise SolverError("fit_intercept needs at least one label")
    mean = float(y.mean())
    if kind is LossKind.SQUARED_RAMP:
        return max(-1.0, min(1.0, mean))
    return mean


def soft_threshold(z, gamma):
    """Proximal operator of gamma*|.|: shrink toward zero by gamma."""
    if gamma < 0:
        raise ValueError("gamma must be non-negative")
    if isinstance(z, np.ndarray):
        return np.sign(z) * np.maximum(np.abs(z) - gamma, 0.0)
    mag = abs(z) - gamma
    return (mag if z >= 0 else -mag) if mag > 0 else 0.0


def project_l1(v: np.ndarray, sigma: float) -> np.ndarray:
    """Euclidean projection onto the L1 ball of radius sigma (sort-based)."""
    if sigma < 0:
        raise ValueError("sigma must be non-negative")
    v = np.asarray(v, dtype=np.float64)
    av = np.abs(v)
    if av.sum() <= sigma:
        return v.copy()
    if sigma == 0.0:
        return np.zeros_like(v)
    u = np.sort(av)[::-1]
    css = np.cumsum(u)
    j = np.arange(1, v.size + 1)
    above = np.flatnonzero(u > (css - sigma) / j)
    if above.size == 0:
        # sigma is below float resolution of the entries; the projection
        # shrinks everything to (numerically) zero.
        return np.zeros_like(v)
    rho = int(above.max())
    theta = (css[rho] - sigma) / (rho + 1)
    return np.sign(v) * np.maximum(av - theta, 0.0)


def center_columns(x: np.ndarray, y: np.ndarray):
    """Remove column/label means (a free, unpenalized intercept)."""
    xm = x.mean(axis=0)
    ym = float(y.mean())
    return x - xm, y - ym, xm, ym


def standardize_columns(x: np.ndarray):
    """Zero mean, unit second moment per column; constant columns scale by 1."""
    m = x.mean(axis=0)
    s = np.sqrt(((x - m) ** 2).mean(axis=0))
    s = np.where(s == 0.0, 1.0, s)
    return (x - m) / s, m, s


def restore_intercept(a: np.ndarray, col_means: np.ndarray, y_mean: float) -> float:
    return y_mean - float(col_means @ a)
