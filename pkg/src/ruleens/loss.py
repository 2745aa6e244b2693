"""Loss functions, empirical risk, and pseudo residuals.

Two losses are supported. ``squared_error`` is plain (y - f)^2 and is what the
regression trees fit internally. ``squared_ramp`` first clamps the score to
[-1, 1] and is the default for binary classification: once an observation's
score saturates past its label, it stops contributing gradient.
"""

from __future__ import annotations

from enum import Enum

import numpy as np


class LossKind(str, Enum):
    SQUARED_ERROR = "squared_error"
    SQUARED_RAMP = "squared_ramp"


def ramp(f):
    """Clamp a score (scalar or array) to [-1, 1]."""
    if isinstance(f, np.ndarray):
        return np.clip(f, -1.0, 1.0)
    return max(-1.0, min(1.0, float(f)))


def loss(kind: LossKind, y, f):
    """Pointwise loss of score f against label y."""
    if kind is LossKind.SQUARED_RAMP:
        d = y - ramp(f)
    else:
        d = np.asarray(y, dtype=float) - f if isinstance(f, np.ndarray) else y - f
    return d * d


def risk(kind: LossKind, labels: np.ndarray, scores: np.ndarray) -> float:
    """Mean loss over a sample."""
    labels = np.asarray(labels, dtype=float)
    scores = np.asarray(scores, dtype=float)
    if labels.shape != scores.shape:
        raise ValueError(f"labels/scores length mismatch: {labels.shape} vs {scores.shape}")
    if labels.size == 0:
        raise ValueError("risk needs at least one observation")
    return float(np.mean(loss(kind, labels, scores)))


def pseudo_residuals(kind: LossKind, labels: np.ndarray, memory_scores: np.ndarray) -> np.ndarray:
    """Negative loss gradient w.r.t. the score, elementwise.

    For the ramp loss the gradient vanishes wherever |F| >= 1 (the indicator is
    strict: the boundary itself contributes nothing).
    """
    y = np.asarray(labels, dtype=float)
    f = np.asarray(memory_scores, dtype=float)
    if y.shape != f.shape:
        raise ValueError(f"labels/scores length mismatch: {y.shape} vs {f.shape}")
    if kind is LossKind.SQUARED_RAMP:
        return 2.0 * (y - f) * (np.abs(f) < 1.0)
    return 2.0 * (y - f)
