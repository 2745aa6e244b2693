"""Numpy implementations of the hot kernels.

These are the fallback used when the compiled extension is unavailable. The
formulas and candidate enumeration mirror ``_core.pyx`` operation for
operation, so the two backends agree bit-for-bit on the split scan and rule
evaluation (the CD sweep differs only by BLAS summation order).
"""

from __future__ import annotations

import numpy as np

BACKEND_NAME = "numpy"


def scan_best_split(values: np.ndarray, targets: np.ndarray, min_count: int):
    """Best threshold on one attribute.

    ``values`` must be sorted ascending with ``targets`` aligned. Candidate
    thresholds are midpoints between consecutive distinct values; a candidate
    is valid when both children hold at least ``min_count`` rows. Returns
    ``(sse_sum, threshold)`` minimizing the summed child SSE, or ``None``.
    Ties resolve to the lowest threshold.
    """
    n = values.shape[0]
    if n < 2 * min_count:
        return None
    s1 = np.cumsum(targets)
    s2 = np.cumsum(targets * targets)
    total1 = s1[-1]
    total2 = s2[-1]

    i = np.arange(n - 1)
    nl = (i + 1).astype(np.float64)
    nr = (n - i - 1).astype(np.float64)
    sse_l = np.maximum(s2[:-1] - s1[:-1] * s1[:-1] / nl, 0.0)
    sse_r = np.maximum((total2 - s2[:-1]) - (total1 - s1[:-1]) * (total1 - s1[:-1]) / nr, 0.0)
    sse = sse_l + sse_r

    valid = (values[1:] > values[:-1]) & (nl >= min_count) & (nr >= min_count)
    if not valid.any():
        return None
    sse = np.where(valid, sse, np.inf)
    best = int(np.argmin(sse))
    return float(sse[best]), float(0.5 * (values[best] + values[best + 1]))


def eval_rules(
    x: np.ndarray,
    offsets: np.ndarray,
    attrs: np.ndarray,
    los: np.ndarray,
    his: np.ndarray,
) -> np.ndarray:
    """Evaluate flattened rules over an observation matrix.

    Rule r's constraints occupy ``attrs/los/his[offsets[r]:offsets[r+1]]``; a
    constraint holds when ``lo <= x[:, attr] < hi``. Returns an N x R matrix
    of 0.0/1.0 indicator values.
    """
    n = x.shape[0]
    n_rules = offsets.shape[0] - 1
    out = np.empty((n, n_rules), dtype=np.float64)
    for r in range(n_rules):
        mask = np.ones(n, dtype=bool)
        for c in range(offsets[r], offsets[r + 1]):
            col = x[:, attrs[c]]
            mask &= (col >= los[c]) & (col < his[c])
        out[:, r] = mask
    return out


def cd_sweep(
    x: np.ndarray,
    resid: np.ndarray,
    coef: np.ndarray,
    threshold: float,
    denom: float,
) -> float:
    """One coordinate-descent pass over all columns, in place.

    ``resid`` holds y - X @ coef and is kept consistent. Column k's update is
    soft-threshold((<x_k, resid>/N + coef_k), threshold) / denom, assuming
    unit column second moments. Returns the largest absolute coefficient
    change of the sweep.
    """
    n = float(x.shape[0])
    delta_max = 0.0
    for k in range(coef.shape[0]):
        col = x[:, k]
        old = coef[k]
        rho = float(col @ resid) / n + old
        mag = abs(rho) - threshold
        new = (np.sign(rho) * mag / denom) if mag > 0.0 else 0.0
        d = new - old
        if d != 0.0:
            resid -= d * col
            coef[k] = new
            ad = abs(d)
            if ad > delta_max:
                delta_max = ad
    return delta_max
