# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled twins of the numpy kernels in ``_py.py``.

Candidate enumeration and arithmetic mirror the numpy backend exactly (same
prefix-sum accumulation order, same clamping, same tie rule) so the split scan
and rule evaluation agree bit-for-bit across backends.
"""

import numpy as np

cimport numpy as cnp

BACKEND_NAME = "cython"


def scan_best_split(double[::1] values, double[::1] targets, Py_ssize_t min_count):
    cdef Py_ssize_t n = values.shape[0]
    if n < 2 * min_count:
        return None
    cdef double total1 = 0.0, total2 = 0.0
    cdef Py_ssize_t i
    cdef double t
    for i in range(n):
        t = targets[i]
        total1 += t
        total2 += t * t

    cdef double r1 = 0.0, r2 = 0.0
    cdef double nl, nr, sse_l, sse_r, sse
    cdef double best_sse = np.inf
    cdef double best_thr = 0.0
    cdef bint found = False
    for i in range(n - 1):
        t = targets[i]
        r1 += t
        r2 += t * t
        if values[i + 1] <= values[i]:
            continue
        nl = <double> (i + 1)
        nr = <double> (n - i - 1)
        if nl < min_count or nr < min_count:
            continue
        sse_l = r2 - r1 * r1 / nl
        if sse_l < 0.0:
            sse_l = 0.0
        sse_r = (total2 - r2) - (total1 - r1) * (total1 - r1) / nr
        if sse_r < 0.0:
            sse_r = 0.0
        sse = sse_l + sse_r
        if sse < best_sse:
            best_sse = sse
            best_thr = 0.5 * (values[i] + values[i + 1])
            found = True
    if not found:
        return None
    return best_sse, best_thr


def eval_rules(
    double[:, ::1] x,
    long long[::1] offsets,
    long long[::1] attrs,
    double[::1] los,
    double[::1] his,
):
    cdef Py_ssize_t n = x.shape[0]
    cdef Py_ssize_t n_rules = offsets.shape[0] - 1
    out_arr = np.empty((n, n_rules), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef Py_ssize_t r, i
    cdef long long c, lo_c, hi_c
    cdef double v
    cdef bint ok
    for i in range(n):
        for r in range(n_rules):
            ok = True
            lo_c = offsets[r]
            hi_c = offsets[r + 1]
            for c in range(lo_c, hi_c):
                v = x[i, attrs[c]]
                if v < los[c] or v >= his[c]:
                    ok = False
                    break
            out[i, r] = 1.0 if ok else 0.0
    return out_arr


def cd_sweep(
    double[::1, :] x,
    double[::1] resid,
    double[::1] coef,
    double threshold,
    double denom,
):
    cdef Py_ssize_t n = x.shape[0]
    cdef Py_ssize_t n_cols = x.shape[1]
    cdef double nf = <double> n
    cdef double delta_max = 0.0
    cdef Py_ssize_t i, k
    cdef double old, rho, mag, new, d, ad, dot
    for k in range(n_cols):
        old = coef[k]
        dot = 0.0
        for i in range(n):
            dot += x[i, k] * resid[i]
        rho = dot / nf + old
        mag = (rho if rho >= 0.0 else -rho) - threshold
        if mag > 0.0:
            new = mag / denom if rho >= 0.0 else -mag / denom
        else:
            new = 0.0
        d = new - old
        if d != 0.0:
            for i in range(n):
                resid[i] -= d * x[i, k]
            coef[k] = new
            ad = d if d >= 0.0 else -d
            if ad > delta_max:
                delta_max = ad
    return delta_max
