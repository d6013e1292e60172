"""Numeric kernels with a numba path and a pure-numpy fallback.

Set ``TEXTNORM_NUMBA=0`` in the environment (before import) to force the
numpy path.  Both paths compute the same quantities; results agree to
floating-point reduction order.
"""

from __future__ import annotations

import os

import numpy as np

try:
    import numba
except ImportError:  # pragma: no cover - numba is optional
    numba = None

USE_NUMBA = numba is not None and os.environ.get("TEXTNORM_NUMBA", "1").lower() not in ("0", "false", "no", "off")


# --- token edit distance ---------------------------------------------------


def _edit_distance_py(a: np.ndarray, b: np.ndarray) -> int:
    n, m = len(a), len(b)
    if n == 0:
        return m
    if m == 0:
        return n
    prev = np.arange(m + 1)
    for i in range(1, n + 1):
        # substitution / deletion are vectorizable, insertion is a running min
        cur = np.empty(m + 1, dtype=prev.dtype)
        cur[0] = i
        sub = prev[:-1] + (a[i - 1] != b)
        dele = prev[1:] + 1
        best = np.minimum(sub, dele)
        run = cur[0]
        for j in range(1, m + 1):
            run = min(best[j - 1], run + 1)
            cur[j] = run
        prev = cur
    return int(prev[m])


def _edit_distance_nb(a, b):
    n, m = a.shape[0], b.shape[0]
    if n == 0:
        return m
    if m == 0:
        return n
    prev = np.empty(m + 1, dtype=np.int64)
    cur = np.empty(m + 1, dtype=np.int64)
    for j in range(m + 1):
        prev[j] = j
    for i in range(1, n + 1):
        cur[0] = i
        for j in range(1, m + 1):
            c = prev[j - 1] + (0 if a[i - 1] == b[j - 1] else 1)
            if prev[j] + 1 < c:
                c = prev[j] + 1
            if cur[j - 1] + 1 < c:
                c = cur[j - 1] + 1
            cur[j] = c
        for j in range(m + 1):
            prev[j] = cur[j]
    return prev[m]


# --- maxent ranking objective ------------------------------------------------
#
# Candidates are CSR rows (indptr, indices, data); examples are contiguous
# candidate ranges given by group_ptr.  For each example the contribution is
# log sum_{good} exp(s) - log sum_{all} exp(s) with s = X w + offsets.


def _maxent_np(w, offsets, indptr, indices, data, row_ids, group_ptr, group_ids, good):
    contrib = data * w[indices]
    s = offsets + np.bincount(row_ids, weights=contrib, minlength=len(offsets))
    m = np.maximum.reduceat(s, group_ptr[:-1])
    ex = np.exp(s - m[group_ids])
    n_groups = len(group_ptr) - 1
    z = np.bincount(group_ids, weights=ex, minlength=n_groups)
    zg = np.bincount(group_ids, weights=ex * good, minlength=n_groups)
    obj = float(np.sum(np.log(zg) - np.log(z)))
    coef = ex * good / zg[group_ids] - ex / z[group_ids]
    grad = np.bincount(indices, weights=data * coef[row_ids], minlength=len(w))
    return obj, grad


def _maxent_nb(w, offsets, indptr, indices, data, row_ids, group_ptr, group_ids, good):
    n_rows = offsets.shape[0]
    s = np.empty(n_rows)
    for r in range(n_rows):
        acc = offsets[r]
        for k in range(indptr[r], indptr[r + 1]):
            acc += data[k] * w[indices[k]]
        s[r] = acc
    grad = np.zeros(w.shape[0])
    obj = 0.0
    coef = np.empty(n_rows)
    for g in range(group_ptr.shape[0] - 1):
        lo, hi = group_ptr[g], group_ptr[g + 1]
        m = s[lo]
        for r in range(lo + 1, hi):
            if s[r] > m:
                m = s[r]
        z = 0.0
        zg = 0.0
        for r in range(lo, hi):
            e = np.exp(s[r] - m)
            coef[r] = e
            z += e
            if good[r]:
                zg += e
        obj += np.log(zg) - np.log(z)
        for r in range(lo, hi):
            e = coef[r]
            coef[r] = (e / zg if good[r] else 0.0) - e / z
    for r in range(n_rows):
        c = coef[r]
        if c != 0.0:
            for k in range(indptr[r], indptr[r + 1]):
                grad[indices[k]] += data[k] * c
    return obj, grad


_JIT_CACHE: dict[str, object] = {}


def numba_kernels() -> dict[str, object] | None:
    """The jitted kernels, compiled on first use; None without numba."""
    if numba is None:
        return None
    if not _JIT_CACHE:
        _JIT_CACHE["edit_distance"] = numba.njit(cache=True)(_edit_distance_nb)
        _JIT_CACHE["maxent"] = numba.njit(cache=True)(_maxent_nb)
    return _JIT_CACHE


numpy_kernels = {"edit_distance": _edit_distance_py, "maxent": _maxent_np}

if USE_NUMBA:
    _impl = numba_kernels()
else:
    _impl = numpy_kernels

BACKEND = "numba" if USE_NUMBA else "numpy"


def edit_distance_ids(a: np.ndarray, b: np.ndarray) -> int:
    return int(_impl["edit_distance"](np.asarray(a, dtype=np.int64), np.asarray(b, dtype=np.int64)))


def maxent_objective(w, offsets, indptr, indices, data, row_ids, group_ptr, group_ids, good):
    """Unregularized ranking log-likelihood and its gradient."""
    obj, grad = _impl["maxent"](w, offsets, indptr, indices, data, row_ids, group_ptr, group_ids, good)
    return float(obj), grad
