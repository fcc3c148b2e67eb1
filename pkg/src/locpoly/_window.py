"""Banded leave-one-out kernel sums.

For sorted ``x`` and each i, accumulate over neighbours j != i with
``|x_j - x_i| <= h``::

    s[i, l] = sum_j K(u_ij) u_ij^l   (l = 0..2p)
    g[i, l] = sum_j K(u_ij) u_ij^l y_j   (l = 0..p)

The jitted loop is used when numba imports; the numpy version is the
fallback and the cross-check in the tests.
"""
import numpy as np

try:
    import numba
except ImportError:  # pragma: no cover
    numba = None


def _sums_numpy(x, y, lo, hi, h, p, coeffs):
    n = x.size
    width = int(np.max(hi - lo))
    s = np.zeros((n, 2 * p + 1))
    g = np.zeros((n, p + 1))
    npos = np.zeros(n, dtype=np.int64)
    if width == 0:
        return s, g, npos
    rows = np.arange(n)[:, None]
    idx = lo[:, None] + np.arange(width)[None, :]
    inside = (idx < hi[:, None]) & (idx != rows)
    idx = np.minimum(idx, n - 1)
    u = (x[idx] - x[:, None]) / h
    a = np.abs(u)
    w = np.zeros_like(a)
    for c in coeffs[::-1]:
        w = w * a + c
    w = np.where(inside & (a <= 1.0), w, 0.0)
    npos[:] = np.count_nonzero(w > 0, axis=1)
    yw = y[idx]
    wu = w
    for l in range(2 * p + 1):
        s[:, l] = wu.sum(axis=1)
        if l <= p:
            g[:, l] = (wu * yw).sum(axis=1)
        wu = wu * u
    return s, g, npos


if numba is not None:

    @numba.njit(cache=True)
    def _sums_numba(x, y, lo, hi, h, p, coeffs):  # pragma: no cover - compiled
        n = x.size
        s = np.zeros((n, 2 * p + 1))
        g = np.zeros((n, p + 1))
        npos = np.zeros(n, dtype=np.int64)
        nc = coeffs.size
        for i in range(n):
            xi = x[i]
            for j in range(lo[i], hi[i]):
                if j == i:
                    continue
                u = (x[j] - xi) / h
                a = abs(u)
                if a > 1.0:
                    continue
                w = 0.0
                for c in range(nc - 1, -1, -1):
                    w = w * a + coeffs[c]
                if w > 0.0:
                    npos[i] += 1
                yj = y[j]
                wu = w
                for l in range(2 * p + 1):
                    s[i, l] += wu
                    if l <= p:
                        g[i, l] += wu * yj
                    wu *= u
        return s, g, npos

    window_sums = _sums_numba
else:  # pragma: no cover
    window_sums = _sums_numpy
