"""Local polynomial regression of order p at a single point.

The fit solves the kernel-weighted normal equations in the scaled basis
``((X_t - x0) / h)**j``::

    S_n(x0; h) c = G_n(x0; h),   S_n[i, j] = s_{n, i+j},   G_n[i] = g_{n, i}

and returns ``b_j = c_j / h**j`` so that ``sum_j b_j (x - x0)**j`` is the
fitted polynomial and ``j! * b_j`` estimates the j-th derivative at ``x0``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import SingularDesign
from ._window import window_sums
from .kernels import EPANECHNIKOV, Kernel

__all__ = [
    "Dataset",
    "LocalFit",
    "MAX_CONDITION",
    "moment_sums",
    "response_sums",
    "fit_local",
    "fit_local_loo",
    "loo_predictions",
]

MAX_CONDITION = 1e12


@dataclass(frozen=True, eq=False)
class Dataset:
    """Paired sample ``(x_t, y_t)``, t = 1..n, in a fixed order."""

    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        x = np.array(self.x, dtype=float).ravel()
        y = np.array(self.y, dtype=float).ravel()
        if x.shape != y.shape:
            raise ValueError(f"x and y lengths differ: {x.size} != {y.size}")
        if x.size < 1:
            raise ValueError("dataset must contain at least one observation")
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
            raise ValueError("dataset contains non-finite values")
        x.flags.writeable = False
        y.flags.writeable = False
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)

    @property
    def n(self) -> int:
        return self.x.size

    def __len__(self) -> int:
        return self.x.size

    def drop(self, t: int) -> "Dataset":
        keep = np.arange(self.n) != t
        return Dataset(self.x[keep], self.y[keep])

    def __eq__(self, other):
        if not isinstance(other, Dataset):
            return NotImplemented
        return np.array_equal(self.x, other.x) and np.array_equal(self.y, other.y)


@dataclass(frozen=True)
class LocalFit:
    """Result of a local polynomial fit at ``x0``.

    ``coeffs[j]`` estimates ``m^{(j)}(x0) / j!``; ``s_matrix`` is the scaled
    moment matrix S_n(x0; h) and ``condition`` its 2-norm condition number.
    """

    x0: float
    h: float
    p: int
    coeffs: np.ndarray
    n_effective: int
    s_matrix: np.ndarray
    condition: float

    @property
    def value(self) -> float:
        return float(self.coeffs[0])

    def derivative(self, j: int) -> float:
        """Estimate of the j-th derivative, ``j! * b_j``."""
        return math.factorial(j) * float(self.coeffs[j])


def _check_h(h):
    if not (h > 0 and math.isfinite(h)):
        raise ValueError(f"bandwidth must be positive and finite, got {h!r}")


def _weights(d: Dataset, x0: float, h: float, k: Kernel):
    u = (d.x - x0) / h
    return u, k(u)


def moment_sums(d: Dataset, x0: float, h: float, l: int, k: Kernel = EPANECHNIKOV) -> float:
    """s_{n,l}(x0; h) = (n h)^{-1} sum_t K(u_t) u_t^l with u_t = (X_t - x0) / h."""
    _check_h(h)
    u, w = _weights(d, x0, h, k)
    return float(np.sum(w * u**l) / (d.n * h))


def response_sums(d: Dataset, x0: float, h: float, l: int, k: Kernel = EPANECHNIKOV) -> float:
    """g_{n,l}(x0; h) = (n h)^{-1} sum_t K(u_t) u_t^l Y_t."""
    _check_h(h)
    u, w = _weights(d, x0, h, k)
    return float(np.sum(w * u**l * d.y) / (d.n * h))


def _solve_spd(s: np.ndarray, g: np.ndarray) -> np.ndarray:
    try:
        return scipy.linalg.cho_solve(scipy.linalg.cho_factor(s), g)
    except np.linalg.LinAlgError:
        return scipy.linalg.solve(s, g, assume_a="sym")


def fit_local(
    d: Dataset, x0: float, h: float, p: int = 1, k: Kernel = EPANECHNIKOV
) -> LocalFit:
    """Local polynomial fit of order ``p`` at ``x0`` with bandwidth ``h``.

    Raises
    ------
    SingularDesign
        Fewer than ``p + 1`` observations carry positive kernel weight, or the
        condition number of S_n exceeds ``MAX_CONDITION``.
    """
    _check_h(h)
    if p < 0:
        raise ValueError("order p must be non-negative")
    x0 = float(x0)
    u, w = _weights(d, x0, h, k)
    n_eff = int(np.count_nonzero(np.abs(d.x - x0) <= h))
    n_pos = int(np.count_nonzero(w > 0))
    if n_pos < p + 1:
        raise SingularDesign(
            f"only {n_pos} points with positive weight within h={h:g} of x0={x0:g}; "
            f"order {p} needs {p + 1}"
        )
    powers = u[None, :] ** np.arange(2 * p + 1)[:, None]
    s_l = powers @ w / (d.n * h)
    g = powers[: p + 1] @ (w * d.y) / (d.n * h)
    idx = np.arange(p + 1)
    s = s_l[idx[:, None] + idx[None, :]]
    cond = float(np.linalg.cond(s))
    if not cond <= MAX_CONDITION:
        raise SingularDesign(f"S_n condition {cond:.3g} exceeds {MAX_CONDITION:g} at x0={x0:g}")
    c = _solve_spd(s, g)
    coeffs = c / h**idx
    return LocalFit(x0, float(h), int(p), coeffs, n_eff, s, cond)


def fit_local_loo(
    d: Dataset, t: int, h: float, p: int = 1, k: Kernel = EPANECHNIKOV
) -> LocalFit:
    """Fit at ``X_t`` on the sample with observation ``t`` removed."""
    if not 0 <= t < d.n:
        raise IndexError(f"observation index {t} out of range for n={d.n}")
    if d.n < 2:
        raise SingularDesign("no observations left after deletion")
    return fit_local(d.drop(t), d.x[t], h, p, k)


def loo_predictions(
    x: np.ndarray,
    y: np.ndarray,
    h: float,
    p: int,
    k: Kernel = EPANECHNIKOV,
) -> tuple[np.ndarray, np.ndarray]:
    """Leave-one-out fitted values ``m_{LP,t}(X_t; h)`` for all t at once.

    ``x`` must be sorted ascending. Only neighbours within ``h`` enter each
    fit, so the work is banded. Returns ``(pred, ok)``; ``pred`` is NaN where
    ``ok`` is False, i.e. where :func:`fit_local_loo` would raise
    :class:`SingularDesign`.
    """
    n = x.size
    lo = np.searchsorted(x, x - h, side="left")
    hi = np.searchsorted(x, x + h, side="right")
    pred = np.full(n, np.nan)
    coeffs = np.array([float(c) for c in k.coeffs])
    s_l, g, npos = window_sums(x, y, lo, hi, float(h), int(p), coeffs)
    m = 1.0 / ((n - 1) * h)
    s_l = s_l.T * m
    g = g.T * m
    j = np.arange(p + 1)
    s = np.moveaxis(s_l[j[:, None] + j[None, :]], -1, 0)
    ok = npos >= p + 1
    if np.any(ok):
        with np.errstate(divide="ignore", invalid="ignore"):
            cond = np.linalg.cond(s[ok])
        sub = np.flatnonzero(ok)
        good = cond <= MAX_CONDITION
        ok[sub[~good]] = False
        sub = sub[good]
        if sub.size:
            c = np.linalg.solve(s[sub], g[:, sub].T[..., None])[..., 0]
            pred[sub] = c[:, 0]
    return pred, ok
