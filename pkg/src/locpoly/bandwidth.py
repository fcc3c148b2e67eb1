"""Bandwidth selectors: oracle AMISE, leave-one-out CV and quartic plug-in.

The oracle and the plug-in share one formula::

    h = (lambda1 / (n * lambda2)) ** (1/5)
    lambda1 = Var(eps) * int K^2 * |support of f_X|
    lambda2 = mu2 * int (m'')^2 f_X           (mu2**2 when mu2_squared=True)

The plug-in replaces the three unknowns by estimates from a global quartic
least squares fit.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .errors import DegenerateSpec, NoValidBandwidth
from .estimator import Dataset, loo_predictions
from .kernels import EPANECHNIKOV, Kernel, kernel_moment

__all__ = [
    "BandwidthResult",
    "OracleSpec",
    "CVSearch",
    "h_amise",
    "h_cv",
    "h_rot",
    "cv_objective",
    "cv_min_bandwidth",
    "quartic_fit",
]

_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0
_TIE_RTOL = 1e-12


@dataclass(frozen=True)
class BandwidthResult:
    h: float
    selector: str
    objective_value: float | None = None
    diagnostics: dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        return {
            "h": self.h,
            "selector": self.selector,
            "objective_value": self.objective_value,
            "diagnostics": self.diagnostics,
        }


@dataclass(frozen=True)
class OracleSpec:
    """Population constants entering the AMISE bandwidth."""

    error_variance: float
    kernel_l2: float
    support_length: float
    kernel_mu2: float
    curvature: float
    mu2_squared: bool = False

    @classmethod
    def for_kernel(
        cls,
        k: Kernel,
        error_variance: float,
        support_length: float,
        curvature: float,
        mu2_squared: bool = False,
    ) -> "OracleSpec":
        return cls(
            error_variance=error_variance,
            kernel_l2=kernel_moment(k, 0, squared=True),
            support_length=support_length,
            kernel_mu2=kernel_moment(k, 2),
            curvature=curvature,
            mu2_squared=mu2_squared,
        )

    @property
    def lambda1(self) -> float:
        return self.error_variance * self.kernel_l2 * self.support_length

    @property
    def lambda2(self) -> float:
        mu2 = self.kernel_mu2**2 if self.mu2_squared else self.kernel_mu2
        return mu2 * self.curvature


def h_amise(spec: OracleSpec, n: int) -> BandwidthResult:
    if n < 1:
        raise ValueError("n must be at least 1")
    lam1, lam2 = spec.lambda1, spec.lambda2
    if not lam2 > 0:
        raise DegenerateSpec(f"lambda2 = {lam2!r}: curvature must be positive")
    h = (lam1 / (n * lam2)) ** 0.2
    if not (h > 0 and math.isfinite(h)):
        raise DegenerateSpec(f"AMISE formula gives h = {h!r}")
    return BandwidthResult(h, "amise", diagnostics={"lambda1": lam1, "lambda2": lam2})


# -- plug-in -----------------------------------------------------------------

def _quartic_design(x: np.ndarray) -> np.ndarray:
    return np.column_stack([x**j / math.factorial(j) for j in range(5)])


def quartic_fit(x, y) -> np.ndarray:
    """OLS coefficients of y on (1, x, x^2/2, x^3/3!, x^4/4!)."""
    r = _quartic_design(np.asarray(x, dtype=float))
    beta, _, rank, _ = np.linalg.lstsq(r, np.asarray(y, dtype=float), rcond=None)
    if rank < 5:
        raise DegenerateSpec(f"quartic design has rank {rank} < 5")
    return beta


def h_rot(
    d: Dataset, k: Kernel = EPANECHNIKOV, mu2_squared: bool = False
) -> BandwidthResult:
    if d.n < 6:
        raise ValueError("plug-in bandwidth needs n >= 6")
    beta = quartic_fit(d.x, d.y)
    resid = d.y - _quartic_design(d.x) @ beta
    variance = float(np.mean(resid**2))
    m2 = beta[2] + beta[3] * d.x + beta[4] * d.x**2 / 2.0
    curvature = float(np.mean(m2**2))
    support = float(d.x.max() - d.x.min())
    if curvature <= 1e-12:
        raise DegenerateSpec(f"plug-in curvature estimate {curvature:.3g} is zero")
    spec = OracleSpec.for_kernel(k, variance, support, curvature, mu2_squared)
    res = h_amise(spec, d.n)
    diag = {
        "variance": variance,
        "curvature": curvature,
        "support_length": support,
        "beta": beta.tolist(),
        **res.diagnostics,
    }
    return BandwidthResult(res.h, "rot", diagnostics=diag)


# -- cross-validation --------------------------------------------------------

@dataclass(frozen=True)
class CVSearch:
    """Grid and refinement settings for :func:`h_cv`."""

    n_grid: int = 40
    refine_rtol: float = 1e-3
    min_valid_fraction: float = 0.9
    h_max: float | None = None


class _SortedSample:
    def __init__(self, d: Dataset):
        order = np.argsort(d.x, kind="stable")
        self.x = d.x[order]
        self.y = d.y[order]
        self.ybar = float(np.mean(d.y))
        self.penalty = (self.ybar - self.y) ** 2

    def terms(self, h, p, k):
        pred, ok = loo_predictions(self.x, self.y, h, p, k)
        return np.where(ok, (pred - self.y) ** 2, self.penalty), ok


def cv_objective(d: Dataset, h: float, p: int = 1, k: Kernel = EPANECHNIKOV) -> float:
    """CV(h) = sum_t (m_{LP,t}(X_t; h) - Y_t)^2, singular terms penalised."""
    terms, _ = _SortedSample(d).terms(h, p, k)
    return float(np.sum(terms))


def cv_min_bandwidth(
    d: Dataset, p: int = 1, k: Kernel = EPANECHNIKOV, min_valid_fraction: float = 0.9
) -> float:
    """Smallest h at which at least ``min_valid_fraction`` of LOO fits are nonsingular."""
    s = _SortedSample(d)
    return _min_bandwidth(s, p, k, min_valid_fraction)


def _min_bandwidth(s: _SortedSample, p, k, frac) -> float:
    x = s.x
    n = x.size
    span = float(x[-1] - x[0])
    if span <= 0:
        raise NoValidBandwidth("all regressor values are equal")
    # distance from each point to its (p+1)-th nearest other point
    gaps = np.abs(x[None, :] - x[:, None]) if n <= 2000 else None
    if gaps is not None:
        kth = np.sort(gaps, axis=1)[:, min(p + 1, n - 1)]
    else:
        kth = np.array([np.sort(np.abs(x - xi))[min(p + 1, n - 1)] for xi in x])
    h = float(np.quantile(kth, frac, method="higher")) * (1 + 1e-9)
    h = max(h, span * 1e-9)
    for _ in range(200):
        _, ok = loo_predictions(x, s.y, h, p, k)
        if np.mean(ok) >= frac:
            return h
        h *= 1.05
    raise NoValidBandwidth("no bandwidth gives enough nonsingular leave-one-out fits")


def h_cv(
    d: Dataset,
    p: int = 1,
    k: Kernel = EPANECHNIKOV,
    grid: CVSearch = CVSearch(),
) -> BandwidthResult:
    """Leave-one-out cross-validated bandwidth.

    Log grid of ``grid.n_grid`` candidates on ``[h_min, range(X)]``, then
    golden-section refinement inside the cells adjacent to the best grid
    point. Ties (objective values within ``1e-12 * sum (Y - Ybar)^2`` of the
    minimum) go to the larger bandwidth.
    """
    if d.n < p + 2:
        raise ValueError(f"cross-validation needs n >= p + 2 = {p + 2}")
    s = _SortedSample(d)
    h_lo = _min_bandwidth(s, p, k, grid.min_valid_fraction)
    h_hi = grid.h_max if grid.h_max is not None else float(s.x[-1] - s.x[0])
    h_hi = max(h_hi, h_lo)
    cands = np.geomspace(h_lo, h_hi, grid.n_grid)

    values = np.empty(cands.size)
    any_valid = False
    for i, h in enumerate(cands):
        terms, ok = s.terms(h, p, k)
        any_valid |= bool(ok.any())
        values[i] = np.sum(terms)
    if not any_valid:
        raise NoValidBandwidth("every leave-one-out fit is singular on the grid")

    # values within round-off of the minimum count as ties; keep the largest h
    tol = _TIE_RTOL * float(np.sum(s.penalty))
    best = int(np.flatnonzero(values <= values.min() + tol)[-1])
    h_best, f_best = float(cands[best]), float(values[best])

    a = float(cands[max(best - 1, 0)])
    b = float(cands[min(best + 1, cands.size - 1)])
    n_evals = 0
    if b > a:
        def f(h):
            return float(np.sum(s.terms(h, p, k)[0]))

        h_ref, f_ref, n_evals = _golden_section(f, math.log(a), math.log(b), grid.refine_rtol)
        if f_ref < f_best - tol:
            h_best, f_best = h_ref, f_ref

    return BandwidthResult(
        h_best,
        "cv",
        objective_value=f_best,
        diagnostics={
            "h_min": h_lo,
            "h_max": h_hi,
            "grid": cands.tolist(),
            "grid_objective": values.tolist(),
            "refine_evaluations": n_evals,
        },
    )


def _golden_section(f, lo, hi, rtol):
    """Minimise f(exp(t)) over t in [lo, hi]; stop when the h-bracket is < rtol."""
    c = hi - _INV_PHI * (hi - lo)
    e = lo + _INV_PHI * (hi - lo)
    fc, fe = f(math.exp(c)), f(math.exp(e))
    evals = 2
    while math.expm1(hi - lo) > rtol:
        if fc < fe:
            hi, e, fe = e, c, fc
            c = hi - _INV_PHI * (hi - lo)
            fc = f(math.exp(c))
        else:
            lo, c, fc = c, e, fe
            e = lo + _INV_PHI * (hi - lo)
            fe = f(math.exp(e))
        evals += 1
    if fc < fe:
        return math.exp(c), fc, evals
    return math.exp(e), fe, evals
