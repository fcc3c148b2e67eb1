"""Large-sample variance, bias and confidence intervals for local fits.

For bandwidth h the scaled estimator H (b_hat - b) is approximately normal
with covariance ``sigma^2(x) / f_X(x) * S^-1 S~ S^-1 / (n h)`` where
``S = {mu_{i+j}}`` and ``S~ = {nu_{i+j}}``. The same limit holds when h is
data-driven, provided h_hat / h -> 1.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from statistics import NormalDist

import numpy as np

from .errors import DegenerateDensity
from .estimator import Dataset, LocalFit, fit_local
from .kernels import EPANECHNIKOV, Kernel, kernel_moments
from .density import kde_at, silverman_bandwidth

__all__ = [
    "AsymptoticSummary",
    "moment_matrices",
    "bias_weights",
    "sandwich",
    "normal_quantile",
    "summarize",
    "AUX_BANDWIDTH_FACTOR",
]

AUX_BANDWIDTH_FACTOR = 1.5


def bias_weights(k: Kernel, p: int) -> np.ndarray:
    """(S^-1 c)_j with c = (mu_{p+1}, ..., mu_{2p+1})."""
    s, _ = moment_matrices(k, p)
    return np.linalg.solve(s, kernel_moments(k, p).mu[p + 1 : 2 * p + 2])


def moment_matrices(k: Kernel, p: int) -> tuple[np.ndarray, np.ndarray]:
    """(S, S~) with entries mu_{i+j} and nu_{i+j}, 0-based i, j <= p."""
    if p < 0:
        raise ValueError("order p must be non-negative")
    m = kernel_moments(k, p)
    ij = np.add.outer(np.arange(p + 1), np.arange(p + 1))
    return m.mu[ij], m.nu[ij]


def sandwich(k: Kernel, p: int) -> np.ndarray:
    s, s_tilde = moment_matrices(k, p)
    s_inv = np.linalg.inv(s)
    out = s_inv @ s_tilde @ s_inv
    return 0.5 * (out + out.T)


def normal_quantile(q: float) -> float:
    """Standard normal quantile (Wichura's AS241 rational approximation)."""
    return NormalDist().inv_cdf(q)


@dataclass(frozen=True)
class AsymptoticSummary:
    x0: float
    h: float
    n: int
    p: int
    coeffs: np.ndarray
    variance_matrix: np.ndarray
    scale_factors: np.ndarray
    se: np.ndarray
    bias: np.ndarray
    ci_level: float
    ci_lower: np.ndarray
    ci_upper: np.ndarray
    sigma2_hat: float
    density_hat: float
    derivative_hat: float

    @property
    def z(self) -> float:
        return normal_quantile(0.5 * (1.0 + self.ci_level))

    def corrected_interval(self, j: int = 0) -> tuple[float, float]:
        """CI for b_j centred at the bias-corrected estimate b_hat_j - bias_j."""
        centre = self.coeffs[j] - self.bias[j]
        half = self.z * self.se[j]
        return centre - half, centre + half

    def to_dict(self) -> dict:
        return {
            "se": self.se.tolist(),
            "ci_lower": self.ci_lower.tolist(),
            "ci_upper": self.ci_upper.tolist(),
            "bias": self.bias.tolist(),
            "ci_level": self.ci_level,
            "sigma2_hat": self.sigma2_hat,
            "density_hat": self.density_hat,
        }


def local_residual_variance(fit: LocalFit, d: Dataset, k: Kernel) -> float:
    """Kernel-weighted mean of squared residuals of the local polynomial."""
    dx = d.x - fit.x0
    w = k(dx / fit.h)
    fitted = np.polyval(fit.coeffs[::-1], dx)
    return float(np.sum(w * (d.y - fitted) ** 2) / np.sum(w))


def summarize(
    fit: LocalFit,
    d: Dataset,
    k: Kernel = EPANECHNIKOV,
    ci_level: float = 0.95,
    moment_weighted_bias: bool = True,
    aux_factor: float = AUX_BANDWIDTH_FACTOR,
) -> AsymptoticSummary:
    """Standard errors, bias and normal confidence intervals for ``fit``.

    The bias of b_j is ``h^(p+1-j) m^(p+1)(x0) / (p+1)! * (S^-1 c)_j`` with
    ``c = (mu_{p+1}, ..., mu_{2p+1})`` and the derivative taken from an
    auxiliary order-(p+1) fit at ``aux_factor * h``. ``moment_weighted_bias=False``
    drops the kernel factor ``(S^-1 c)_j``.
    """
    if not 0.0 < ci_level < 1.0:
        raise ValueError("ci_level must lie in (0, 1)")
    p, h, n = fit.p, fit.h, d.n
    sigma2 = local_residual_variance(fit, d, k)
    f_hat = float(kde_at(d.x, [fit.x0], silverman_bandwidth(d.x))[0])
    if f_hat <= 1e-12:
        raise DegenerateDensity(f"density estimate {f_hat:.3g} at x0={fit.x0:g}")

    shape = sandwich(k, p)
    vmat = sigma2 / f_hat * shape
    j = np.arange(p + 1)
    scale = (n * h ** (2 * j + 1)) ** -0.5
    se = np.sqrt(np.diag(vmat)) * scale

    aux = fit_local(d, fit.x0, aux_factor * h, p + 1, k)
    deriv = aux.derivative(p + 1)
    bias = h ** (p + 1 - j) * deriv / math.factorial(p + 1)
    if moment_weighted_bias:
        bias = bias * bias_weights(k, p)

    z = normal_quantile(0.5 * (1.0 + ci_level))
    return AsymptoticSummary(
        x0=fit.x0,
        h=h,
        n=n,
        p=p,
        coeffs=np.asarray(fit.coeffs),
        variance_matrix=vmat,
        scale_factors=scale,
        se=se,
        bias=bias,
        ci_level=ci_level,
        ci_lower=fit.coeffs - z * se,
        ci_upper=fit.coeffs + z * se,
        sigma2_hat=sigma2,
        density_hat=f_hat,
        derivative_hat=deriv,
    )
