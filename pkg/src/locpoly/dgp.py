"""Simulation designs: regression functions, AR(1) errors, regressor draws.

Random numbers come from numpy's Philox4x64 counter-based generator. Each
replication owns two streams keyed by ``(seed, replication, stream_id)``
through ``SeedSequence`` spawn keys, so draws for replication r never depend
on how many other replications ran or in which order.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .estimator import Dataset

__all__ = [
    "MODELS",
    "PRESETS",
    "GENERATOR_ID",
    "DgpSpec",
    "regression",
    "derivative",
    "second_derivative",
    "nth_derivative",
    "model_support",
    "model_curvature",
    "default_sigma2",
    "make_stream",
    "simulate_errors",
    "simulate_regressors",
    "simulate_dataset",
]

MODELS = ("m1", "m2")

# (rho, innovation variance); all give stationary error variance 0.01
PRESETS = ((0.0, 0.01), (0.5, 0.0075), (0.9, 0.0019))

GENERATOR_ID = f"numpy-{np.__version__}/Philox4x64-10/SeedSequence(seed, spawn_key=(rep, stream))"

_STREAM_X = 0
_STREAM_EPS = 1


def _check_model(model):
    if model not in MODELS:
        raise ValueError(f"unknown model {model!r}; choose from {MODELS}")


def regression(model: str, x):
    """m1(x) = sin x;  m2(x) = 3 (x - 0.5)^3 + 0.25 x + 1.125."""
    _check_model(model)
    x = np.asarray(x, dtype=float)
    if model == "m1":
        return np.sin(x)
    return 3.0 * (x - 0.5) ** 3 + 0.25 * x + 1.125


def derivative(model: str, x, negate_m1: bool = False):
    """First derivative of the regression function.

    m1 returns the true derivative ``cos x``; ``negate_m1=True`` gives
    ``-cos x`` instead, for comparing against sign-flipped reference values.
    """
    _check_model(model)
    x = np.asarray(x, dtype=float)
    if model == "m1":
        return -np.cos(x) if negate_m1 else np.cos(x)
    return 9.0 * (x - 0.5) ** 2 + 0.25


def second_derivative(model: str, x):
    return nth_derivative(model, x, 2)


def nth_derivative(model: str, x, k: int):
    """k-th derivative of the regression function (true signs for m1)."""
    _check_model(model)
    if k < 0:
        raise ValueError("derivative order must be non-negative")
    x = np.asarray(x, dtype=float)
    if model == "m1":
        return (np.sin, np.cos, lambda t: -np.sin(t), lambda t: -np.cos(t))[k % 4](x)
    # m2 expanded: 3x^3 - 4.5x^2 + 2.5x + 0.75
    poly = np.polynomial.Polynomial([0.75, 2.5, -4.5, 3.0])
    return poly.deriv(k)(x) if k else poly(x)


def model_support(model: str) -> tuple[float, float]:
    _check_model(model)
    return (0.0, 2.0 * math.pi) if model == "m1" else (0.0, 1.0)


def model_curvature(model: str) -> float:
    """int (m'')^2 f_X dx in closed form.

    m1: sin^2 averaged over a full period of the uniform design = 1/2.
    m2: 324 E(X - 1/2)^2 with X ~ Beta(2, 2), whose variance is 1/20 -> 16.2.
    """
    _check_model(model)
    return 0.5 if model == "m1" else 324.0 / 20.0


def default_sigma2(rho: float) -> float:
    """Innovation variance giving stationary error variance 0.01."""
    for r, s2 in PRESETS:
        if rho == r:
            return s2
    return 0.01 * (1.0 - rho * rho)


@dataclass(frozen=True)
class DgpSpec:
    model: str = "m1"
    rho: float = 0.0
    sigma2: float = 0.01
    n: int = 200
    seed: int = 0

    def __post_init__(self):
        _check_model(self.model)
        if not 0.0 <= self.rho < 1.0:
            raise ValueError("rho must lie in [0, 1)")
        if not self.sigma2 > 0:
            raise ValueError("sigma2 must be positive")
        if self.n < 1:
            raise ValueError("n must be at least 1")

    @property
    def error_variance(self) -> float:
        return self.sigma2 / (1.0 - self.rho**2)


def make_stream(seed: int, replication: int = 0, stream: int = 0) -> np.random.Generator:
    ss = np.random.SeedSequence(int(seed), spawn_key=(int(replication), int(stream)))
    return np.random.Generator(np.random.Philox(ss))


def simulate_errors(rho: float, sigma2: float, n: int, stream: np.random.Generator) -> np.ndarray:
    """AR(1) errors eps_t = rho eps_{t-1} + sigma U_t started from the stationary law."""
    if not abs(rho) < 1:
        raise ValueError("|rho| must be < 1")
    if not sigma2 > 0:
        raise ValueError("sigma2 must be positive")
    sigma = math.sqrt(sigma2)
    u = stream.standard_normal(n)
    eps = np.empty(n)
    if n == 0:
        return eps
    eps[0] = sigma / math.sqrt(1.0 - rho * rho) * u[0]
    if rho == 0.0:
        eps[1:] = sigma * u[1:]
        return eps
    for t in range(1, n):
        eps[t] = rho * eps[t - 1] + sigma * u[t]
    return eps


def simulate_regressors(model: str, n: int, stream: np.random.Generator) -> np.ndarray:
    """m1: Uniform[0, 2 pi]; m2: Beta(2, 2) as the median of three uniforms."""
    _check_model(model)
    if n < 1:
        raise ValueError("n must be at least 1")
    if model == "m1":
        return 2.0 * math.pi * stream.random(n)
    return np.median(stream.random((n, 3)), axis=1)


def simulate_dataset(spec: DgpSpec, replication: int = 0) -> Dataset:
    x = simulate_regressors(spec.model, spec.n, make_stream(spec.seed, replication, _STREAM_X))
    eps = simulate_errors(spec.rho, spec.sigma2, spec.n, make_stream(spec.seed, replication, _STREAM_EPS))
    return Dataset(x, regression(spec.model, x) + eps)
