"""Compactly supported symmetric kernels and their moments.

Every kernel here is an even polynomial in ``|u|`` on ``[-1, 1]`` and zero
elsewhere, so its moments

    mu_l = int u^l K(u) du,      nu_l = int u^l K(u)^2 du

have exact closed forms obtained by integrating the polynomial term by term.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np

__all__ = [
    "Kernel",
    "KernelMoments",
    "EPANECHNIKOV",
    "BIWEIGHT",
    "TRIANGULAR",
    "KERNELS",
    "get_kernel",
    "kernel_eval",
    "kernel_moment",
    "kernel_moments",
]


@dataclass(frozen=True)
class Kernel:
    """Symmetric density supported on [-1, 1].

    ``coeffs[k]`` is the coefficient of ``|u|**k`` inside the support.
    """

    id: str
    coeffs: tuple[Fraction, ...] = field(repr=False)

    def __call__(self, u):
        u = np.asarray(u, dtype=float)
        a = np.abs(u)
        inside = a <= 1.0
        a = np.where(inside, a, 0.0)
        val = np.zeros_like(a)
        for c in reversed(self.coeffs):
            val = val * a + float(c)
        return np.where(inside, val, 0.0)

    def evaluate(self, u):
        return self(u)

    def derivative(self, u):
        """K'(u). Zero outside the support and at u = 0."""
        u = np.asarray(u, dtype=float)
        a = np.abs(u)
        inside = a <= 1.0
        a = np.where(inside, a, 0.0)
        dval = np.zeros_like(a)
        for k in range(len(self.coeffs) - 1, 0, -1):
            dval = dval * a + k * float(self.coeffs[k])
        return np.where(inside, np.sign(u) * dval, 0.0)

    def moment(self, l: int, squared: bool = False) -> float:
        return kernel_moment(self, l, squared)


EPANECHNIKOV = Kernel("epanechnikov", (Fraction(3, 4), Fraction(0), Fraction(-3, 4)))
BIWEIGHT = Kernel(
    "biweight",
    (Fraction(15, 16), Fraction(0), Fraction(-30, 16), Fraction(0), Fraction(15, 16)),
)
TRIANGULAR = Kernel("triangular", (Fraction(1), Fraction(-1)))

KERNELS: dict[str, Kernel] = {k.id: k for k in (EPANECHNIKOV, BIWEIGHT, TRIANGULAR)}


def get_kernel(name: str | Kernel) -> Kernel:
    if isinstance(name, Kernel):
        return name
    try:
        return KERNELS[name.lower()]
    except KeyError:
        raise ValueError(
            f"unknown kernel {name!r}; choose from {sorted(KERNELS)}"
        ) from None


def kernel_eval(k: Kernel, u):
    return k(u)


def _square(coeffs: tuple[Fraction, ...]) -> tuple[Fraction, ...]:
    out = [Fraction(0)] * (2 * len(coeffs) - 1)
    for i, a in enumerate(coeffs):
        for j, b in enumerate(coeffs):
            out[i + j] += a * b
    return tuple(out)


@lru_cache(maxsize=None)
def _exact_moment(k: Kernel, l: int, squared: bool) -> Fraction:
    if l % 2:
        return Fraction(0)
    coeffs = _square(k.coeffs) if squared else k.coeffs
    # int_{-1}^{1} u^l |u|^m du = 2 / (l + m + 1) for even l
    return sum((2 * c / (l + m + 1) for m, c in enumerate(coeffs)), Fraction(0))


def kernel_moment(k: Kernel, l: int, squared: bool = False) -> float:
    """Return mu_l (``squared=False``) or nu_l (``squared=True``)."""
    if l < 0:
        raise ValueError("moment order must be non-negative")
    return float(_exact_moment(k, int(l), bool(squared)))


@dataclass(frozen=True)
class KernelMoments:
    """mu_l and nu_l for l = 0..2p+1 (the extra order feeds the bias vector)."""

    kernel: Kernel
    mu: np.ndarray
    nu: np.ndarray


@lru_cache(maxsize=None)
def kernel_moments(k: Kernel, p: int) -> KernelMoments:
    mu = np.array([kernel_moment(k, l) for l in range(2 * p + 2)])
    nu = np.array([kernel_moment(k, l, squared=True) for l in range(2 * p + 2)])
    mu.flags.writeable = False
    nu.flags.writeable = False
    return KernelMoments(k, mu, nu)
