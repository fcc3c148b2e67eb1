"""Independent reference implementations used only by the tests."""
import math

import numpy as np
from scipy import integrate


def epan(u):
    return 0.75 * (1 - u * u) if abs(u) <= 1 else 0.0


def biweight(u):
    return 15 / 16 * (1 - u * u) ** 2 if abs(u) <= 1 else 0.0


def triangular(u):
    return 1 - abs(u) if abs(u) <= 1 else 0.0


SCALAR_KERNELS = {"epanechnikov": epan, "biweight": biweight, "triangular": triangular}


def quad_moment(name, l, squared=False):
    f = SCALAR_KERNELS[name]
    g = (lambda u: u**l * f(u) ** 2) if squared else (lambda u: u**l * f(u))
    # split at 0 so the triangular kink is a breakpoint
    a, _ = integrate.quad(g, -1, 0, epsabs=1e-14, epsrel=1e-14)
    b, _ = integrate.quad(g, 0, 1, epsabs=1e-14, epsrel=1e-14)
    return a + b


def wls_loop(x, y, x0, h, p, kern=epan):
    """Weighted normal equations in the raw basis (X - x0)^j, built term by term."""
    a = [[0.0] * (p + 1) for _ in range(p + 1)]
    r = [0.0] * (p + 1)
    for xi, yi in zip(x, y):
        w = kern((xi - x0) / h)
        if w == 0:
            continue
        d = xi - x0
        for i in range(p + 1):
            r[i] += w * d**i * yi
            for j in range(p + 1):
                a[i][j] += w * d ** (i + j)
    return np.linalg.solve(np.array(a), np.array(r))


def wls_lstsq(x, y, x0, h, p, kern=epan):
    """Same estimator via sqrt-weighted least squares on the design matrix."""
    w = np.array([kern((xi - x0) / h) for xi in x])
    keep = w > 0
    d = np.asarray(x)[keep] - x0
    sw = np.sqrt(w[keep])
    design = np.vander(d, p + 1, increasing=True) * sw[:, None]
    coef, *_ = np.linalg.lstsq(design, np.asarray(y)[keep] * sw, rcond=None)
    return coef


def direct_sum(x, y, x0, h, l, kern=epan):
    n = len(x)
    total = 0.0
    for xi, yi in zip(x, y):
        u = (xi - x0) / h
        total += kern(u) * u**l * yi
    return total / (n * h)


def phi(z):
    return math.exp(-0.5 * z * z) / math.sqrt(2 * math.pi)
