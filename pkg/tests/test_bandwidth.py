import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import integrate

from locpoly.bandwidth import (
    CVSearch,
    OracleSpec,
    cv_min_bandwidth,
    cv_objective,
    h_amise,
    h_cv,
    h_rot,
    quartic_fit,
)
from locpoly.dgp import DgpSpec, model_curvature, simulate_dataset
from locpoly.errors import DegenerateSpec, NoValidBandwidth
from locpoly.estimator import Dataset, fit_local_loo
from locpoly.errors import SingularDesign
from locpoly.kernels import EPANECHNIKOV


def _quad_curvature_m1():
    val, _ = integrate.quad(lambda x: math.sin(x) ** 2 / (2 * math.pi), 0, 2 * math.pi, epsabs=1e-14)
    return val


def _quad_curvature_m2():
    val, _ = integrate.quad(lambda x: (18 * (x - 0.5)) ** 2 * 6 * x * (1 - x), 0, 1, epsabs=1e-14)
    return val


# -- oracle ------------------------------------------------------------------

def test_curvature_constants_match_quadrature():
    assert model_curvature("m1") == pytest.approx(_quad_curvature_m1(), abs=1e-12)
    assert model_curvature("m2") == pytest.approx(_quad_curvature_m2(), abs=1e-10)


def test_h_amise_m1():
    spec = OracleSpec(0.01, 0.6, 2 * math.pi, 0.2, _quad_curvature_m1())
    res = h_amise(spec, 200)
    assert abs(res.h - 0.2852) <= 5e-4
    assert res.selector == "amise"
    assert res.diagnostics["lambda1"] == pytest.approx(0.01 * 0.6 * 2 * math.pi)


def test_h_amise_m2():
    # (0.01 * 0.6 / (200 * 0.2 * 16.2)) ** 0.2
    spec = OracleSpec(0.01, 0.6, 1.0, 0.2, _quad_curvature_m2())
    assert h_amise(spec, 200).h == pytest.approx(0.098470, abs=1e-5)


def test_for_kernel_and_mu2_squared():
    a = OracleSpec.for_kernel(EPANECHNIKOV, 0.01, 1.0, 16.2)
    assert a.kernel_l2 == pytest.approx(0.6) and a.kernel_mu2 == pytest.approx(0.2)
    b = OracleSpec.for_kernel(EPANECHNIKOV, 0.01, 1.0, 16.2, mu2_squared=True)
    assert h_amise(b, 200).h / h_amise(a, 200).h == pytest.approx(5 ** 0.2, rel=1e-14)


def test_h_amise_degenerate():
    with pytest.raises(DegenerateSpec):
        h_amise(OracleSpec(0.01, 0.6, 1.0, 0.2, 0.0), 200)


@given(st.floats(1e-3, 1e3), st.integers(1, 10**6))
def test_h_amise_homogeneous(c, n):
    base = OracleSpec(0.01, 0.6, 1.0, 0.2, 16.2)
    scaled = OracleSpec(0.01 * c, 0.6, 1.0, 0.2, 16.2)
    assert h_amise(scaled, n).h == pytest.approx(c**0.2 * h_amise(base, n).h, rel=1e-13)


# -- plug-in -----------------------------------------------------------------

def test_rot_linear_is_degenerate():
    x = np.linspace(0, 1, 50)
    with pytest.raises(DegenerateSpec):
        h_rot(Dataset(x, 1 + 2 * x))


def test_quartic_recovery():
    x = np.linspace(-1, 2, 40)
    beta = quartic_fit(x, x**4 / 24)
    np.testing.assert_allclose(beta, [0, 0, 0, 0, 1], atol=1e-8)
    with pytest.raises(DegenerateSpec):
        quartic_fit(np.array([0.0, 1.0, 2.0, 0.0, 1.0, 2.0]), np.zeros(6))


def test_rot_stepwise_recomputation():
    d = simulate_dataset(DgpSpec("m1", 0.0, 0.01, 200, seed=1))
    x, y = d.x, d.y
    r = np.column_stack([np.ones_like(x), x, x**2 / 2, x**3 / 6, x**4 / 24])
    beta = np.linalg.solve(r.T @ r, r.T @ y)
    resid = y - r @ beta
    var = sum(e * e for e in resid) / len(x)
    curv = sum((beta[2] + beta[3] * xi + beta[4] * xi**2 / 2) ** 2 for xi in x) / len(x)
    support = max(x) - min(x)
    h = (var * 0.6 * support / (200 * 0.2 * curv)) ** 0.2

    res = h_rot(d)
    np.testing.assert_allclose(res.diagnostics["beta"], beta, rtol=1e-7)
    assert res.diagnostics["variance"] == pytest.approx(var, rel=1e-9)
    assert res.diagnostics["curvature"] == pytest.approx(curv, rel=1e-8)
    assert res.diagnostics["support_length"] == support
    assert res.h == pytest.approx(h, rel=1e-9)


def test_rot_scale_invariant():
    d = simulate_dataset(DgpSpec("m2", 0.5, 0.0075, 200, seed=3))
    base = h_rot(d).h
    for c in (0.25, 4.0, 1024.0):
        assert h_rot(Dataset(d.x, c * d.y)).h == pytest.approx(base, rel=1e-12)


# -- cross-validation --------------------------------------------------------

def test_cv_objective_definition():
    d = simulate_dataset(DgpSpec("m1", 0.0, 0.01, 40, seed=9))
    h = 1.2
    ybar = d.y.mean()
    total = 0.0
    for t in range(d.n):
        try:
            total += (fit_local_loo(d, t, h, 1).value - d.y[t]) ** 2
        except SingularDesign:
            total += (ybar - d.y[t]) ** 2
    assert cv_objective(d, h, 1) == pytest.approx(total, rel=1e-10)


def test_cv_line_plateau_picks_largest():
    x = np.random.default_rng(0).uniform(0, 1, 30)
    d = Dataset(x, 2 - x)
    res = h_cv(d, 1)
    assert res.objective_value == pytest.approx(0.0, abs=1e-20)
    assert res.h == pytest.approx(res.diagnostics["h_max"], rel=1e-12)


def test_cv_argmin_contract():
    d = simulate_dataset(DgpSpec("m2", 0.0, 0.01, 120, seed=4))
    res = h_cv(d)
    grid = res.diagnostics["grid"]
    assert len(grid) == 40
    assert grid[-1] == pytest.approx(d.x.max() - d.x.min())
    for h, v in zip(grid, res.diagnostics["grid_objective"]):
        assert res.objective_value <= v
        assert v == pytest.approx(cv_objective(d, h), rel=1e-12)
    assert res.objective_value == pytest.approx(cv_objective(d, res.h), rel=1e-12)


def test_cv_matches_fine_grid():
    d = simulate_dataset(DgpSpec("m1", 0.0, 0.01, 50, seed=1))
    res = h_cv(d)
    fine = np.geomspace(res.diagnostics["h_min"], res.diagnostics["h_max"], 400)
    vals = np.array([cv_objective(d, h) for h in fine])
    i = int(np.argmin(vals))
    assert res.objective_value <= vals[i]
    local = np.geomspace(fine[max(i - 1, 0)], fine[min(i + 1, 399)], 2001)
    best = local[np.argmin([cv_objective(d, h) for h in local])]
    assert abs(res.h / best - 1) <= 1e-3


def test_cv_min_bandwidth_fraction():
    d = simulate_dataset(DgpSpec("m1", 0.0, 0.01, 100, seed=2))
    h0 = cv_min_bandwidth(d, 1)
    from locpoly.bandwidth import _SortedSample

    s = _SortedSample(d)
    _, ok = s.terms(h0, 1, EPANECHNIKOV)
    assert ok.mean() >= 0.9
    _, ok_small = s.terms(h0 / 1.06, 1, EPANECHNIKOV)
    assert ok_small.mean() < 0.9 or h0 / 1.06 < 1e-8


def test_cv_errors():
    with pytest.raises(ValueError):
        h_cv(Dataset([0.0, 1.0], [1.0, 2.0]), 1)
    with pytest.raises(NoValidBandwidth):
        h_cv(Dataset(np.ones(10), np.arange(10.0)), 1)


def test_cv_custom_grid():
    d = simulate_dataset(DgpSpec("m1", 0.0, 0.01, 80, seed=5))
    res = h_cv(d, 1, EPANECHNIKOV, CVSearch(n_grid=10, h_max=2.0))
    assert len(res.diagnostics["grid"]) == 10
    assert res.diagnostics["h_max"] == 2.0


@pytest.mark.slow
def test_selectors_near_oracle():
    """Median data-driven bandwidths stay within a factor of two of h_AMISE."""
    spec = OracleSpec.for_kernel(EPANECHNIKOV, 0.01, 2 * math.pi, 0.5, mu2_squared=True)
    h_or = h_amise(spec, 400).h
    cv, rot = [], []
    for r in range(40):
        d = simulate_dataset(DgpSpec("m1", 0.0, 0.01, 400, seed=11), r)
        cv.append(h_cv(d).h)
        rot.append(h_rot(d, mu2_squared=True).h)
    for h in (np.median(cv), np.median(rot)):
        assert 0.5 < h / h_or < 2.0
