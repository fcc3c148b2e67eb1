import math

import numpy as np
import pytest

from locpoly import montecarlo
from locpoly.bandwidth import h_cv
from locpoly.dgp import DgpSpec, simulate_dataset
from locpoly.errors import CellFailed
from locpoly.estimator import fit_local
from locpoly.montecarlo import (
    ExperimentConfig,
    build_tables,
    figure_samples,
    inference_study,
    oracle_spec,
    run_cell,
    run_panel,
)

SMALL = dict(models=("m2",), rhos=(0.5,), ns=(80,), replications=6, master_seed=3)


def test_config_roundtrip_and_validation(tmp_path):
    cfg = ExperimentConfig(**SMALL)
    assert ExperimentConfig.from_dict(cfg.to_dict()) == cfg
    with pytest.raises(ValueError):
        ExperimentConfig.from_dict({"replicatons": 5})
    with pytest.raises(ValueError):
        ExperimentConfig(replications=0)
    with pytest.raises(ValueError):
        ExperimentConfig(kernel="gaussian")
    assert cfg.x0s == {"m2": [0.25, 0.5, 0.75]}
    assert cfg.innovation_variance(0.5) == 0.0075


def test_oracle_spec():
    cfg = ExperimentConfig(mu2_squared=False)
    spec = oracle_spec("m1", 0.9, cfg)
    assert spec.error_variance == pytest.approx(0.0019 / 0.19)
    assert spec.support_length == pytest.approx(2 * math.pi)
    assert spec.curvature == 0.5


def test_noiseless_cell():
    res = run_cell("m2", 0.0, 200, 0.5, "amise", R=20, order=3, seed=1,
                   sigma2=1e-20, oracle_variance=0.01, workers=1)
    assert res.mse[0] < 1e-8
    assert res.excluded == 0 and res.estimates.shape == (20, 2)


def test_common_random_numbers():
    cfg = ExperimentConfig(**SMALL)
    panel = run_panel("m2", 0.5, 80, cfg, ("amise", "cv"), workers=1)
    spec = DgpSpec("m2", 0.5, 0.0075, 80, seed=3)
    for r in range(cfg.replications):
        d = simulate_dataset(spec, r)
        h = h_cv(d, 1, grid=cfg.cv_search).h
        assert panel.h[r, 1] == h
        assert panel.h[r, 0] == panel.h_oracle
        for i, x0 in enumerate(panel.x0s):
            fit = fit_local(d, x0, h, 1)
            np.testing.assert_array_equal(panel.estimates[r, i, 1], fit.coeffs)


def test_cell_stats_by_hand():
    res = run_cell("m1", 0.0, 100, math.pi, "rot", R=8, seed=2, workers=1)
    err = res.estimates - np.array([0.0, -1.0])
    np.testing.assert_allclose(res.bias, err.mean(axis=0), rtol=1e-12, atol=1e-15)
    np.testing.assert_allclose(res.mse, (err**2).mean(axis=0), rtol=1e-12)


def test_cell_failed():
    # p=3 at n=8 makes most fits singular
    with pytest.raises(CellFailed):
        run_cell("m2", 0.0, 8, 0.05, "amise", R=10, order=3, seed=1, workers=1)


def test_tables_self_ratio_and_determinism(tmp_path):
    cfg = ExperimentConfig(**SMALL)
    table, figures = build_tables(cfg, workers=1)
    rows = table.select(selector="amise")
    assert rows and all(r.ratio == 1.0 for r in rows)
    assert len(table.rows) == 3 * 2 * 2 * 3
    for r in table.select(selector="cv", stat="mse"):
        assert r.ratio == pytest.approx(r.raw_num / r.raw_den)
    assert [f.length for f in figures] == [6 - f.excluded for f in figures]
    table.to_csv(tmp_path / "a.csv")
    again, _ = build_tables(cfg, workers=2)
    again.to_csv(tmp_path / "b.csv")
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()


def test_figure_samples_match_panel():
    cfg = ExperimentConfig(**SMALL)
    fs = figure_samples(cfg, "m2", 0.5, 80, 0.5, workers=1)
    panel = run_panel("m2", 0.5, 80, cfg, x0s=(0.5,), workers=1)
    e = panel.estimates[:, 0]
    np.testing.assert_array_equal(fs.regression_cv, e[:, 1, 0] - e[:, 0, 0])
    np.testing.assert_array_equal(fs.derivative_rot, e[:, 2, 1] - e[:, 0, 1])
    assert set(fs.columns()) == {"regression_cv", "regression_rot", "derivative_cv", "derivative_rot"}


def test_forced_equal_bandwidths_give_zero(monkeypatch):
    monkeypatch.setattr(montecarlo, "_select", lambda sel, d, task: task.h_oracle)
    cfg = ExperimentConfig(**SMALL)
    fs = figure_samples(cfg, "m2", 0.5, 80, 0.5, workers=1)
    for col in fs.columns().values():
        np.testing.assert_array_equal(col, 0.0)


def test_inference_study_bookkeeping():
    cfg = ExperimentConfig(models=("m1",), replications=10, master_seed=4)
    st = inference_study(cfg, "m1", 0.0, 200, math.pi, workers=1)
    assert st.estimate.size + st.excluded == 10
    z = st.standardized()
    np.testing.assert_allclose(z, (st.estimate - st.bias_true - st.truth) / st.se)
    assert st.coverage() == np.mean(np.abs(z) <= st.z)
    # m''(pi) = 0 so the true bias term vanishes
    np.testing.assert_allclose(st.bias_true, 0.0, atol=1e-15)
    with pytest.raises(ValueError):
        st.coverage("other")


def test_worker_count(monkeypatch):
    monkeypatch.setenv("LOCPOLY_THREADS", "3")
    assert montecarlo.worker_count() == 3
    monkeypatch.setenv("LOCPOLY_THREADS", "0")
    assert montecarlo.worker_count() == 1


@pytest.mark.slow
def test_cv_cell_at_pi(m1_panel):
    """m1, rho=0, n=600, x0=pi: CV regression MSE ratio in [0.9, 1.3]."""
    _, table, _ = m1_panel
    (row,) = table.select(rho=0.0, n=600, x0=math.pi, target="regression", stat="mse", selector="cv")
    assert 0.9 <= row.ratio <= 1.3
