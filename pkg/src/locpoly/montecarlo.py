"""Monte Carlo comparison of data-driven and oracle bandwidths.

For every (model, rho, n) panel, replication r simulates one dataset from the
streams keyed by ``(master_seed, r)``, computes h_AMISE, h_CV and h_ROT on it
and fits at every evaluation point. All selectors therefore see identical
data (common random numbers). Replications are independent tasks; results are
collected in replication order, so output does not depend on the number of
worker processes.
"""
from __future__ import annotations

import csv
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .asymptotics import bias_weights, normal_quantile, summarize
from .bandwidth import CVSearch, OracleSpec, h_amise, h_cv, h_rot
from .dgp import (
    DgpSpec,
    default_sigma2,
    derivative,
    model_curvature,
    model_support,
    nth_derivative,
    regression,
    simulate_dataset,
)
from .errors import CellFailed, LocpolyError
from .estimator import fit_local
from .kernels import get_kernel

__all__ = [
    "SELECTORS",
    "ExperimentConfig",
    "CellResult",
    "RatioRow",
    "RatioTable",
    "PanelResult",
    "FigureSamples",
    "worker_count",
    "oracle_spec",
    "run_panel",
    "run_cell",
    "build_tables",
    "figure_samples",
    "InferenceStudy",
    "inference_study",
]

SELECTORS = ("amise", "cv", "rot")
TARGETS = ("regression", "derivative")
DEFAULT_X0 = {"m1": (0.5 * math.pi, math.pi, 1.5 * math.pi), "m2": (0.25, 0.5, 0.75)}


def worker_count() -> int:
    env = os.environ.get("LOCPOLY_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def _pmap(func, tasks: Sequence, workers: int | None = None) -> list:
    workers = worker_count() if workers is None else workers
    if workers <= 1 or len(tasks) <= 1:
        return [func(t) for t in tasks]
    chunk = max(1, len(tasks) // (8 * workers))
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(func, tasks, chunksize=chunk))


@dataclass(frozen=True)
class ExperimentConfig:
    models: tuple[str, ...] = ("m1", "m2")
    rhos: tuple[float, ...] = (0.0, 0.5, 0.9)
    ns: tuple[int, ...] = (200, 600)
    x0s: dict = field(default_factory=lambda: {m: list(v) for m, v in DEFAULT_X0.items()})
    replications: int = 1000
    order: int = 1
    kernel: str = "epanechnikov"
    master_seed: int = 20100601
    # squared mu2 makes h_AMISE the true AMISE minimiser for compact kernels
    mu2_squared: bool = True
    # innovation variance per rho; None -> stationary variance 0.01
    sigma2: float | None = None
    # error variance fed to h_AMISE; None -> true stationary variance
    oracle_variance: float | None = None
    negate_m1_derivative: bool = False
    max_excluded_fraction: float = 0.05
    cv_grid: int = 40
    cv_rtol: float = 1e-3

    def __post_init__(self):
        if self.replications < 1:
            raise ValueError("replications must be >= 1")
        if self.order < 0:
            raise ValueError("order must be >= 0")
        get_kernel(self.kernel)
        object.__setattr__(self, "models", tuple(self.models))
        object.__setattr__(self, "rhos", tuple(float(r) for r in self.rhos))
        object.__setattr__(self, "ns", tuple(int(n) for n in self.ns))
        x0s = {m: [float(v) for v in self.x0s.get(m, DEFAULT_X0[m])] for m in self.models}
        object.__setattr__(self, "x0s", x0s)

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)

    @classmethod
    def from_json(cls, path) -> "ExperimentConfig":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))

    def to_dict(self) -> dict:
        out = asdict(self)
        out["models"] = list(self.models)
        out["rhos"] = list(self.rhos)
        out["ns"] = list(self.ns)
        return out

    @property
    def cv_search(self) -> CVSearch:
        return CVSearch(n_grid=self.cv_grid, refine_rtol=self.cv_rtol)

    def innovation_variance(self, rho: float) -> float:
        return self.sigma2 if self.sigma2 is not None else default_sigma2(rho)


def oracle_spec(model: str, rho: float, cfg: ExperimentConfig) -> OracleSpec:
    """Population AMISE constants for a simulation design."""
    if cfg.oracle_variance is not None:
        var = cfg.oracle_variance
    else:
        var = cfg.innovation_variance(rho) / (1.0 - rho * rho)
    lo, hi = model_support(model)
    return OracleSpec.for_kernel(
        get_kernel(cfg.kernel), var, hi - lo, model_curvature(model), cfg.mu2_squared
    )


# -- one replication ---------------------------------------------------------

@dataclass(frozen=True)
class _Task:
    model: str
    rho: float
    n: int
    rep: int
    cfg: ExperimentConfig
    h_oracle: float
    selectors: tuple[str, ...]
    x0s: tuple[float, ...]


def _select(sel: str, d, task: _Task) -> float:
    k = get_kernel(task.cfg.kernel)
    if sel == "amise":
        return task.h_oracle
    if sel == "cv":
        return h_cv(d, task.cfg.order, k, task.cfg.cv_search).h
    if sel == "rot":
        return h_rot(d, k, task.cfg.mu2_squared).h
    raise ValueError(f"unknown selector {sel!r}")


def _replicate(task: _Task):
    cfg = task.cfg
    spec = DgpSpec(task.model, task.rho, cfg.innovation_variance(task.rho), task.n, cfg.master_seed)
    d = simulate_dataset(spec, task.rep)
    k = get_kernel(cfg.kernel)
    n_sel, n_x0 = len(task.selectors), len(task.x0s)
    h = np.full(n_sel, np.nan)
    est = np.full((n_x0, n_sel, 2), np.nan)
    for s, sel in enumerate(task.selectors):
        try:
            h[s] = _select(sel, d, task)
        except LocpolyError:
            continue
        for i, x0 in enumerate(task.x0s):
            try:
                fit = fit_local(d, x0, h[s], cfg.order, k)
            except LocpolyError:
                continue
            est[i, s, 0] = fit.coeffs[0]
            est[i, s, 1] = fit.coeffs[1] if cfg.order >= 1 else np.nan
    return h, est


@dataclass
class PanelResult:
    """Raw replication output for one (model, rho, n)."""

    model: str
    rho: float
    n: int
    x0s: tuple[float, ...]
    selectors: tuple[str, ...]
    h_oracle: float
    h: np.ndarray  # (R, n_sel)
    estimates: np.ndarray  # (R, n_x0, n_sel, 2)

    def valid(self, i: int) -> np.ndarray:
        """Replications where every selector produced an estimate at x0s[i]."""
        return np.all(np.isfinite(self.estimates[:, i, :, 0]), axis=1)


def run_panel(
    model: str,
    rho: float,
    n: int,
    cfg: ExperimentConfig,
    selectors: Iterable[str] = SELECTORS,
    x0s: Iterable[float] | None = None,
    workers: int | None = None,
) -> PanelResult:
    selectors = tuple(selectors)
    x0s = tuple(cfg.x0s[model] if x0s is None else (float(v) for v in x0s))
    h_or = h_amise(oracle_spec(model, rho, cfg), n).h
    tasks = [
        _Task(model, rho, n, r, cfg, h_or, selectors, x0s) for r in range(cfg.replications)
    ]
    out = _pmap(_replicate, tasks, workers)
    h = np.array([o[0] for o in out]).reshape(len(tasks), len(selectors))
    est = np.array([o[1] for o in out]).reshape(len(tasks), len(x0s), len(selectors), 2)
    return PanelResult(model, rho, n, x0s, selectors, h_or, h, est)


def _truth(model: str, x0: float, cfg: ExperimentConfig) -> np.ndarray:
    return np.array(
        [
            float(regression(model, x0)),
            float(derivative(model, x0, negate_m1=cfg.negate_m1_derivative)),
        ]
    )


@dataclass(frozen=True)
class CellResult:
    """Bias and MSE of (b0, b1) for one selector at one evaluation point."""

    bias: np.ndarray
    mse: np.ndarray
    estimates: np.ndarray
    excluded: int
    replications: int


def _cell_stats(est: np.ndarray, truth: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    err = est - truth
    # ordered reductions: plain sums in replication order
    return err.sum(axis=0) / len(err), (err * err).sum(axis=0) / len(err)


def run_cell(
    model: str,
    rho: float,
    n: int,
    x0: float,
    selector: str,
    R: int,
    order: int = 1,
    kernel: str = "epanechnikov",
    seed: int = 0,
    sigma2: float | None = None,
    oracle_variance: float | None = None,
    mu2_squared: bool = False,
    workers: int | None = None,
) -> CellResult:
    cfg = ExperimentConfig(
        models=(model,),
        rhos=(rho,),
        ns=(n,),
        x0s={model: [x0]},
        replications=R,
        order=order,
        kernel=kernel,
        master_seed=seed,
        sigma2=sigma2,
        oracle_variance=oracle_variance,
        mu2_squared=mu2_squared,
    )
    panel = run_panel(model, rho, n, cfg, (selector,), (x0,), workers)
    ok = panel.valid(0)
    excluded = int(R - ok.sum())
    if excluded > cfg.max_excluded_fraction * R:
        raise CellFailed(f"{excluded} of {R} replications excluded")
    est = panel.estimates[ok, 0, 0, :]
    bias, mse = _cell_stats(est, _truth(model, x0, cfg))
    return CellResult(bias, mse, est, excluded, R)


# -- tables ------------------------------------------------------------------

@dataclass(frozen=True)
class RatioRow:
    model: str
    rho: float
    n: int
    x0: float
    target: str
    stat: str
    selector: str
    ratio: float
    raw_num: float
    raw_den: float
    excluded: int


RATIO_COLUMNS = tuple(RatioRow.__dataclass_fields__)


@dataclass
class RatioTable:
    rows: list[RatioRow] = field(default_factory=list)
    failures: list[dict] = field(default_factory=list)

    def select(self, **crit) -> list[RatioRow]:
        return [r for r in self.rows if all(getattr(r, k) == v for k, v in crit.items())]

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(RATIO_COLUMNS)
            for r in self.rows:
                w.writerow([_fmt(getattr(r, c)) for c in RATIO_COLUMNS])


def _fmt(v):
    if isinstance(v, float):
        return repr(v)
    return str(v)


@dataclass(frozen=True)
class FigureSamples:
    """Per-replication differences between selector and oracle estimates."""

    model: str
    rho: float
    n: int
    x0: float
    regression_cv: np.ndarray
    regression_rot: np.ndarray
    derivative_cv: np.ndarray
    derivative_rot: np.ndarray
    excluded: int

    @property
    def length(self) -> int:
        return self.regression_cv.size

    def columns(self) -> dict[str, np.ndarray]:
        return {
            "regression_cv": self.regression_cv,
            "regression_rot": self.regression_rot,
            "derivative_cv": self.derivative_cv,
            "derivative_rot": self.derivative_rot,
        }


def _figure_from_panel(panel: PanelResult, i: int) -> FigureSamples:
    ok = panel.valid(i)
    sel = {s: j for j, s in enumerate(panel.selectors)}
    e = panel.estimates[ok, i]
    base = e[:, sel["amise"]]
    diff = {s: e[:, sel[s]] - base for s in ("cv", "rot")}
    return FigureSamples(
        panel.model,
        panel.rho,
        panel.n,
        panel.x0s[i],
        diff["cv"][:, 0],
        diff["rot"][:, 0],
        diff["cv"][:, 1],
        diff["rot"][:, 1],
        int((~ok).sum()),
    )


def _rows_from_panel(panel: PanelResult, cfg: ExperimentConfig, table: RatioTable):
    R = panel.estimates.shape[0]
    for i, x0 in enumerate(panel.x0s):
        ok = panel.valid(i)
        excluded = int(R - ok.sum())
        failed = excluded > cfg.max_excluded_fraction * R
        if failed:
            table.failures.append(
                {
                    "model": panel.model,
                    "rho": panel.rho,
                    "n": panel.n,
                    "x0": x0,
                    "error": "CellFailed",
                    "excluded": excluded,
                }
            )
        truth = _truth(panel.model, x0, cfg)
        stats = {}
        for s, sel in enumerate(panel.selectors):
            if failed or not ok.any():
                nan = np.full(2, np.nan)
                stats[sel] = (nan, nan)
            else:
                stats[sel] = _cell_stats(panel.estimates[ok, i, s, :], truth)
        for t, target in enumerate(TARGETS):
            for st, stat in enumerate(("bias", "mse")):
                den = float(stats["amise"][st][t])
                for sel in panel.selectors:
                    num = float(stats[sel][st][t])
                    ratio = num / den if den != 0 else math.nan
                    table.rows.append(
                        RatioRow(panel.model, panel.rho, panel.n, x0, target, stat, sel,
                                 ratio, num, den, excluded)
                    )


def build_tables(
    cfg: ExperimentConfig, workers: int | None = None
) -> tuple[RatioTable, list[FigureSamples]]:
    """Run every panel of ``cfg``; return the ratio table and figure samples."""
    table = RatioTable()
    figures: list[FigureSamples] = []
    for model in cfg.models:
        for rho in cfg.rhos:
            for n in cfg.ns:
                panel = run_panel(model, rho, n, cfg, SELECTORS, workers=workers)
                _rows_from_panel(panel, cfg, table)
                figures.extend(_figure_from_panel(panel, i) for i in range(len(panel.x0s)))
    return table, figures


def figure_samples(
    cfg: ExperimentConfig, model: str, rho: float, n: int, x0: float, workers: int | None = None
) -> FigureSamples:
    panel = run_panel(model, rho, n, cfg, SELECTORS, (x0,), workers)
    fs = _figure_from_panel(panel, 0)
    if fs.excluded > cfg.max_excluded_fraction * cfg.replications:
        raise CellFailed(f"{fs.excluded} of {cfg.replications} replications excluded")
    return fs


# -- inference ---------------------------------------------------------------

@dataclass(frozen=True)
class _InferenceTask:
    cfg: ExperimentConfig
    model: str
    rho: float
    n: int
    x0: float
    selector: str
    rep: int
    h_oracle: float
    ci_level: float


def _inference_rep(task: _InferenceTask):
    cfg = task.cfg
    spec = DgpSpec(task.model, task.rho, cfg.innovation_variance(task.rho), task.n, cfg.master_seed)
    d = simulate_dataset(spec, task.rep)
    k = get_kernel(cfg.kernel)
    t = _Task(task.model, task.rho, task.n, task.rep, cfg, task.h_oracle, (task.selector,), (task.x0,))
    try:
        h = _select(task.selector, d, t)
        fit = fit_local(d, task.x0, h, cfg.order, k)
        s = summarize(fit, d, k, task.ci_level)
    except LocpolyError:
        return (math.nan,) * 4
    return (h, float(fit.coeffs[0]), float(s.se[0]), float(s.bias[0]))


@dataclass(frozen=True)
class InferenceStudy:
    """Per-replication b0, its standard error and bias terms at one point.

    ``bias_plugin`` is the estimate reported by :func:`summarize`;
    ``bias_true`` is the same leading term evaluated with the true
    (p+1)-th derivative of the simulation design.
    """

    h: np.ndarray
    estimate: np.ndarray
    se: np.ndarray
    bias_plugin: np.ndarray
    bias_true: np.ndarray
    truth: float
    z: float
    excluded: int

    def _bias(self, centring: str) -> np.ndarray:
        try:
            return {
                "true": self.bias_true,
                "plugin": self.bias_plugin,
                "none": np.zeros_like(self.estimate),
            }[centring]
        except KeyError:
            raise ValueError(f"unknown centring {centring!r}") from None

    def standardized(self, centring: str = "true") -> np.ndarray:
        """(b0_hat - bias - m(x0)) / se for every replication."""
        return (self.estimate - self._bias(centring) - self.truth) / self.se

    def coverage(self, centring: str = "true") -> float:
        return float(np.mean(np.abs(self.standardized(centring)) <= self.z))


def inference_study(
    cfg: ExperimentConfig,
    model: str,
    rho: float,
    n: int,
    x0: float,
    selector: str = "cv",
    ci_level: float = 0.95,
    workers: int | None = None,
) -> InferenceStudy:
    """Replicate b0, its standard error and bias at x0 under one selector."""
    h_or = h_amise(oracle_spec(model, rho, cfg), n).h
    tasks = [
        _InferenceTask(cfg, model, rho, n, float(x0), selector, r, h_or, ci_level)
        for r in range(cfg.replications)
    ]
    out = np.array(_pmap(_inference_rep, tasks, workers))
    ok = np.all(np.isfinite(out), axis=1)
    h, est, se, bias = out[ok].T
    p = cfg.order
    k = get_kernel(cfg.kernel)
    lead = float(nth_derivative(model, x0, p + 1)) / math.factorial(p + 1)
    bias_true = h ** (p + 1) * lead * bias_weights(k, p)[0]
    return InferenceStudy(
        h, est, se, bias, bias_true,
        truth=float(regression(model, x0)),
        z=normal_quantile(0.5 * (1.0 + ci_level)),
        excluded=int((~ok).sum()),
    )
