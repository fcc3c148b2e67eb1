"""Command line entry point: ``locpoly {fit,bandwidth,simulate,kde,montecarlo}``.

Exit codes: 0 success, 1 domain or data error (one JSON line on stderr),
2 usage error.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
import time
from pathlib import Path

import numpy as np

from . import io
from .asymptotics import summarize
from .bandwidth import CVSearch, OracleSpec, h_amise, h_cv, h_rot
from .density import kde, silverman_bandwidth
from .dgp import GENERATOR_ID, MODELS, DgpSpec, default_sigma2, simulate_dataset
from .errors import LocpolyError
from .estimator import fit_local
from .kernels import KERNELS, get_kernel
from .montecarlo import ExperimentConfig, build_tables, worker_count


def _positive_float(text):
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not (v > 0 and math.isfinite(v)):
        raise argparse.ArgumentTypeError(f"must be positive and finite: {text!r}")
    return v


def _finite_float(text):
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not math.isfinite(v):
        raise argparse.ArgumentTypeError(f"must be finite: {text!r}")
    return v


def _positive_int(text):
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1: {text!r}")
    return v


def _order(text):
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if v < 0:
        raise argparse.ArgumentTypeError(f"order must be >= 0: {text!r}")
    return v


def _unit_open(text):
    v = _finite_float(text)
    if not 0.0 < v < 1.0:
        raise argparse.ArgumentTypeError(f"must lie in (0, 1): {text!r}")
    return v


def _rho(text):
    v = _finite_float(text)
    if not 0.0 <= v < 1.0:
        raise argparse.ArgumentTypeError(f"rho must lie in [0, 1): {text!r}")
    return v


def _bandwidth(text):
    if text in ("cv", "rot", "amise"):
        return text
    return _positive_float(text)


def _load_spec(path) -> OracleSpec:
    with open(path) as fh:
        data = json.load(fh)
    return OracleSpec(**{k: data[k] for k in OracleSpec.__dataclass_fields__ if k in data})


def _select(args, d, k, method):
    if method == "cv":
        return h_cv(d, args.order, k, CVSearch())
    if method == "rot":
        return h_rot(d, k, args.mu2_squared)
    return h_amise(_load_spec(args.spec), d.n)


def cmd_fit(args, parser):
    if args.bandwidth == "amise" and not args.spec:
        parser.error("--bandwidth amise requires --spec")
    d = io.read_dataset(args.data)
    k = get_kernel(args.kernel)
    if isinstance(args.bandwidth, float):
        h, selector = args.bandwidth, "fixed"
    else:
        res = _select(args, d, k, args.bandwidth)
        h, selector = res.h, res.selector
    fit = fit_local(d, args.x0, h, args.order, k)
    out = {
        "x0": fit.x0,
        "h": fit.h,
        "p": fit.p,
        "selector": selector,
        "kernel": k.id,
        "coeffs": fit.coeffs,
        "n_effective": fit.n_effective,
    }
    if args.stderr:
        out.update(summarize(fit, d, k, args.ci).to_dict())
    io.dump_json(out)


def cmd_bandwidth(args, parser):
    if args.method == "amise" and not args.spec:
        parser.error("--method amise requires --spec")
    d = io.read_dataset(args.data)
    res = _select(args, d, get_kernel(args.kernel), args.method)
    io.dump_json(res.to_dict())


def cmd_simulate(args, parser):
    sigma2 = args.sigma2 if args.sigma2 is not None else default_sigma2(args.rho)
    spec = DgpSpec(args.model, args.rho, sigma2, args.n, args.seed)
    d = simulate_dataset(spec, args.replication)
    out = Path(args.out)
    io.write_dataset(out, d)
    meta = {
        "spec": {
            "model": spec.model,
            "rho": spec.rho,
            "sigma2": spec.sigma2,
            "n": spec.n,
            "seed": spec.seed,
            "replication": args.replication,
        },
        "generator": GENERATOR_ID,
        "data": str(out),
    }
    io.dump_json(meta, out.with_suffix(".meta.json"))


def cmd_kde(args, parser):
    cols = io.read_columns(args.data)
    if args.column not in cols:
        parser.error(f"column {args.column!r} not in {sorted(cols)}")
    sample = cols[args.column]
    h = args.bandwidth if args.bandwidth is not None else silverman_bandwidth(sample)
    lo = args.grid_min if args.grid_min is not None else float(sample.min() - 4 * h)
    hi = args.grid_max if args.grid_max is not None else float(sample.max() + 4 * h)
    if not hi > lo:
        parser.error("--grid-max must exceed --grid-min")
    est = kde(sample, np.linspace(lo, hi, args.grid_points), h)
    io.write_columns(args.out, {"grid": est.grid, "density": est.values})
    io.dump_json({"h_silverman": est.h_silverman, "n": int(sample.size), "out": args.out})


def _cell_name(fs) -> str:
    return f"figure_{fs.model}_rho{fs.rho:g}_n{fs.n}_x{fs.x0:.6g}.csv"


def cmd_montecarlo(args, parser):
    cfg = ExperimentConfig.from_json(args.config)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    t0 = time.perf_counter()
    table, figures = build_tables(cfg)
    table.to_csv(out_dir / "ratios.csv")
    fig_meta = []
    for fs in figures:
        name = _cell_name(fs)
        io.write_columns(out_dir / name, fs.columns())
        fig_meta.append({"file": name, "length": fs.length, "excluded": fs.excluded})
    io.dump_json(
        {
            "config": cfg.to_dict(),
            "generator": GENERATOR_ID,
            "workers": worker_count(),
            "wall_time_seconds": time.perf_counter() - t0,
            "failures": table.failures,
            "figures": fig_meta,
        },
        out_dir / "meta.json",
    )


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="locpoly", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    kernels = sorted(KERNELS)

    f = sub.add_parser("fit", help="local polynomial fit at one point")
    f.add_argument("--data", required=True)
    f.add_argument("--x0", required=True, type=_finite_float)
    f.add_argument("--order", type=_order, default=1)
    f.add_argument("--bandwidth", type=_bandwidth, default="cv",
                   help="positive number or one of cv, rot, amise")
    f.add_argument("--kernel", choices=kernels, default="epanechnikov")
    f.add_argument("--spec", help="OracleSpec JSON for --bandwidth amise")
    f.add_argument("--mu2-squared", action="store_true")
    f.add_argument("--stderr", action="store_true", help="add standard errors, CIs and bias")
    f.add_argument("--ci", type=_unit_open, default=0.95)
    f.set_defaults(func=cmd_fit, parser=f)

    b = sub.add_parser("bandwidth", help="select a bandwidth")
    b.add_argument("--data", required=True)
    b.add_argument("--method", choices=("cv", "rot", "amise"), required=True)
    b.add_argument("--order", type=_order, default=1)
    b.add_argument("--kernel", choices=kernels, default="epanechnikov")
    b.add_argument("--spec")
    b.add_argument("--mu2-squared", action="store_true")
    b.set_defaults(func=cmd_bandwidth, parser=b)

    s = sub.add_parser("simulate", help="simulate one dataset")
    s.add_argument("--model", choices=MODELS, required=True)
    s.add_argument("--rho", type=_rho, default=0.0)
    s.add_argument("--sigma2", type=_positive_float)
    s.add_argument("--n", type=_positive_int, required=True)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--replication", type=int, default=0)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_simulate, parser=s)

    k = sub.add_parser("kde", help="Gaussian KDE of one CSV column")
    k.add_argument("--data", required=True)
    k.add_argument("--column", default="x")
    k.add_argument("--grid-min", type=_finite_float)
    k.add_argument("--grid-max", type=_finite_float)
    k.add_argument("--grid-points", type=_positive_int, default=512)
    k.add_argument("--bandwidth", type=_positive_float)
    k.add_argument("--out", required=True)
    k.set_defaults(func=cmd_kde, parser=k)

    m = sub.add_parser("montecarlo", help="run the bandwidth comparison experiment")
    m.add_argument("--config", required=True)
    m.add_argument("--out-dir", required=True)
    m.set_defaults(func=cmd_montecarlo, parser=m)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.func(args, args.parser)
    except (LocpolyError, ValueError, OSError, KeyError, TypeError) as exc:
        err = {"error": type(exc).__name__, "message": str(exc)}
        sys.stderr.write(json.dumps(err) + "\n")
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
