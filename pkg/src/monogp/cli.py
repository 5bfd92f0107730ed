"""Command-line surface: fit, predict, derivative-design, and canned experiments.

Exit codes: 0 on success, 1 on usage errors (bad flags, missing files),
2 on numerical failures (factorization or degenerate ensembles).
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from .design import PlacementPlan
from .experiments import (
    ExperimentConfig,
    fit_models,
    run_example1,
    run_example2,
    run_queue_demo,
    run_simstudy,
)
from .gp import FactorizationError
from .scmc import DegenerateEnsembleError


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> _Parser:
    parser = _Parser(prog="monogp",
                     description="Monotone Gaussian-process emulation via "
                                 "sequentially constrained Monte Carlo")
    sub = parser.add_subparsers(dest="command")

    fit = sub.add_parser("fit", help="fit a monotone emulator from a config file")
    fit.add_argument("--config", required=True, help="YAML run configuration")
    fit.add_argument("--out", required=True, help="snapshot output path")
    fit.add_argument("--seed", type=int, default=None)
    fit.add_argument("--n-particles", type=int, default=None)

    pred = sub.add_parser("predict", help="summarize a snapshot at new points")
    pred.add_argument("--snapshot", required=True)
    pred.add_argument("--points", required=True, help="CSV of prediction points")
    pred.add_argument("--out", required=True, help="CSV output path")
    pred.add_argument("--config", default=None,
                      help="optional config for a digest consistency check")
    pred.add_argument("--seed", type=int, default=0)

    des = sub.add_parser("design-derivs", help="emit a derivative placement plan")
    des.add_argument("--strategy", required=True,
                     choices=["gap-grid", "plus-shape"])
    des.add_argument("--out", required=True, help="plan JSON output path")
    des.add_argument("--dim", type=int, default=0)
    des.add_argument("--direction", type=int, default=1, choices=[1, -1])
    des.add_argument("--lo", type=float, default=None)
    des.add_argument("--hi", type=float, default=None)
    des.add_argument("--count", type=int, default=10)
    des.add_argument("--dims", type=int, nargs="+", default=None)
    des.add_argument("--arm", type=float, default=0.1)
    des.add_argument("--per-arm", type=int, default=2)

    for name, helptext in [("example1", "one-dimensional gap example"),
                           ("example2", "two-dimensional polynomial example"),
                           ("queue-demo", "flat-then-steep queue-style surface")]:
        p = sub.add_parser(name, help=helptext)
        _sampler_flags(p)
    sim = sub.add_parser("simstudy", help="random-polynomial simulation study")
    sim.add_argument("--replicates", type=int, default=30)
    _sampler_flags(sim, default_particles=1000)
    return parser


def _sampler_flags(p, default_particles=2000):
    p.add_argument("--n-particles", type=int, default=default_particles)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-dir", default=None)
    p.add_argument("--tau-final", type=float, default=1e6)
    p.add_argument("--schedule", choices=["adaptive", "fixed"], default="adaptive")
    p.add_argument("--n-steps", type=int, default=20)
    p.add_argument("--n-mh", type=int, default=5)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--paper-scale", action="store_true",
                   help="full-scale run: 40000 particles")
    p.add_argument("--no-center", action="store_true")
    p.add_argument("--bare-sigma2-ratio", action="store_true",
                   help="drop the Hastings correction on the variance move")
    p.add_argument("--resample", choices=["always", "ess"], default="always")


def _experiment_config(args, standardize=False) -> ExperimentConfig:
    return ExperimentConfig(
        n_particles=40000 if args.paper_scale else args.n_particles,
        tau_final=args.tau_final, schedule=args.schedule, n_steps=args.n_steps,
        n_mh=args.n_mh, seed=args.seed, center=not args.no_center,
        standardize=standardize, hastings_sigma2=not args.bare_sigma2_ratio,
        resample_policy=args.resample, workers=args.workers)


def _print_report(report):
    print(f"== {report.name} ==")
    for method, vals in report.methods.items():
        rmse = np.median(vals["rmse"]) if vals["rmse"] else float("nan")
        awoci = np.median(vals["awoci"]) if vals["awoci"] else float("nan")
        print(f"  {method:>14}: median RMSE {rmse:.4g}, median AWoCI "
              f"{awoci:.4g}, coverage {vals['coverage']:.3f}")
    for key, value in report.extras.items():
        if isinstance(value, float):
            print(f"  {key}: {value:.4g}")
    print(f"  meta: {report.meta}")


def _cmd_fit(args) -> int:
    from .io import EnsembleSnapshot, RunConfig, save_snapshot

    config = RunConfig.from_yaml(args.config)
    if args.seed is not None:
        config.sampler = replace(config.sampler, seed=args.seed)
    if args.n_particles is not None:
        config.sampler = replace(config.sampler, n_particles=args.n_particles)
    data, spec, xstar = config.build_problem()
    fit = fit_models(data, spec, xstar, config.sampler)
    snapshot = EnsembleSnapshot.from_fit(config, fit)
    path = save_snapshot(snapshot, args.out)
    print(f"snapshot written to {path} "
          f"({fit.ensemble.n_particles} particles, "
          f"{len(fit.result.taus) - 1} schedule steps)")
    return 0


def _cmd_predict(args) -> int:
    from .experiments import _write_curves
    from .gp import conditional_draws_at
    from .io import RunConfig, load_points, load_snapshot
    from .scmc import Ensemble, summarize

    digest = RunConfig.from_yaml(args.config).digest() if args.config else None
    snapshot = load_snapshot(args.snapshot, expect_config_digest=digest)
    data, spec, xstar, priors, jitter = snapshot.problem_objects()
    pts = load_points(args.points, ndim=data.ndim)
    ens = snapshot.ensemble
    fields = np.hstack([ens.ystar, ens.yprime])
    draws = conditional_draws_at(pts, data, spec, xstar, ens.lengthscales,
                                 ens.variances, fields, seed=args.seed,
                                 jitter=jitter)
    shift = snapshot.problem["shift"]
    scale = snapshot.problem["scale"]
    pseudo = Ensemble(ens.lengthscales, ens.variances,
                      draws * scale + shift, np.empty((ens.n_particles, 0)),
                      ens.logweights, t_index=ens.t_index, seed=ens.seed)
    summ = summarize(pseudo)
    _write_curves(Path(args.out), pts, summ)
    print(f"predictions for {pts.shape[0]} points written to {args.out}")
    return 0


def _cmd_design(args) -> int:
    import json

    if args.strategy == "gap-grid":
        if args.lo is None or args.hi is None:
            raise UsageError("gap-grid needs --lo and --hi")
        plan = PlacementPlan("gap_grid", (args.dim,), (args.direction,),
                             {"lo": args.lo, "hi": args.hi, "count": args.count})
    else:
        dims = tuple(args.dims) if args.dims else (0, 1)
        plan = PlacementPlan("plus_shape", dims, (args.direction,) * len(dims),
                             {"arm": args.arm, "per_arm": args.per_arm})
    Path(args.out).write_text(json.dumps(plan.to_dict(), indent=2) + "\n")
    print(f"placement plan written to {args.out}")
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            parser.print_usage(sys.stderr)
            return 1
        if args.command == "fit":
            return _cmd_fit(args)
        if args.command == "predict":
            return _cmd_predict(args)
        if args.command == "design-derivs":
            return _cmd_design(args)
        if args.command == "example1":
            report, _, _ = run_example1(_experiment_config(args),
                                        out_dir=args.out_dir)
            _print_report(report)
            return 0
        if args.command == "example2":
            report, _, _ = run_example2(
                _experiment_config(args, standardize=True),
                out_dir=args.out_dir)
            _print_report(report)
            return 0
        if args.command == "simstudy":
            report = run_simstudy(
                args.replicates,
                replace(_experiment_config(args, standardize=True)),
                out_dir=args.out_dir)
            _print_report(report)
            return 0
        if args.command == "queue-demo":
            report, _ = run_queue_demo(
                _experiment_config(args, standardize=True),
                out_dir=args.out_dir)
            _print_report(report)
            return 0
        parser.print_usage(sys.stderr)
        return 1
    except UsageError as err:
        parser.print_usage(sys.stderr)
        print(f"error: {err}", file=sys.stderr)
        return 1
    except FileNotFoundError as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    except ValueError as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    except (FactorizationError, DegenerateEnsembleError, RuntimeError) as err:
        print(f"numerical failure: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
