"""Benchmark surfaces, the two worked examples, and the simulation study.

Each experiment fits the same problem twice: the unconstrained model is the
initialization sample (the annealing schedule is vacuous at tau = 0), and the
monotone model is the final ensemble of the constrained run.  Metrics follow
the usual emulation conventions: root mean squared error of the posterior
mean, average width of the 95% credible intervals (AWoCI), and pooled
coverage of the open 95% intervals.
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np
from numpy.polynomial import polynomial as npoly

from .constraint import default_schedule
from .design import lhd, place_gap_grid, place_plus_shape
from .gp import Dataset, DerivativeSpec, GPState, JitterPolicy, PriorConfig
from .scmc import (
    AdaptiveSchedule,
    Ensemble,
    MoveConfig,
    PosteriorSummary,
    SCMCResult,
    mcmc_init,
    scmc_run,
    summarize,
)

# -- test functions -----------------------------------------------------------------


def testfn_example1(x):
    """Monotone log curve log(20 x + 1) on the unit interval."""
    return np.log(20.0 * np.asarray(x, dtype=float) + 1.0)


def testfn_example2(x1, x2):
    """Two-dimensional monotone polynomial 11 x1^10 + 10 x2^9 + 9 x1^8 + 8 x2^7 + 7 x1^6."""
    x1 = np.asarray(x1, dtype=float)
    x2 = np.asarray(x2, dtype=float)
    return (11.0 * x1**10 + 10.0 * x2**9 + 9.0 * x1**8
            + 8.0 * x2**7 + 7.0 * x1**6)


def random_polynomial(seed: int):
    """Random nondecreasing surface sum_ij gamma_ij x1^i x2^j on the unit square.

    All 121 coefficients share one gamma-distributed draw beta (shape 0.01,
    rate 1), scaled by (i+1)(j+1) so every term contributes equally in
    expectation under uniform inputs.  Returns (function, coefficient table).
    """
    rng = np.random.default_rng(seed)
    beta = float(rng.gamma(0.01))
    ij = np.arange(11)
    gamma = np.outer(ij + 1, ij + 1) * beta

    def fn(x1, x2):
        return npoly.polyval2d(np.asarray(x1, dtype=float),
                               np.asarray(x2, dtype=float), gamma)

    return fn, gamma


def testfn_flat_steep(x1, x2, rho: float = 1.0, c: float = 1.0):
    """Flat-near-origin surface diverging toward the boundary x1 + x2 = rho.

    c * (x1 + x2) / (rho - x1 - x2); monotone increasing in both inputs on
    the open triangle x1 + x2 < rho, with a pole at the boundary.
    """
    x1 = np.asarray(x1, dtype=float)
    x2 = np.asarray(x2, dtype=float)
    total = x1 + x2
    if np.any(total >= rho) or np.any(x1 < 0) or np.any(x2 < 0):
        raise ValueError(f"inputs must satisfy 0 <= x1, x2 and x1 + x2 < rho={rho}")
    return c * total / (rho - total)


# -- metrics ------------------------------------------------------------------------


@dataclass(frozen=True)
class Metrics:
    rmse: float
    awoci: float
    cover: np.ndarray  # per-point flags: truth inside the open 95% interval


def metrics(summary: PosteriorSummary, truth) -> Metrics:
    """Root mean squared error, mean 95%-interval width, and coverage flags."""
    truth = np.asarray(truth, dtype=float).ravel()
    if truth.size != summary.mean.size:
        raise ValueError(f"got {truth.size} truths for {summary.mean.size} predictions")
    rmse = float(np.sqrt(np.mean((summary.mean - truth) ** 2)))
    awoci = float(np.mean(summary.width))
    cover = (truth > summary.q025) & (truth < summary.q975)
    return Metrics(rmse, awoci, cover)


# -- fit pipeline -------------------------------------------------------------------


@dataclass(frozen=True)
class ExperimentConfig:
    """Desk-scale sampler settings shared by the experiment drivers.

    ``schedule="adaptive"`` anneals with the ESS-floor ladder; "fixed" uses
    the geometric schedule with ``n_steps`` rungs.  ``center`` subtracts the
    response mean before fitting (added back for prediction);
    ``standardize`` additionally divides by the response standard deviation,
    which keeps the chi-squared variance prior meaningful when responses
    live at extreme scales.
    """

    n_particles: int = 2000
    tau_final: float = 1e6
    schedule: str = "adaptive"
    n_steps: int = 20
    ess_floor: float = 0.5
    max_growth: float = 30.0
    n_mh: int = 5
    burnin: int = 2000
    thin: int = 5
    seed: int = 0
    center: bool = True
    standardize: bool = False
    resample_policy: str = "always"
    hastings_sigma2: bool = True
    field_proposal: str = "conditional"
    rw_scale0: float = 0.25
    q0: float = 0.1
    workers: int = 1
    jitter: JitterPolicy = JitterPolicy()
    priors: PriorConfig = PriorConfig()

    def tau_schedule(self):
        if self.schedule == "adaptive":
            return AdaptiveSchedule(self.tau_final, self.ess_floor,
                                    max_growth=self.max_growth)
        if self.schedule == "fixed":
            return default_schedule(self.tau_final, self.n_steps)
        raise ValueError("schedule must be 'adaptive' or 'fixed'")


def response_transform(data: Dataset, cfg: "ExperimentConfig"):
    """(shift, scale) applied to the response before fitting."""
    shift = float(np.mean(data.y)) if cfg.center else 0.0
    scale = 1.0
    if cfg.standardize:
        sd = float(np.std(data.y - shift))
        scale = sd if sd > 0 else 1.0
    return shift, scale


def _rescale_summary(summ: PosteriorSummary, shift: float,
                     scale: float) -> PosteriorSummary:
    return PosteriorSummary(
        summ.mean * scale + shift,
        summ.q025 * scale + shift,
        summ.q500 * scale + shift,
        summ.q975 * scale + shift,
    )


@dataclass
class FitResult:
    """Both fits of one problem plus the transform back to original units."""

    unconstrained: PosteriorSummary
    monotone: PosteriorSummary
    ens0: Ensemble
    result: SCMCResult
    state: GPState
    shift: float
    scale: float

    @property
    def ensemble(self) -> Ensemble:
        return self.result.ensemble

    def constraint_satisfaction(self) -> float:
        """Fraction of final particles with every stored derivative positive."""
        if self.ensemble.yprime.shape[1] == 0:
            return 1.0
        return float(np.mean(np.all(self.ensemble.yprime > 0.0, axis=1)))

    def interpolation_errors(self, n_check: int = 25):
        """Max |conditional mean - y| at the training points, original units.

        Evaluated per sampled particle (the conditional mean is deterministic
        given the hyperparameters) for both ensembles; returns the pair
        (unconstrained, monotone) of maxima.
        """
        data = self.state.data
        interp = GPState(data, DerivativeSpec.empty(), data.X,
                         jitter=self.state.jitter)
        out = []
        for ens in (self.ens0, self.ensemble):
            idx = np.linspace(0, ens.n_particles - 1, n_check).astype(int)
            worst = 0.0
            for i in idx:
                ent = interp.entry(ens.lengthscales[i])
                if ent is None:
                    continue
                worst = max(worst, float(np.max(np.abs(ent.mean - data.y))))
            out.append(worst * self.scale)
        return tuple(out)


def fit_models(data: Dataset, spec: DerivativeSpec, xstar,
               cfg: ExperimentConfig, step_callback=None) -> FitResult:
    """Fit the unconstrained and monotone models on one problem.

    The response is centered (and optionally standardized) before fitting;
    summaries are mapped back to original units.  The unconstrained model is
    the initialization ensemble; the monotone model continues it through the
    annealing schedule.
    """
    shift, scale = response_transform(data, cfg)
    fit_data = Dataset(data.X, (data.y - shift) / scale)
    state = GPState(fit_data, spec, xstar, cfg.priors, jitter=cfg.jitter)
    mcfg = MoveConfig(np.full(data.ndim, cfg.rw_scale0), cfg.q0,
                      hastings_sigma2=cfg.hastings_sigma2,
                      field_proposal=cfg.field_proposal)
    ens0 = mcmc_init(fit_data, spec, xstar, cfg.priors,
                     n_particles=cfg.n_particles, burnin=cfg.burnin,
                     thin=cfg.thin, seed=cfg.seed, cfg=mcfg, state=state)
    result = scmc_run(fit_data, spec, xstar, cfg.priors,
                      schedule=cfg.tau_schedule(), n_particles=cfg.n_particles,
                      cfg=mcfg, seed=cfg.seed, n_mh=cfg.n_mh,
                      resample_policy=cfg.resample_policy,
                      ess_threshold=cfg.ess_floor, workers=cfg.workers,
                      init_ensemble=ens0, state=state,
                      step_callback=step_callback)
    return FitResult(_rescale_summary(summarize(ens0), shift, scale),
                     _rescale_summary(summarize(result.ensemble), shift, scale),
                     ens0, result, state, shift, scale)


# -- reports and file output --------------------------------------------------------


@dataclass
class ExperimentReport:
    """Per-method metric lists, pooled coverage, and run metadata."""

    name: str
    methods: dict       # method -> {"rmse": [...], "awoci": [...], "coverage": float}
    meta: dict
    extras: dict = field(default_factory=dict)

    def __post_init__(self):
        for vals in self.methods.values():
            if not 0.0 <= vals["coverage"] <= 1.0:
                raise ValueError("coverage must lie in [0, 1]")
            if any(w < 0 for w in vals["awoci"]):
                raise ValueError("interval widths cannot be negative")

    def to_json_dict(self) -> dict:
        return {"name": self.name, "methods": self.methods, "meta": self.meta,
                "extras": self.extras}

    def write(self, out_dir) -> Path:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        path = out_dir / f"{self.name}_report.json"
        path.write_text(json.dumps(self.to_json_dict(), indent=2,
                                   default=_jsonable) + "\n")
        rows = [("method", "replicate", "rmse", "awoci", "coverage")]
        for method, vals in self.methods.items():
            for r, (rm, aw) in enumerate(zip(vals["rmse"], vals["awoci"])):
                rows.append((method, r, rm, aw, vals["coverage"]))
        _write_csv(out_dir / f"{self.name}_metrics.csv", rows)
        return path


def _jsonable(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    raise TypeError(f"not JSON-serializable: {type(obj)}")


def _write_csv(path, rows):
    import csv

    with open(path, "w", newline="") as fh:
        csv.writer(fh).writerows(rows)


def _write_curves(path, x, summ: PosteriorSummary):
    rows = [("x", "mean", "q025", "q975")]
    for xi, m, lo, hi in zip(np.atleast_2d(x)[:, 0], summ.mean, summ.q025,
                             summ.q975):
        rows.append((xi, m, lo, hi))
    _write_csv(path, rows)


def _method_entry(m: Metrics) -> dict:
    return {"rmse": [m.rmse], "awoci": [m.awoci],
            "coverage": float(np.mean(m.cover))}


# -- Example 1: one-dimensional gap -------------------------------------------------

EXAMPLE1_DESIGN = np.array([0.0, 0.1, 0.2, 0.3, 0.4, 0.9, 1.0])
EXAMPLE1_DERIV_GRID = place_gap_grid(0.4, 0.9, 10)


def example1_problem(n_deriv: int = 10):
    """Dataset, derivative spec (a prefix of the gap grid), and prediction grid."""
    X = EXAMPLE1_DESIGN[:, None]
    data = Dataset(X, testfn_example1(X[:, 0]))
    xstar = np.linspace(0.0, 1.0, 50)[:, None]
    if n_deriv > 0:
        spec = DerivativeSpec((0,), (EXAMPLE1_DERIV_GRID[:n_deriv, None],), (1,))
    else:
        spec = DerivativeSpec.empty()
    return data, spec, xstar


def run_example1(cfg: ExperimentConfig | None = None, out_dir=None):
    """Fit the gap example both ways; report metrics, gap widths, and curves."""
    cfg = cfg if cfg is not None else ExperimentConfig()
    data, spec, xstar = example1_problem()
    t0 = time.time()
    fit = fit_models(data, spec, xstar, cfg)
    truth = testfn_example1(xstar[:, 0])
    m_unc = metrics(fit.unconstrained, truth)
    m_mono = metrics(fit.monotone, truth)
    gap = (xstar[:, 0] > 0.4) & (xstar[:, 0] < 0.9)
    interp_unc, interp_mono = fit.interpolation_errors()
    report = ExperimentReport(
        name="example1",
        methods={"unconstrained": _method_entry(m_unc),
                 "monotone": _method_entry(m_mono)},
        meta={"n_particles": cfg.n_particles, "tau_final": cfg.tau_final,
              "seed": cfg.seed, "schedule": cfg.schedule,
              "steps": len(fit.result.taus) - 1,
              "runtime_s": round(time.time() - t0, 2)},
        extras={
            "gap_width_unconstrained": float(np.mean(fit.unconstrained.width[gap])),
            "gap_width_monotone": float(np.mean(fit.monotone.width[gap])),
            "constraint_satisfaction": fit.constraint_satisfaction(),
            "interpolation_error_unconstrained": interp_unc,
            "interpolation_error_monotone": interp_mono,
        },
    )
    curves = {"unconstrained": fit.unconstrained, "monotone": fit.monotone}
    if out_dir is not None:
        out_dir = Path(out_dir)
        report.write(out_dir)
        for name, summ in curves.items():
            _write_curves(out_dir / f"example1_curves_{name}.csv", xstar, summ)
        (out_dir / "example1_trace.jsonl").write_text(
            "\n".join(fit.result.trace_lines()) + "\n")
    return report, curves, fit


# -- Example 2: two-dimensional polynomial -------------------------------------------

# 15-point Latin hypercube training design, frozen as a fixture
EXAMPLE2_TRAIN = lhd(15, 2, seed=152)
EXAMPLE2_PRED = np.array([[0.25, 0.25], [0.75, 0.25], [0.5, 0.5],
                          [0.25, 0.75], [0.75, 0.75]])
EXAMPLE2_PRED_LABELS = ("A", "B", "C", "D", "E")


def example2_problem():
    X = EXAMPLE2_TRAIN
    data = Dataset(X, testfn_example2(X[:, 0], X[:, 1]))
    xstar = EXAMPLE2_PRED
    spec = place_plus_shape(xstar, arm=0.1, per_arm=2)
    return data, spec, xstar


def run_example2(cfg: ExperimentConfig | None = None, out_dir=None):
    """Fit the 2-d example; track per-step posterior evolution at A-E."""
    cfg = cfg if cfg is not None else replace(ExperimentConfig(),
                                              standardize=True)
    data, spec, xstar = example2_problem()
    shift, scale = response_transform(data, cfg)
    steps = []

    def record(t, tau, ens):
        # everything converted to original response units as it is captured
        quantities = {
            "l1": ens.lengthscales[:, 0], "l2": ens.lengthscales[:, 1],
            "sigma2": ens.variances * scale**2,
        }
        for j, label in enumerate(EXAMPLE2_PRED_LABELS):
            quantities[label] = ens.ystar[:, j] * scale + shift
        stride = max(1, ens.n_particles // 200)
        row = {"t": t, "tau": tau}
        for name, vals in quantities.items():
            row[name] = {"mean": float(np.mean(vals)), "sd": float(np.std(vals)),
                         "sample": vals[::stride].copy()}
        steps.append(row)

    t0 = time.time()
    fit = fit_models(data, spec, xstar, cfg, step_callback=record)
    truth = testfn_example2(xstar[:, 0], xstar[:, 1])
    m_unc = metrics(fit.unconstrained, truth)
    m_mono = metrics(fit.monotone, truth)
    sd_first = {k: steps[0][k]["sd"] for k in EXAMPLE2_PRED_LABELS}
    sd_last = {k: steps[-1][k]["sd"] for k in EXAMPLE2_PRED_LABELS}
    report = ExperimentReport(
        name="example2",
        methods={"unconstrained": _method_entry(m_unc),
                 "monotone": _method_entry(m_mono)},
        meta={"n_particles": cfg.n_particles, "tau_final": cfg.tau_final,
              "seed": cfg.seed, "steps": len(fit.result.taus) - 1,
              "derivative_points": spec.total_points,
              "runtime_s": round(time.time() - t0, 2)},
        extras={"pred_sd_initial": sd_first, "pred_sd_final": sd_last,
                "constraint_satisfaction": fit.constraint_satisfaction()},
    )
    if out_dir is not None:
        out_dir = Path(out_dir)
        report.write(out_dir)
        rows = [("t", "tau", "name", "mean", "sd")]
        samples = [("t", "name", "value")]
        for row in steps:
            for name in ("l1", "l2", "sigma2", *EXAMPLE2_PRED_LABELS):
                rows.append((row["t"], row["tau"], name, row[name]["mean"],
                             row[name]["sd"]))
                samples.extend((row["t"], name, v)
                               for v in row[name]["sample"])
        _write_csv(out_dir / "example2_step_summaries.csv", rows)
        _write_csv(out_dir / "example2_step_samples.csv", samples)
        (out_dir / "example2_trace.jsonl").write_text(
            "\n".join(fit.result.trace_lines()) + "\n")
    return report, steps, fit


# -- simulation study ----------------------------------------------------------------


def run_simstudy(n_replicates: int = 30, cfg: ExperimentConfig | None = None,
                 out_dir=None):
    """Random monotone polynomials: fit both models per replicate, pool metrics.

    Per replicate: one shared-beta polynomial, a 25-point Latin hypercube
    split 20/5 into train/test, and a plus-shaped derivative set (40 points)
    around the test locations.  Failed replicates are logged and excluded.
    """
    cfg = cfg if cfg is not None else replace(
        ExperimentConfig(), n_particles=1000, standardize=True)
    results = {"unconstrained": {"rmse": [], "awoci": [], "cover": []},
               "monotone": {"rmse": [], "awoci": [], "cover": []}}
    failures = []
    t0 = time.time()
    for r in range(int(n_replicates)):
        rng = np.random.default_rng((cfg.seed, 7, r))
        poly_seed = int(rng.integers(2**31))
        fn, _ = random_polynomial(poly_seed)
        pts = lhd(25, 2, seed=int(rng.integers(2**31)))
        perm = rng.permutation(25)
        train, test = pts[perm[:20]], pts[perm[20:]]
        y_train = fn(train[:, 0], train[:, 1])
        truth = fn(test[:, 0], test[:, 1])
        spec = place_plus_shape(test, arm=0.1, per_arm=2)
        rep_cfg = replace(cfg, seed=cfg.seed * 1000 + r)
        try:
            fit = fit_models(Dataset(train, y_train), spec, test, rep_cfg)
        except (RuntimeError, ValueError) as err:
            failures.append({"replicate": r, "error": str(err)})
            continue
        for method, summ in (("unconstrained", fit.unconstrained),
                             ("monotone", fit.monotone)):
            m = metrics(summ, truth)
            results[method]["rmse"].append(m.rmse)
            results[method]["awoci"].append(m.awoci)
            results[method]["cover"].extend(m.cover.tolist())
    methods = {}
    for method, vals in results.items():
        cover = vals.pop("cover")
        coverage = float(np.mean(cover)) if cover else 0.0
        methods[method] = {"rmse": vals["rmse"], "awoci": vals["awoci"],
                           "coverage": coverage}
    report = ExperimentReport(
        name="simstudy",
        methods=methods,
        meta={"replicates": int(n_replicates), "failed": len(failures),
              "n_particles": cfg.n_particles, "seed": cfg.seed,
              "tau_final": cfg.tau_final,
              "runtime_s": round(time.time() - t0, 2)},
        extras={
            "median_rmse": {m: float(np.median(v["rmse"])) if v["rmse"] else None
                            for m, v in methods.items()},
            "median_awoci": {m: float(np.median(v["awoci"])) if v["awoci"] else None
                             for m, v in methods.items()},
            "failures": failures,
        },
    )
    if out_dir is not None:
        report.write(Path(out_dir))
    return report


# -- queuing-style demonstration ------------------------------------------------------

# 32 grid points on the open triangle x1 + x2 < 1 (the 32 smallest-sum points
# of the 8x8 lattice in row-major order), four steep-region prediction points,
# and four derivative locations along each axis near them
_QUEUE_LEVELS = (np.arange(8) + 0.5) / 9.0
_QUEUE_ALL = np.array([[a, b] for a in _QUEUE_LEVELS for b in _QUEUE_LEVELS])
QUEUE_TRAIN = _QUEUE_ALL[np.argsort(_QUEUE_ALL.sum(axis=1), kind="stable")[:32]]
QUEUE_PRED = np.array([[0.55, 0.30], [0.30, 0.55], [0.45, 0.45], [0.62, 0.25]])
QUEUE_DERIVS = (
    np.array([[0.40, 0.35], [0.50, 0.35], [0.60, 0.35], [0.70, 0.25]]),
    np.array([[0.35, 0.40], [0.35, 0.50], [0.35, 0.60], [0.25, 0.70]]),
)


def queue_problem(rho: float = 1.0, c: float = 1.0):
    data = Dataset(QUEUE_TRAIN, testfn_flat_steep(QUEUE_TRAIN[:, 0],
                                                  QUEUE_TRAIN[:, 1], rho, c))
    spec = DerivativeSpec((0, 1), QUEUE_DERIVS, (1, 1))
    return data, spec, QUEUE_PRED


def run_queue_demo(cfg: ExperimentConfig | None = None, out_dir=None):
    """Flat-then-steep surface standing in for the queuing simulator."""
    cfg = cfg if cfg is not None else replace(ExperimentConfig(),
                                              standardize=True)
    data, spec, xstar = queue_problem()
    t0 = time.time()
    fit = fit_models(data, spec, xstar, cfg)
    truth = testfn_flat_steep(xstar[:, 0], xstar[:, 1])
    m_unc = metrics(fit.unconstrained, truth)
    m_mono = metrics(fit.monotone, truth)
    report = ExperimentReport(
        name="queue_demo",
        methods={"unconstrained": _method_entry(m_unc),
                 "monotone": _method_entry(m_mono)},
        meta={"n_particles": cfg.n_particles, "seed": cfg.seed,
              "train_points": data.n,
              "derivative_points": spec.total_points,
              "runtime_s": round(time.time() - t0, 2)},
        extras={"constraint_satisfaction": fit.constraint_satisfaction()},
    )
    if out_dir is not None:
        out_dir = Path(out_dir)
        report.write(out_dir)
        _write_curves(out_dir / "queue_demo_curves_monotone.csv", xstar,
                      fit.monotone)
        _write_curves(out_dir / "queue_demo_curves_unconstrained.csv", xstar,
                      fit.unconstrained)
    return report, fit
