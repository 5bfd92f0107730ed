"""Sequentially constrained Monte Carlo over a constraint-strictness ladder.

Particles carry the full joint state (lengthscales, variance, predictions,
signed derivative values).  The sampler starts from the unconstrained
posterior (an MCMC sample with an exact Gaussian draw of the field given the
hyperparameters), then alternates reweighting by the probit-constraint ratio,
resampling, and Metropolis moves that leave the current tempered posterior
invariant.  Because the move kernels are invariant for the current rung, the
incremental weights reduce to the ratio of consecutive probit terms.

Randomness is organized as counter-based streams derived from
(seed, stage, step, particle index), so results are bit-identical regardless
of how particles are scheduled across workers.
"""

from __future__ import annotations

import math
import multiprocessing
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np
from scipy.special import logsumexp

from .constraint import TauSchedule, log_probit_rows
from .gp import (
    Dataset,
    DerivativeSpec,
    FactorizationError,
    GPState,
    JitterPolicy,
    PriorConfig,
    _chi2_logpdf,
)

_STREAM_INIT = 0
_STREAM_RESAMPLE = 1
_STREAM_MOVE = 2
_STREAM_CALIB = 3


class DegenerateEnsembleError(RuntimeError):
    """Every particle weight vanished during reweighting."""


def _stream(seed: int, *key: int) -> np.random.Generator:
    """Deterministic generator for a (seed, stage, step, particle) address."""
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=key))


def metropolis_accept(rng: np.random.Generator, log_ratio: float) -> bool:
    """Accept/reject with log acceptance ratio; -inf always rejects."""
    if log_ratio == -math.inf or math.isnan(log_ratio):
        rng.uniform()
        return False
    return math.log(rng.uniform()) < log_ratio


# -- particle containers ---------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Particle:
    """One joint sampler state."""

    lengthscales: np.ndarray
    variance: float
    ystar: np.ndarray
    yprime: np.ndarray

    @property
    def field(self) -> np.ndarray:
        return np.concatenate([self.ystar, self.yprime])


@dataclass(frozen=True, eq=False)
class Ensemble:
    """Weighted particle collection stored column-wise.

    ``logweights`` are kept normalized (logsumexp equals 0).  ``t_index`` is
    the schedule position, and together with ``seed`` it determines every
    random stream, so (seed, t_index) is the full RNG position.
    """

    lengthscales: np.ndarray      # (N, d)
    variances: np.ndarray         # (N,)
    ystar: np.ndarray             # (N, s)
    yprime: np.ndarray            # (N, p)
    logweights: np.ndarray        # (N,)
    t_index: int = 0
    seed: int = 0
    accept_stats: dict = field(default_factory=dict)

    def __post_init__(self):
        n = self.lengthscales.shape[0]
        if n < 2:
            raise ValueError("an ensemble needs at least two particles")
        for name in ("variances", "ystar", "yprime", "logweights"):
            if getattr(self, name).shape[0] != n:
                raise ValueError(f"{name} length mismatch")
        total = logsumexp(self.logweights)
        if not math.isfinite(total):
            raise DegenerateEnsembleError("ensemble weights are degenerate")
        if abs(total) > 1e-9:
            raise ValueError("logweights must be normalized")

    @property
    def n_particles(self) -> int:
        return self.lengthscales.shape[0]

    @property
    def weights(self) -> np.ndarray:
        return np.exp(self.logweights)

    def particle(self, i: int) -> Particle:
        return Particle(self.lengthscales[i].copy(), float(self.variances[i]),
                        self.ystar[i].copy(), self.yprime[i].copy())


@dataclass(frozen=True, eq=False)
class MoveConfig:
    """Proposal scales and adaptation policy for the Metropolis moves.

    ``field_proposal`` selects the correlation that shapes the joint
    (y*, y') random-walk step: "conditional" (default) uses the conditional
    correlation of the targets given the data, which matches the target's
    near-degenerate geometry on dense prediction grids; "prior" uses the
    prior target correlation, whose acceptance collapses to zero on such
    grids at any scale.
    """

    rw_scale: np.ndarray          # lengthscale random-walk scale per dimension
    q_t: float = 0.1              # field proposal scale
    accept_low: float = 0.15
    accept_high: float = 0.5
    adapt_factor: float = 1.5
    hastings_sigma2: bool = True  # include the chi-squared proposal correction
    field_proposal: str = "conditional"

    def __post_init__(self):
        rw = np.atleast_1d(np.asarray(self.rw_scale, dtype=float))
        if np.any(rw <= 0) or self.q_t <= 0:
            raise ValueError("proposal scales must be positive")
        if self.field_proposal not in ("conditional", "prior"):
            raise ValueError("field_proposal must be 'conditional' or 'prior'")
        object.__setattr__(self, "rw_scale", rw)

    @classmethod
    def default(cls, ndim: int, rw: float = 0.25, q_t: float = 0.1,
                hastings_sigma2: bool = True,
                field_proposal: str = "conditional") -> "MoveConfig":
        return cls(np.full(ndim, rw), q_t, hastings_sigma2=hastings_sigma2,
                   field_proposal=field_proposal)


@dataclass(frozen=True)
class AdaptiveSchedule:
    """Choose each next tau by bisection so the reweighting keeps ESS high.

    ``max_growth`` caps the per-step multiplicative increase of tau once it
    is positive; without it the ladder can clear several decades in one jump,
    which starves the proposal-scale adaptation of rounds.
    """

    tau_final: float = 1e6
    ess_floor: float = 0.5        # fraction of the particle count
    max_steps: int = 80
    max_growth: float = 30.0


@dataclass
class StepRecord:
    """One trace row: schedule position, degeneracy, and move diagnostics."""

    t: int
    tau: float
    ess: float
    resampled: bool
    accept: dict
    rw_scale: tuple
    q_t: float
    failures: int

    def to_dict(self) -> dict:
        return {
            "t": self.t, "tau": self.tau, "ess": self.ess,
            "resampled": self.resampled, "accept": dict(self.accept),
            "rw_scale": list(self.rw_scale), "q_t": self.q_t,
            "failures": self.failures,
        }


@dataclass
class SCMCResult:
    ensemble: Ensemble
    trace: list
    taus: tuple

    def trace_lines(self) -> list:
        import json

        return [json.dumps(rec.to_dict()) for rec in self.trace]


@dataclass(frozen=True)
class PosteriorSummary:
    """Per-prediction-point posterior mean, quantiles, and interval widths."""

    mean: np.ndarray
    q025: np.ndarray
    q500: np.ndarray
    q975: np.ndarray

    @property
    def width(self) -> np.ndarray:
        return self.q975 - self.q025


# -- initialization ---------------------------------------------------------------


def _hyper_sweep(state: GPState, rng, l, s2, lh, rw_scale, hastings: bool):
    """One Metropolis-within-Gibbs sweep over the hyperparameters.

    Returns updated (l, s2, lh, accepted_l, accepted_s2); ``lh`` is the log
    posterior of the hyperparameters alone.
    """
    acc_l = acc_s = False
    l_new = l + rw_scale * rng.standard_normal(l.size)
    lh_new = state.log_hyper(l_new, s2)
    if metropolis_accept(rng, lh_new - lh):
        l, lh, acc_l = l_new, lh_new, True
    s2_new = float(rng.chisquare(s2))
    if s2_new > 0.0 and math.isfinite(s2_new):
        lh_new = state.log_hyper(l, s2_new)
        log_ratio = lh_new - lh
        if hastings and lh_new > -math.inf:
            log_ratio += float(_chi2_logpdf(s2, s2_new) - _chi2_logpdf(s2_new, s2))
        if metropolis_accept(rng, log_ratio):
            s2, lh, acc_s = s2_new, lh_new, True
    return l, s2, lh, acc_l, acc_s


def mcmc_init(data: Dataset, spec: DerivativeSpec, xstar, priors=PriorConfig(),
              n_particles: int = 2000, burnin: int = 2000, thin: int = 5,
              seed: int = 0, cfg: MoveConfig | None = None,
              state: GPState | None = None, fixed_params=None,
              max_failure_rate: float = 0.1,
              jitter: JitterPolicy = JitterPolicy()) -> Ensemble:
    """Sample the unconstrained posterior by MCMC with exact field draws.

    The hyperparameters move by Metropolis-within-Gibbs against the marginal
    posterior of (lengthscales, variance); at each recorded state the field
    (y*, y') is drawn exactly from its Gaussian conditional, which is a
    perfect Gibbs step.  Weights start uniform.  With ``fixed_params`` the
    hyperparameters stay at the given (lengthscales, variance).
    """
    if n_particles < 2:
        raise ValueError("need at least two particles")
    if state is None:
        state = GPState(data, spec, xstar, priors, jitter=jitter)
    d = data.ndim
    cfg = cfg if cfg is not None else MoveConfig.default(d)
    rng = _stream(seed, _STREAM_INIT)
    failures0 = state.failures
    evals = 0

    if fixed_params is not None:
        l = np.atleast_1d(np.asarray(fixed_params[0], dtype=float)).copy()
        s2 = float(fixed_params[1])
    else:
        span = np.maximum(data.X.max(axis=0) - data.X.min(axis=0), 1e-3)
        l = 0.5 * span
        var_y = float(np.var(data.y))
        s2 = var_y if var_y > 0 else 1.0
    lh = state.log_hyper(l, s2)
    if not math.isfinite(lh):
        raise RuntimeError(
            "initial hyperparameter state has zero posterior density; "
            f"lengthscales={l}, variance={s2}")

    n_l = s_l = n_s = s_s = 0  # proposal/acceptance counters per move type
    rw = cfg.rw_scale.copy()
    s = state.layout.n_pred
    N = n_particles
    out_l = np.empty((N, d))
    out_s2 = np.empty(N)
    out_field = np.empty((N, state.n_targets))
    recorded = 0
    total = burnin + N * thin
    for it in range(total):
        if fixed_params is None:
            l, s2, lh, al, as_ = _hyper_sweep(state, rng, l, s2, lh, rw,
                                              cfg.hastings_sigma2)
            evals += 2
            n_l += 1
            n_s += 1
            s_l += al
            s_s += as_
            if it < burnin and (it + 1) % 100 == 0:
                rate = s_l / n_l
                if rate < cfg.accept_low:
                    rw /= cfg.adapt_factor
                elif rate > cfg.accept_high:
                    rw *= cfg.adapt_factor
                n_l = s_l = 0
        if it >= burnin and (it - burnin) % thin == 0:
            out_l[recorded] = l
            out_s2[recorded] = s2
            out_field[recorded] = state.draw_field(l, s2, rng)
            recorded += 1
    fail_rate = (state.failures - failures0) / max(evals, 1)
    if fail_rate > max_failure_rate:
        raise RuntimeError(
            f"factorization failure rate {fail_rate:.1%} exceeded "
            f"{max_failure_rate:.0%} during initialization "
            f"({state.failures - failures0} of {evals} evaluations)")
    return Ensemble(out_l, out_s2, out_field[:, :s], out_field[:, s:],
                    np.full(N, -math.log(N)), t_index=0, seed=seed)


# -- weighting / resampling --------------------------------------------------------


def reweight(ens: Ensemble, tau_prev: float, tau_next: float) -> Ensemble:
    """Multiply weights by the probit-constraint ratio between two rungs."""
    if tau_next < tau_prev:
        raise ValueError("tau must not decrease")
    delta = (log_probit_rows(ens.yprime, tau_next)
             - log_probit_rows(ens.yprime, tau_prev))
    logw = ens.logweights + delta
    total = logsumexp(logw)
    if not math.isfinite(total):
        raise DegenerateEnsembleError(
            f"all particle weights vanished moving tau {tau_prev} -> {tau_next}")
    return replace(ens, logweights=logw - total)


def ess(ens: Ensemble) -> float:
    """Effective sample size 1 / sum(W_i^2) of the normalized weights."""
    return float(np.exp(-logsumexp(2.0 * ens.logweights)))


def resample(ens: Ensemble, seed=0) -> Ensemble:
    """Systematic resampling; weights reset to uniform.

    Copy counts are always floor(N W_i) or ceil(N W_i), and uniform weights
    reproduce every particle exactly once.
    """
    rng = seed if isinstance(seed, np.random.Generator) else _stream(int(seed), _STREAM_RESAMPLE)
    N = ens.n_particles
    w = ens.weights
    positions = (np.arange(N) + rng.uniform()) / N
    cum = np.cumsum(w)
    cum[-1] = 1.0
    idx = np.minimum(np.searchsorted(cum, positions, side="right"), N - 1)
    return replace(
        ens,
        lengthscales=ens.lengthscales[idx].copy(),
        variances=ens.variances[idx].copy(),
        ystar=ens.ystar[idx].copy(),
        yprime=ens.yprime[idx].copy(),
        logweights=np.full(N, -math.log(N)),
    )


# -- move kernel --------------------------------------------------------------------


def _advance_particle(state: GPState, rng, l, s2, fld, tau, cfg: MoveConfig,
                      n_mh: int, fixed_params):
    """n_mh Metropolis sweeps targeting the tau-tempered posterior."""
    lt = state.log_target(l, s2, fld, tau)
    prop = np.zeros(3, dtype=int)
    acc = np.zeros(3, dtype=int)
    for _ in range(n_mh):
        if fixed_params is None:
            l_new = l + cfg.rw_scale * rng.standard_normal(l.size)
            prop[0] += 1
            lt_new = state.log_target(l_new, s2, fld, tau)
            if metropolis_accept(rng, lt_new - lt):
                l, lt = l_new, lt_new
                acc[0] += 1
            s2_new = float(rng.chisquare(s2))
            prop[1] += 1
            if s2_new > 0.0 and math.isfinite(s2_new):
                lt_new = state.log_target(l, s2_new, fld, tau)
                log_ratio = lt_new - lt
                if cfg.hastings_sigma2 and lt_new > -math.inf:
                    log_ratio += float(_chi2_logpdf(s2, s2_new)
                                       - _chi2_logpdf(s2_new, s2))
                if metropolis_accept(rng, log_ratio):
                    s2, lt = s2_new, lt_new
                    acc[1] += 1
        if state.n_targets:
            prop[2] += 1
            try:
                step = _field_step(state, l, s2, cfg, rng)
            except FactorizationError:
                continue
            fld_new = fld + step
            lt_new = state.log_target(l, s2, fld_new, tau)
            if metropolis_accept(rng, lt_new - lt):
                fld, lt = fld_new, lt_new
                acc[2] += 1
    return l, s2, fld, prop, acc


def _field_step(state: GPState, l, s2, cfg: MoveConfig, rng) -> np.ndarray:
    if cfg.field_proposal == "conditional":
        return state.conditional_field_step(l, s2, cfg.q_t, rng)
    return state.prior_field_step(l, cfg.q_t, rng)


def _move_indices(state: GPState, ens: Ensemble, indices, tau, cfg, n_mh,
                  seed, t_index, fixed_params):
    d = ens.lengthscales.shape[1]
    out_l = np.empty((len(indices), d))
    out_s2 = np.empty(len(indices))
    out_field = np.empty((len(indices), state.n_targets))
    prop = np.zeros(3, dtype=int)
    acc = np.zeros(3, dtype=int)
    s = state.layout.n_pred
    for row, i in enumerate(indices):
        rng = _stream(seed, _STREAM_MOVE, t_index, int(i))
        fld = np.concatenate([ens.ystar[i], ens.yprime[i]])
        l, s2, fld, p, a = _advance_particle(
            state, rng, ens.lengthscales[i].copy(), float(ens.variances[i]),
            fld, tau, cfg, n_mh, fixed_params)
        out_l[row] = l
        out_s2[row] = s2
        out_field[row] = fld
        prop += p
        acc += a
    return out_l, out_s2, out_field[:, :s], out_field[:, s:], prop, acc


def _move_chunk(payload):
    (X, y, spec_dims, spec_locs, spec_dirs, xstar, priors, jitter, ens, indices,
     tau, cfg, n_mh, seed, t_index, fixed_params) = payload
    spec = DerivativeSpec(spec_dims, spec_locs, spec_dirs)
    state = GPState(Dataset(X, y), spec, xstar, priors, jitter=jitter)
    return _move_indices(state, ens, indices, tau, cfg, n_mh, seed, t_index,
                         fixed_params)


def move(ens: Ensemble, tau: float, data: Dataset | None = None,
         spec: DerivativeSpec | None = None, xstar=None,
         priors: PriorConfig = PriorConfig(), cfg: MoveConfig | None = None,
         n_mh: int = 5, seed: int = 0, state: GPState | None = None,
         t_index: int | None = None, workers: int = 1,
         fixed_params=None, jitter: JitterPolicy = JitterPolicy()) -> Ensemble:
    """Advance every particle by ``n_mh`` Metropolis sweeps targeting pi_tau.

    Lengthscale and field proposals are symmetric (plain Metropolis ratio);
    the chi-squared variance proposal is asymmetric and carries the proposal
    density correction unless ``cfg.hastings_sigma2`` is off.  Weights are
    untouched.  Particles are independent work items; with ``workers > 1``
    they are processed in forked worker processes, and results are identical
    to the sequential path because every particle owns its random stream.
    """
    if state is None:
        if data is None or spec is None:
            raise ValueError("move needs either a GPState or (data, spec, xstar)")
        state = GPState(data, spec, xstar, priors, jitter=jitter)
    cfg = cfg if cfg is not None else MoveConfig.default(ens.lengthscales.shape[1])
    t_index = ens.t_index if t_index is None else t_index
    N = ens.n_particles
    if workers > 1:
        chunks = np.array_split(np.arange(N), workers)
        payloads = [
            (state.data.X, state.data.y, state.spec.dims, state.spec.locations,
             state.spec.directions, state.xstar, state.priors, state.jitter,
             ens, chunk, tau, cfg, n_mh, seed, t_index, fixed_params)
            for chunk in chunks if len(chunk)
        ]
        try:
            ctx = multiprocessing.get_context("fork")
        except ValueError:  # pragma: no cover
            ctx = multiprocessing.get_context()
        with ProcessPoolExecutor(max_workers=workers, mp_context=ctx) as pool:
            results = list(pool.map(_move_chunk, payloads))
        out_l = np.vstack([r[0] for r in results])
        out_s2 = np.concatenate([r[1] for r in results])
        out_ystar = np.vstack([r[2] for r in results])
        out_yprime = np.vstack([r[3] for r in results])
        prop = sum(r[4] for r in results)
        acc = sum(r[5] for r in results)
    else:
        out_l, out_s2, out_ystar, out_yprime, prop, acc = _move_indices(
            state, ens, np.arange(N), tau, cfg, n_mh, seed, t_index, fixed_params)
    rates = {
        name: (acc[j] / prop[j] if prop[j] else None)
        for j, name in enumerate(("lengthscale", "variance", "field"))
    }
    return replace(ens, lengthscales=out_l, variances=out_s2, ystar=out_ystar,
                   yprime=out_yprime, t_index=t_index, accept_stats=rates)


def calibrate_field_scale(state: GPState, ens: Ensemble, cfg: MoveConfig,
                          seed: int = 0, n_probe: int = 128,
                          max_rounds: int = 30) -> float:
    """Pilot-tune the field proposal scale at tau = 0.

    The initialization draws the field exactly, so the ladder would otherwise
    start with an untuned ``q_t``; with many tightly spaced prediction points
    the conditional target is orders of magnitude tighter than the prior
    correlation and an untuned scale accepts nothing.  Probes Metropolis
    sweeps on particle copies (the ensemble is never modified) and applies
    the usual banded adjustment until the acceptance rate lands in band.
    """
    q = cfg.q_t
    idx = range(min(n_probe, ens.n_particles))
    for rnd in range(max_rounds):
        accepted = proposed = 0
        for i in idx:
            rng = _stream(seed, _STREAM_CALIB, rnd, int(i))
            l = ens.lengthscales[i]
            s2 = float(ens.variances[i])
            fld = np.concatenate([ens.ystar[i], ens.yprime[i]])
            lt = state.log_target(l, s2, fld, 0.0)
            try:
                step = _field_step(state, l, s2, replace(cfg, q_t=q), rng)
            except FactorizationError:
                continue
            lt_new = state.log_target(l, s2, fld + step, 0.0)
            proposed += 1
            accepted += metropolis_accept(rng, lt_new - lt)
        rate = accepted / max(proposed, 1)
        if rate < cfg.accept_low:
            q /= cfg.adapt_factor
        elif rate > cfg.accept_high:
            q *= cfg.adapt_factor
        else:
            break
    return q


def adapt_steps(cfg: MoveConfig, stats: dict) -> MoveConfig:
    """Rescale proposal steps to keep acceptance inside the target band."""

    def adjusted(scale, rate):
        if rate is None:
            return scale
        if rate < cfg.accept_low:
            return scale / cfg.adapt_factor
        if rate > cfg.accept_high:
            return scale * cfg.adapt_factor
        return scale

    return replace(cfg,
                   rw_scale=adjusted(cfg.rw_scale, stats.get("lengthscale")),
                   q_t=adjusted(cfg.q_t, stats.get("field")))


def adapt_schedule(ens: Ensemble, tau_current: float, tau_target: float,
                   ess_floor: float) -> float:
    """Largest tau in (tau_current, tau_target] keeping hypothetical ESS >= floor.

    Pure: evaluates reweightings without mutating the ensemble.  When even
    infinitesimal increments drop the ESS below the floor, returns a minimal
    increment and warns.
    """
    if not tau_current < tau_target:
        raise ValueError("tau_current must be below tau_target")
    if ens.yprime.shape[1] == 0:
        return tau_target
    base = log_probit_rows(ens.yprime, tau_current)
    logw0 = ens.logweights
    floor = ess_floor * (1.0 - 1e-9)  # roundoff slack for the floor-at-N boundary

    def ess_at(tau):
        logw = logw0 + log_probit_rows(ens.yprime, tau) - base
        total = logsumexp(logw)
        if not math.isfinite(total):
            return 0.0
        return float(np.exp(-logsumexp(2.0 * (logw - total))))

    if ess_at(tau_target) >= floor:
        return tau_target
    lo, hi = tau_current, tau_target
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if ess_at(mid) >= floor:
            lo = mid
        else:
            hi = mid
    if lo <= tau_current:
        warnings.warn("no tau increment keeps the ESS above the floor; "
                      "taking a minimal step")
        return tau_current * (1 + 1e-6) if tau_current > 0 else tau_target * 1e-12
    return lo


# -- full run -----------------------------------------------------------------------


def scmc_run(data: Dataset, spec: DerivativeSpec, xstar,
             priors: PriorConfig = PriorConfig(),
             schedule: TauSchedule | AdaptiveSchedule | None = None,
             n_particles: int = 2000, cfg: MoveConfig | None = None,
             seed: int = 0, n_mh: int = 5, burnin: int = 2000, thin: int = 5,
             resample_policy: str = "always", ess_threshold: float = 0.5,
             workers: int = 1, fixed_params=None,
             jitter: JitterPolicy = JitterPolicy(),
             init_ensemble: Ensemble | None = None,
             state: GPState | None = None,
             step_callback: Callable | None = None) -> SCMCResult:
    """Initialize from the unconstrained posterior, then anneal to the target.

    Each step reweights by the incremental probit ratio, resamples (always,
    or when the ESS falls below ``ess_threshold * N`` with
    ``resample_policy="ess"``), moves every particle with ``n_mh`` Metropolis
    sweeps, and adapts the proposal scales from the recorded acceptance
    rates.  With no derivative points the schedule is vacuous and the
    initialization sample is returned unchanged.
    """
    if resample_policy not in ("always", "ess"):
        raise ValueError("resample_policy must be 'always' or 'ess'")
    if state is None:
        state = GPState(data, spec, xstar, priors, jitter=jitter)
    if schedule is None:
        schedule = AdaptiveSchedule()
    cfg = cfg if cfg is not None else MoveConfig.default(data.ndim)
    ens = init_ensemble if init_ensemble is not None else mcmc_init(
        data, spec, xstar, priors, n_particles, burnin=burnin, thin=thin,
        seed=seed, cfg=cfg, state=state, fixed_params=fixed_params,
        jitter=jitter)
    N = ens.n_particles
    taus = [0.0]
    if spec.total_points == 0:
        trace = [StepRecord(0, 0.0, ess(ens), False, {}, tuple(cfg.rw_scale),
                            cfg.q_t, state.failures)]
        if step_callback is not None:
            step_callback(0, 0.0, ens)
        return SCMCResult(ens, trace, (0.0,))
    if state.n_targets:
        cfg = replace(cfg, q_t=calibrate_field_scale(state, ens, cfg, seed=seed))
    trace = [StepRecord(0, 0.0, ess(ens), False, {}, tuple(cfg.rw_scale),
                        cfg.q_t, state.failures)]
    if step_callback is not None:
        step_callback(0, 0.0, ens)

    adaptive = isinstance(schedule, AdaptiveSchedule)
    tau_final = schedule.tau_final if adaptive else schedule.final
    max_steps = schedule.max_steps if adaptive else schedule.n_steps
    tau = 0.0
    t = 0
    while tau < tau_final:
        t += 1
        if adaptive:
            if t >= max_steps:
                tau_next = tau_final  # step budget exhausted: force the target
            else:
                cap = tau_final if tau == 0.0 else min(tau_final,
                                                       tau * schedule.max_growth)
                tau_next = adapt_schedule(ens, tau, cap, schedule.ess_floor * N)
        else:
            tau_next = schedule.values[t]
        ens = reweight(ens, tau, tau_next)
        ess_before = ess(ens)
        do_resample = resample_policy == "always" or ess_before < ess_threshold * N
        if do_resample:
            ens = resample(ens, _stream(ens.seed, _STREAM_RESAMPLE, t))
        ens = move(ens, tau_next, cfg=cfg, n_mh=n_mh, seed=ens.seed,
                   state=state, t_index=t, workers=workers,
                   fixed_params=fixed_params)
        cfg = adapt_steps(cfg, ens.accept_stats)
        trace.append(StepRecord(t, tau_next, ess_before, do_resample,
                                dict(ens.accept_stats), tuple(cfg.rw_scale),
                                cfg.q_t, state.failures))
        taus.append(tau_next)
        tau = tau_next
        if step_callback is not None:
            step_callback(t, tau, ens)
    return SCMCResult(ens, trace, tuple(taus))


# -- summaries ----------------------------------------------------------------------


def _weighted_quantile(values: np.ndarray, q, weights: np.ndarray) -> np.ndarray:
    order = np.argsort(values)
    v = values[order]
    w = weights[order]
    cum = np.cumsum(w) - 0.5 * w
    cum /= np.sum(w)
    return np.interp(q, cum, v)


def summarize(ens: Ensemble) -> PosteriorSummary:
    """Posterior mean and 2.5/50/97.5 percent sample quantiles per prediction point."""
    w = ens.weights
    uniform = np.allclose(w, 1.0 / ens.n_particles, rtol=0, atol=1e-12)
    s = ens.ystar.shape[1]
    qs = (0.025, 0.5, 0.975)
    mean = np.empty(s)
    quants = np.empty((3, s))
    for j in range(s):
        col = ens.ystar[:, j]
        if uniform:
            mean[j] = np.mean(col)
            quants[:, j] = np.quantile(col, qs)
        else:
            mean[j] = np.sum(w * col)
            quants[:, j] = _weighted_quantile(col, qs, w)
    return PosteriorSummary(mean, quants[0], quants[1], quants[2])
