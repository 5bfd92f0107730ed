"""Monotone Gaussian-process emulation via sequentially constrained Monte Carlo.

A Matern-5/2 Gaussian process models a deterministic simulator; monotonicity
in chosen inputs is encoded by probit-linked sign information on latent
partial derivatives at a derivative input set.  A sequential Monte Carlo
sampler anneals the constraint strictness from the unconstrained posterior to
the (effectively) hard-constrained one, giving full Bayesian inference for
the hyperparameters, predictions, and derivative values jointly.
"""

from .constraint import TauSchedule, default_schedule, log_probit
from .design import (
    PlacementPlan,
    lhd,
    place_gap_grid,
    place_plus_shape,
    prob_negative_derivative,
)
from .gp import (
    Dataset,
    DerivativeSpec,
    FactorizationError,
    GPState,
    JitterPolicy,
    JointLayout,
    PriorConfig,
    assemble_joint_cov,
    conditional_draws_at,
    gp_conditional,
    log_mvn,
    log_prior,
    log_target,
)
from .kernel import (
    KernelParams,
    cov_dd,
    cov_fd,
    cov_ff,
    matern52,
    matern52_d1,
    matern52_d2,
)
from .scmc import (
    AdaptiveSchedule,
    DegenerateEnsembleError,
    Ensemble,
    MoveConfig,
    Particle,
    PosteriorSummary,
    SCMCResult,
    adapt_schedule,
    adapt_steps,
    ess,
    mcmc_init,
    move,
    resample,
    reweight,
    scmc_run,
    summarize,
)

__version__ = "0.1.0"

__all__ = [
    "AdaptiveSchedule", "Dataset", "DegenerateEnsembleError", "DerivativeSpec",
    "Ensemble", "FactorizationError", "GPState", "JitterPolicy", "JointLayout",
    "KernelParams", "MoveConfig", "Particle", "PlacementPlan",
    "PosteriorSummary", "PriorConfig", "SCMCResult", "TauSchedule",
    "adapt_schedule", "adapt_steps", "assemble_joint_cov",
    "conditional_draws_at", "cov_dd", "cov_fd", "cov_ff", "default_schedule",
    "ess", "gp_conditional", "lhd", "log_mvn", "log_prior", "log_probit",
    "log_target", "matern52", "matern52_d1", "matern52_d2", "mcmc_init",
    "move", "place_gap_grid", "place_plus_shape", "prob_negative_derivative",
    "resample", "reweight", "scmc_run", "summarize",
]
