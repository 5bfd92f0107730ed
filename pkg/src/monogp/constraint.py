"""Probit link for derivative-sign information and constraint-strictness schedules.

Each constrained derivative value y' contributes a factor Phi(tau * y') to
the posterior.  tau = 0 leaves the sign unconstrained (every factor is 1/2);
tau -> infinity turns the link into the indicator of a positive derivative.
An increasing tau schedule is what the sequential sampler anneals over.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import log_ndtr


def log_probit(yprime, tau: float) -> float:
    """Sum of log Phi(tau * y') over the constrained derivative values.

    Uses the asymptotically stable log-CDF, so strongly negative arguments
    give large finite negative values instead of underflowing to -inf.
    An empty input contributes 0.
    """
    tau = float(tau)
    if tau < 0.0 or not np.isfinite(tau):
        raise ValueError("tau must be finite and nonnegative")
    yprime = np.asarray(yprime, dtype=float)
    if yprime.size == 0:
        return 0.0
    return float(np.sum(log_ndtr(tau * yprime)))


def log_probit_rows(yprime: np.ndarray, tau: float) -> np.ndarray:
    """Row-wise `log_probit` over an (N, p) array of derivative values."""
    if yprime.shape[1] == 0:
        return np.zeros(yprime.shape[0])
    return np.sum(log_ndtr(float(tau) * yprime), axis=1)


@dataclass(frozen=True)
class TauSchedule:
    """Strictly increasing constraint schedule starting at tau_0 = 0."""

    values: tuple

    def __post_init__(self):
        vals = tuple(float(v) for v in self.values)
        if len(vals) < 2 or vals[0] != 0.0:
            raise ValueError("schedule must start at tau_0 = 0 and have steps")
        if not all(np.isfinite(vals)):
            raise ValueError("schedule values must be finite")
        if any(b <= a for a, b in zip(vals, vals[1:])):
            raise ValueError("schedule must be strictly increasing")
        object.__setattr__(self, "values", vals)

    @property
    def final(self) -> float:
        return self.values[-1]

    @property
    def n_steps(self) -> int:
        return len(self.values) - 1


def default_schedule(tau_final: float, n_steps: int) -> TauSchedule:
    """tau_0 = 0 followed by a geometric ladder ending exactly at ``tau_final``.

    The first positive value is 1e-3 * tau_final, so the ladder spans three
    decades over ``n_steps`` rungs.
    """
    tau_final = float(tau_final)
    if not np.isfinite(tau_final) or tau_final <= 0:
        raise ValueError("tau_final must be positive and finite")
    n_steps = int(n_steps)
    if n_steps < 2:
        raise ValueError("need at least two schedule steps")
    ratio = 1e-3 ** (1.0 / (n_steps - 1))
    ladder = [tau_final * ratio ** (n_steps - t) for t in range(1, n_steps)]
    return TauSchedule((0.0, *ladder, tau_final))
