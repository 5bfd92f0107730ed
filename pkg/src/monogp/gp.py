"""Joint Gaussian models over simulator values, predictions, and derivatives.

The joint field stacks three kinds of blocks: observed values ``y`` at the
design ``X``, predicted values ``y*`` at ``X*``, and latent partial
derivatives ``y'_k`` at per-dimension derivative input sets.  All covariances
come from the product Matern-5/2 kernel and its derivative factors
(`monogp.kernel`); a decreasing monotone direction is handled by modeling the
negated derivative, which flips the sign of that block's cross covariances.

Everything here is correlation-scaled internally: the covariance is
``variance * C`` where ``C`` depends only on the lengthscales, so the
conditional mean of the targets given the data is variance-free and the
variance enters every log density in closed form.  `GPState` caches the
correlation-level factorizations keyed by the lengthscales; this is what
makes repeated posterior evaluations (Metropolis sweeps over variance and
field values at fixed lengthscales) cheap.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.linalg import cho_solve, cholesky, solve_triangular
from scipy.special import gammaln

from .constraint import log_probit
from .kernel import SQRT5, KernelParams, correlation_block

LOG_2PI = math.log(2.0 * math.pi)


class FactorizationError(RuntimeError):
    """A covariance matrix failed to factorize at the maximum jitter level."""


@dataclass(frozen=True)
class JitterPolicy:
    """Escalating diagonal inflation for Cholesky factorizations.

    Levels are ``start * scale``, escalating by ``factor`` up to
    ``stop * scale``; ``scale`` is the process variance when factorizations
    are done at covariance scale, or 1 at correlation scale.
    """

    start: float = 1e-10
    stop: float = 1e-4
    factor: float = 10.0

    def levels(self, scale: float = 1.0):
        jit = self.start * scale
        top = self.stop * scale
        while True:
            yield jit
            if jit >= top:
                return
            jit = min(jit * self.factor, top)


def jittered_cholesky(mat: np.ndarray, policy: JitterPolicy = JitterPolicy(),
                      scale: float = 1.0):
    """Lower Cholesky factor of ``mat + jitter*I`` with escalating jitter.

    Returns ``(L, jitter)`` with the jitter actually added.  Raises
    `FactorizationError` when even the largest jitter level fails.
    """
    mat = np.asarray(mat, dtype=float)
    n = mat.shape[0]
    last_err = None
    for jit in policy.levels(scale):
        jittered = mat.copy()
        jittered.flat[:: n + 1] += jit
        try:
            L = cholesky(jittered, lower=True, check_finite=False)
            return L, jit
        except np.linalg.LinAlgError as err:
            last_err = err
    raise FactorizationError(
        f"Cholesky failed for {n}x{n} matrix at max jitter "
        f"{policy.stop * scale:.3e} (diag range [{mat.diagonal().min():.3e}, "
        f"{mat.diagonal().max():.3e}]): {last_err}")


# -- domain types --------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Dataset:
    """Simulator design matrix and outputs.

    Duplicate design rows are rejected: they make the covariance singular
    beyond what jitter can repair.
    """

    X: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        X = np.asarray(self.X, dtype=float)
        if X.ndim == 1:
            X = X[:, None]
        y = np.asarray(self.y, dtype=float).ravel()
        if X.ndim != 2 or X.shape[0] < 1:
            raise ValueError("X must be a nonempty n x d matrix")
        if y.shape != (X.shape[0],):
            raise ValueError(
                f"y has length {y.size}, expected {X.shape[0]}")
        if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y))):
            raise ValueError("design and response must be finite")
        _, inverse, counts = np.unique(X, axis=0, return_inverse=True,
                                       return_counts=True)
        if np.any(counts > 1):
            dup_rows = np.where(counts[inverse] > 1)[0].tolist()
            raise ValueError(f"duplicated design rows at indices {dup_rows}")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def ndim(self) -> int:
        return self.X.shape[1]


@dataclass(frozen=True, eq=False)
class DerivativeSpec:
    """Where derivative-sign information is imposed, and with which sign.

    One block per monotone input dimension: ``locations[i]`` is a
    ``(p_i, d)`` matrix of points whose dimension-``dims[i]`` derivative is
    constrained, with ``directions[i]`` equal to +1 (increasing) or -1
    (decreasing).  A decreasing dimension is modeled through the negated
    derivative: particle blocks hold ``direction * dy/dx_k``, the joint
    covariance flips the sign of that block's cross covariances, and the
    probit link always constrains the stored value to be positive.
    """

    dims: tuple = ()
    locations: tuple = ()
    directions: tuple = ()

    def __post_init__(self):
        dims = tuple(int(k) for k in self.dims)
        dirs = tuple(int(s) for s in self.directions)
        locs = tuple(np.atleast_2d(np.asarray(L, dtype=float)) for L in self.locations)
        if not (len(dims) == len(locs) == len(dirs)):
            raise ValueError("dims, locations, directions must align")
        if len(set(dims)) != len(dims):
            raise ValueError("monotone dimensions must be distinct")
        if any(s not in (-1, 1) for s in dirs):
            raise ValueError("directions must be +1 or -1")
        for L in locs:
            if not np.all(np.isfinite(L)):
                raise ValueError("derivative locations must be finite")
        ndims = {L.shape[1] for L in locs}
        if len(ndims) > 1:
            raise ValueError("derivative location blocks disagree on dimension")
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "locations", locs)
        object.__setattr__(self, "directions", dirs)

    @classmethod
    def empty(cls) -> "DerivativeSpec":
        return cls((), (), ())

    @property
    def n_blocks(self) -> int:
        return len(self.dims)

    @property
    def counts(self) -> tuple:
        return tuple(L.shape[0] for L in self.locations)

    @property
    def total_points(self) -> int:
        return sum(self.counts)


@dataclass(frozen=True)
class JointLayout:
    """Index blocks of the stacked field (y at X, y* at X*, y'_k per block)."""

    n_train: int
    n_pred: int
    deriv_counts: tuple

    @property
    def train(self) -> slice:
        return slice(0, self.n_train)

    @property
    def pred(self) -> slice:
        return slice(self.n_train, self.n_train + self.n_pred)

    def deriv(self, i: int) -> slice:
        start = self.n_train + self.n_pred + sum(self.deriv_counts[:i])
        return slice(start, start + self.deriv_counts[i])

    @property
    def derivs(self) -> slice:
        start = self.n_train + self.n_pred
        return slice(start, self.total)

    @property
    def targets(self) -> slice:
        return slice(self.n_train, self.total)

    @property
    def n_deriv(self) -> int:
        return sum(self.deriv_counts)

    @property
    def total(self) -> int:
        return self.n_train + self.n_pred + self.n_deriv


@dataclass(frozen=True)
class PriorConfig:
    """Chi-squared priors: theta_k = sqrt(5)/l_k ~ chi2(theta_df) per dimension
    (with the l-space Jacobian included) and variance ~ chi2(variance_df)."""

    theta_df: float = 1.0
    variance_df: float = 5.0


# -- block assembly ------------------------------------------------------------


def _blocks(X: np.ndarray | None, xstar: np.ndarray | None,
            spec: DerivativeSpec) -> list:
    out = []
    if X is not None and X.shape[0]:
        out.append((X, None, 1))
    if xstar is not None and xstar.shape[0]:
        out.append((xstar, None, 1))
    for k, L, s in zip(spec.dims, spec.locations, spec.directions):
        if L.shape[0]:
            out.append((L, k, s))
    return out


def _joint_correlation(rows: list, cols: list, params: KernelParams) -> np.ndarray:
    """Stacked correlation over mixed value/derivative blocks.

    One broadcast pass builds the plain per-dimension factors for the whole
    matrix; derivative blocks then overwrite their differentiated factor in
    place (rows first, columns second, same-dimension intersections last),
    and direction signs conjugate the result.
    """
    from .kernel import _g, _g1, _g2

    theta = params.theta
    R = np.vstack([b[0] for b in rows])
    C = np.vstack([b[0] for b in cols])
    delta = R[:, None, :] - C[None, :, :]
    G = _g(np.abs(delta), theta)

    def slices(blocks):
        out, start = [], 0
        for b in blocks:
            out.append(slice(start, start + b[0].shape[0]))
            start += b[0].shape[0]
        return out

    row_sl = slices(rows)
    col_sl = slices(cols)
    for (A, da, sa), rs in zip(rows, row_sl):
        if da is not None:
            G[rs, :, da] = _g1(delta[rs, :, da], theta[da])
    for (B, db, sb), cs in zip(cols, col_sl):
        if db is not None:
            G[:, cs, db] = -_g1(delta[:, cs, db], theta[db])
            for (A, da, sa), rs in zip(rows, row_sl):
                if da == db:
                    G[rs, cs, db] = _g2(delta[rs, cs, db], theta[db])
    out = G.prod(axis=-1)
    if any(b[2] == -1 for b in rows) or any(b[2] == -1 for b in cols):
        s_r = np.concatenate([np.full(b[0].shape[0], b[2], dtype=float)
                              for b in rows])
        s_c = np.concatenate([np.full(b[0].shape[0], b[2], dtype=float)
                              for b in cols])
        out *= s_r[:, None] * s_c[None, :]
    return out


def _as_points(x, d: int | None = None) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    if x.ndim != 2:
        raise ValueError("points must form an (n, d) matrix")
    if d is not None and x.shape[1] != d:
        raise ValueError(f"points have dimension {x.shape[1]}, expected {d}")
    return x


def assemble_joint_cov(X, xstar, spec: DerivativeSpec, params: KernelParams):
    """Full joint covariance over (y at X, y* at X*, y'_k blocks).

    Returns ``(Sigma, layout)``; the matrix is symmetric by construction and
    positive semidefinite up to roundoff.  Decreasing directions negate the
    cross blocks of their derivative rows/columns.
    """
    d = params.ndim
    X = _as_points(X, d) if X is not None else np.empty((0, d))
    xstar = _as_points(xstar, d) if xstar is not None else np.empty((0, d))
    for L in spec.locations:
        if L.shape[1] != d:
            raise ValueError("derivative locations dimension mismatch")
    layout = JointLayout(X.shape[0], xstar.shape[0], spec.counts)
    blocks = _blocks(X, xstar, spec)
    if not blocks:
        return np.empty((0, 0)), layout
    corr = _joint_correlation(blocks, blocks, params)
    sigma = params.variance * corr
    # exact symmetry despite independent block fills
    return 0.5 * (sigma + sigma.T), layout


# -- log densities -------------------------------------------------------------


def log_mvn(x, mean, cov, jitter: JitterPolicy = JitterPolicy()) -> float:
    """Log density of a multivariate normal via Cholesky (no explicit inverse).

    Factorizes ``cov`` directly and only escalates jitter if that fails.
    """
    x = np.asarray(x, dtype=float).ravel()
    mean = np.asarray(mean, dtype=float).ravel()
    cov = np.atleast_2d(np.asarray(cov, dtype=float))
    n = x.size
    if mean.size != n or cov.shape != (n, n):
        raise ValueError("dimension mismatch in log_mvn")
    try:
        L = cholesky(cov, lower=True, check_finite=False)
    except np.linalg.LinAlgError:
        L, _ = jittered_cholesky(cov, jitter, scale=float(np.mean(cov.diagonal())))
    r = solve_triangular(L, x - mean, lower=True, check_finite=False)
    return float(-0.5 * (r @ r + n * LOG_2PI) - np.sum(np.log(np.diag(L))))


def _chi2_logpdf(x, df):
    # gamma(df/2, scale=2); inlined because scipy.stats call overhead dominates
    # the Metropolis inner loop
    half = 0.5 * df
    return (half - 1.0) * np.log(x) - 0.5 * x - gammaln(half) - half * math.log(2.0)


_LOG_SQRT5 = math.log(SQRT5)
_LOG2 = math.log(2.0)
_chi2_const_cache: dict = {}


def _chi2_logconst(df: float) -> float:
    const = _chi2_const_cache.get(df)
    if const is None:
        const = -float(gammaln(0.5 * df)) - 0.5 * df * _LOG2
        _chi2_const_cache[df] = const
    return const


def log_prior(lengthscales, variance, priors: PriorConfig = PriorConfig()) -> float:
    """Log prior of (lengthscales, variance).

    Chi-squared on theta_k = sqrt(5)/l_k with the change-of-variables
    Jacobian sqrt(5)/l_k^2, plus chi-squared on the variance.  Non-positive
    parameters give -inf.
    """
    ls = np.atleast_1d(np.asarray(lengthscales, dtype=float))
    variance = float(variance)
    if not np.all(np.isfinite(ls)) or np.any(ls <= 0) or \
            not math.isfinite(variance) or variance <= 0:
        return -math.inf
    d = ls.size
    half = 0.5 * priors.theta_df
    log_ls = np.log(ls)
    sum_log_theta = d * _LOG_SQRT5 - float(np.sum(log_ls))
    sum_theta = float(np.sum(SQRT5 / ls))
    lp = ((half - 1.0) * sum_log_theta - 0.5 * sum_theta
          + d * _chi2_logconst(priors.theta_df))
    lp += d * _LOG_SQRT5 - 2.0 * float(np.sum(log_ls))  # Jacobian dtheta/dl
    half_v = 0.5 * priors.variance_df
    lp += ((half_v - 1.0) * math.log(variance) - 0.5 * variance
           + _chi2_logconst(priors.variance_df))
    return lp


# -- cached posterior evaluation ------------------------------------------------


@dataclass
class _CorrEntry:
    """Correlation-level factorizations for one lengthscale vector."""

    mean: np.ndarray        # conditional mean of targets given y (variance-free)
    L_cond: np.ndarray      # chol of conditional target correlation (+ jitter)
    Li_cond: np.ndarray     # inverse of L_cond (dense solves beat per-call overhead)
    logdet_train: float
    logdet_cond: float
    quad_y: float           # y' (C_xx + j I)^{-1} y
    jitter_train: float
    jitter_cond: float
    L_train: np.ndarray
    alpha: np.ndarray       # (C_xx + j I)^{-1} y
    L_prior: np.ndarray | None = None  # chol of prior target correlation, lazy


class GPState:
    """Posterior evaluation engine for one (data, derivative spec, X*) problem.

    Holds the data as given (center/scale upstream if desired) and a bounded
    FIFO cache of correlation factorizations keyed by the lengthscale vector.
    All public evaluations are deterministic functions of their inputs; the
    cache affects speed only.
    """

    def __init__(self, data: Dataset, spec: DerivativeSpec, xstar,
                 priors: PriorConfig = PriorConfig(),
                 jitter: JitterPolicy = JitterPolicy(), max_cache: int = 256):
        self.data = data
        self.spec = spec
        d = data.ndim
        self.xstar = _as_points(xstar, d) if xstar is not None else np.empty((0, d))
        for L in spec.locations:
            if L.shape[0] and L.shape[1] != d:
                raise ValueError("derivative locations dimension mismatch")
        if any(k < 0 or k >= d for k in spec.dims):
            raise ValueError("monotone dimension index out of range")
        self.priors = priors
        self.jitter = jitter
        self.layout = JointLayout(data.n, self.xstar.shape[0], spec.counts)
        self.failures = 0
        self._max_cache = max_cache
        self._cache: dict = {}

    # -- internals --

    def _build_entry(self, ls: np.ndarray):
        params = KernelParams(ls, 1.0)
        X = self.data.X
        train_blocks = [(X, None, 1)]
        target_blocks = _blocks(None, self.xstar, self.spec)
        C_xx = _joint_correlation(train_blocks, train_blocks, params)
        L_x, j_x = jittered_cholesky(C_xx, self.jitter)
        alpha = cho_solve((L_x, True), self.data.y, check_finite=False)
        quad_y = float(self.data.y @ alpha)
        logdet_x = 2.0 * float(np.sum(np.log(np.diag(L_x))))
        if target_blocks:
            A = _joint_correlation(target_blocks, train_blocks, params)
            C_tt = _joint_correlation(target_blocks, target_blocks, params)
            C_tt = 0.5 * (C_tt + C_tt.T)
            mean = A @ alpha
            V = solve_triangular(L_x, A.T, lower=True, check_finite=False)
            S = C_tt - V.T @ V
            S = 0.5 * (S + S.T)
            L_s, j_s = jittered_cholesky(S, self.jitter)
            Li_s = solve_triangular(L_s, np.eye(L_s.shape[0]), lower=True,
                                    check_finite=False)
            logdet_s = 2.0 * float(np.sum(np.log(np.diag(L_s))))
        else:
            q = 0
            mean = np.empty(q)
            L_s = np.empty((q, q))
            Li_s = np.empty((q, q))
            logdet_s, j_s = 0.0, 0.0
        return _CorrEntry(mean, L_s, Li_s, logdet_x, logdet_s, quad_y,
                          j_x, j_s, L_x, alpha)

    def entry(self, lengthscales):
        """Cached correlation entry, or None if factorization failed."""
        ls = np.atleast_1d(np.asarray(lengthscales, dtype=float))
        key = ls.tobytes()
        if key in self._cache:
            return self._cache[key]
        try:
            ent = self._build_entry(ls)
        except FactorizationError:
            ent = None
        if len(self._cache) >= self._max_cache:
            self._cache.pop(next(iter(self._cache)))
        self._cache[key] = ent
        return ent

    # -- log densities --

    @property
    def n_targets(self) -> int:
        return self.layout.total - self.layout.n_train

    def split_field(self, field: np.ndarray):
        s = self.layout.n_pred
        return field[:s], field[s:]

    def log_marginal_y(self, lengthscales, variance) -> float:
        """Log density of the observed y given the hyperparameters."""
        ent = self.entry(lengthscales)
        if ent is None:
            self.failures += 1
            return -math.inf
        n = self.data.n
        return -0.5 * (ent.quad_y / variance + n * math.log(variance)
                       + ent.logdet_train + n * LOG_2PI)

    def log_conditional_field(self, lengthscales, variance, field) -> float:
        """Log density of the stacked (y*, y') targets given y."""
        ent = self.entry(lengthscales)
        if ent is None:
            self.failures += 1
            return -math.inf
        q = self.n_targets
        r = ent.Li_cond @ (field - ent.mean)
        return -0.5 * (float(r @ r) / variance + q * math.log(variance)
                       + ent.logdet_cond + q * LOG_2PI)

    def log_hyper(self, lengthscales, variance) -> float:
        """Unnormalized log posterior of the hyperparameters alone."""
        lp = log_prior(lengthscales, variance, self.priors)
        if lp == -math.inf:
            return -math.inf
        return lp + self.log_marginal_y(lengthscales, variance)

    def log_target(self, lengthscales, variance, field, tau: float) -> float:
        """Unnormalized log posterior of a full particle at constraint level tau."""
        lp = log_prior(lengthscales, variance, self.priors)
        if lp == -math.inf:
            return -math.inf
        ly = self.log_marginal_y(lengthscales, variance)
        if ly == -math.inf:
            return -math.inf
        lf = self.log_conditional_field(lengthscales, variance, field)
        _, yprime = self.split_field(field)
        return lp + ly + lf + log_probit(yprime, tau)

    # -- conditional draws and moments --

    def conditional_moments(self, lengthscales, variance):
        """Conditional mean and covariance of (y*, y') given the data.

        The returned covariance is the exact conditional form; the jitter
        added for factorizing it internally is subtracted back out.  Raises
        `FactorizationError` when the correlation cannot be factorized even
        at the maximum jitter.
        """
        ent = self.entry(lengthscales)
        if ent is None:
            raise FactorizationError("conditional moments unavailable")
        q = self.n_targets
        cov = variance * (ent.L_cond @ ent.L_cond.T - ent.jitter_cond * np.eye(q))
        return ent.mean.copy(), cov

    def draw_field(self, lengthscales, variance, rng) -> np.ndarray:
        """Exact draw of (y*, y') from its Gaussian conditional given y."""
        ent = self.entry(lengthscales)
        if ent is None:
            raise FactorizationError("cannot draw from failed factorization")
        z = rng.standard_normal(self.n_targets)
        return ent.mean + math.sqrt(variance) * (ent.L_cond @ z)

    def prior_field_step(self, lengthscales, scale, rng) -> np.ndarray:
        """Random-walk step with prior target correlation, scaled by ``scale``."""
        ent = self.entry(lengthscales)
        if ent is None:
            raise FactorizationError("cannot propose from failed factorization")
        if ent.L_prior is None:
            ls = np.atleast_1d(np.asarray(lengthscales, dtype=float))
            blocks = _blocks(None, self.xstar, self.spec)
            C_tt = _joint_correlation(blocks, blocks, KernelParams(ls, 1.0))
            ent.L_prior, _ = jittered_cholesky(0.5 * (C_tt + C_tt.T), self.jitter)
        z = rng.standard_normal(self.n_targets)
        return math.sqrt(scale) * (ent.L_prior @ z)

    def conditional_field_step(self, lengthscales, variance, scale, rng) -> np.ndarray:
        """Random-walk step preconditioned by the conditional target covariance."""
        ent = self.entry(lengthscales)
        if ent is None:
            raise FactorizationError("cannot propose from failed factorization")
        z = rng.standard_normal(self.n_targets)
        return math.sqrt(scale * variance) * (ent.L_cond @ z)


def conditional_draws_at(new_points, data: Dataset, spec: DerivativeSpec,
                         xstar, lengthscales: np.ndarray, variances: np.ndarray,
                         fields: np.ndarray, seed: int = 0,
                         jitter: JitterPolicy = JitterPolicy()) -> np.ndarray:
    """Per-particle predictive draws at new points, conditioning on everything.

    For each particle the conditioning set is (y at X, y* at X*, y' blocks)
    with that particle's values, and one Gaussian draw of the new function
    values is returned.  The correlation factorization depends only on the
    lengthscales, so unique lengthscale vectors are factorized once.
    """
    new_points = _as_points(new_points, data.ndim)
    xstar = _as_points(xstar, data.ndim) if xstar is not None else np.empty((0, data.ndim))
    n_new = new_points.shape[0]
    N = lengthscales.shape[0]
    rng = np.random.default_rng(np.random.SeedSequence(entropy=seed,
                                                       spawn_key=(17,)))
    blocks = _blocks(data.X, xstar, spec)
    cache: dict = {}
    draws = np.empty((N, n_new))
    new_block = [(new_points, None, 1)]
    for i in range(N):
        key = lengthscales[i].tobytes()
        if key not in cache:
            params = KernelParams(lengthscales[i], 1.0)
            C_cc = _joint_correlation(blocks, blocks, params)
            L, _ = jittered_cholesky(0.5 * (C_cc + C_cc.T), jitter)
            A = _joint_correlation(new_block, blocks, params)
            V = solve_triangular(L, A.T, lower=True, check_finite=False)
            S = _joint_correlation(new_block, new_block, params) - V.T @ V
            L_s, _ = jittered_cholesky(0.5 * (S + S.T), jitter)
            cache[key] = (L, A, L_s)
        L, A, L_s = cache[key]
        values = np.concatenate([data.y, fields[i]])
        mean_i = A @ cho_solve((L, True), values, check_finite=False)
        z = rng.standard_normal(n_new)
        draws[i] = mean_i + math.sqrt(float(variances[i])) * (L_s @ z)
    return draws


def gp_conditional(data: Dataset, params: KernelParams, xstar=None,
                   spec: DerivativeSpec = DerivativeSpec.empty(),
                   jitter: JitterPolicy = JitterPolicy()):
    """Conditional mean and covariance of (y* at xstar, y' blocks) given data.

    The mean is ``C_t,X (C_XX + jI)^{-1} y`` and the covariance the standard
    conditional form ``C_tt - C_t,X (C_XX + jI)^{-1} C_X,t`` (scaled by the
    variance); at a training input the mean reproduces the observation and
    the variance is at the jitter level.
    """
    state = GPState(data, spec, xstar, jitter=jitter)
    return state.conditional_moments(params.lengthscales, params.variance)


def log_target(lengthscales, variance, field, data: Dataset,
               spec: DerivativeSpec, xstar, tau: float,
               priors: PriorConfig = PriorConfig(),
               state: GPState | None = None) -> float:
    """Unnormalized log posterior of one particle.

    Composes the hyperparameter prior, the marginal density of y, the
    conditional density of (y*, y') given y, and the probit constraint term
    at strictness ``tau``.  Factorization failures yield -inf (counted on
    the state) rather than an exception, so samplers survive bad proposals.
    """
    if state is None:
        state = GPState(data, spec, xstar, priors)
    return state.log_target(lengthscales, variance, np.asarray(field, dtype=float),
                            tau)
