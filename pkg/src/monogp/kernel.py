"""Matern-5/2 correlation, its derivatives, and anisotropic product covariances.

The per-dimension correlation is

    g(h) = (1 + t*h + t^2*h^2/3) * exp(-t*h),    t = sqrt(5)/l,  h = |x - x'|,

which is twice mean-square differentiable, so first and second derivative
processes of the field exist.  Differentiating through h = |x - x'| gives

    dg/dx      = -(t^2/3) * (x - x') * (1 + t*h) * exp(-t*h)
    d2g/dx dx' =  (t^2/3) * (1 + t*h - t^2*h^2)  * exp(-t*h)

The mixed second derivative is even in (x - x'); the finite-difference tests
in the suite pin both formulas against the base correlation.

Covariances over d-dimensional inputs are anisotropic products of the
per-dimension factors scaled by the process variance.  Differentiating the
product with respect to one coordinate of one argument replaces the factor in
that dimension by the matching derivative factor; differentiation with
respect to the *second* argument flips the sign of the odd first-derivative
factor.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

SQRT5 = math.sqrt(5.0)

#: Fixed Matern smoothness; the derivative formulas above are specialized to it.
SMOOTHNESS = 2.5


@dataclass(frozen=True, eq=False)
class KernelParams:
    """Per-dimension lengthscales and the process variance.

    Parameters
    ----------
    lengthscales : array_like, shape (d,)
        Positive correlation lengths, one per input dimension.
    variance : float
        Positive process variance.
    """

    lengthscales: np.ndarray
    variance: float

    def __post_init__(self):
        ls = np.atleast_1d(np.asarray(self.lengthscales, dtype=float))
        if ls.ndim != 1 or ls.size == 0:
            raise ValueError("lengthscales must be a 1-d, non-empty array")
        if not np.all(np.isfinite(ls)) or np.any(ls <= 0.0):
            raise ValueError("lengthscales must be positive and finite")
        var = float(self.variance)
        if not math.isfinite(var) or var <= 0.0:
            raise ValueError("variance must be positive and finite")
        object.__setattr__(self, "lengthscales", ls)
        object.__setattr__(self, "variance", var)

    @property
    def ndim(self) -> int:
        return self.lengthscales.size

    @property
    def smoothness(self) -> float:
        return SMOOTHNESS

    @property
    def theta(self) -> np.ndarray:
        """Inverse-range parameters sqrt(5)/l, one per dimension."""
        return SQRT5 / self.lengthscales


# -- elementwise factors (no validation; used by the matrix builders) --------


def _g(h, theta):
    th = theta * h
    return (1.0 + th + th * th / 3.0) * np.exp(-th)


def _g1(delta, theta):
    # d/dx of g(|x - x'|) evaluated at delta = x - x'; odd in delta.
    h = np.abs(delta)
    return -(theta * theta / 3.0) * delta * (1.0 + theta * h) * np.exp(-theta * h)


def _g2(delta, theta):
    # d^2/(dx dx') of g(|x - x'|); even in delta, equals theta^2/3 at zero.
    th = theta * np.abs(delta)
    return (theta * theta / 3.0) * (1.0 + th - th * th) * np.exp(-th)


# -- public scalar/array operations ------------------------------------------


def _check_lengthscale(l: float) -> float:
    l = float(l)
    if not math.isfinite(l) or l <= 0.0:
        raise ValueError("lengthscale must be positive and finite")
    return l


def matern52(h, l):
    """Matern-5/2 correlation at distance ``h`` with lengthscale ``l``.

    Equals 1 at h = 0 and decreases smoothly and strictly with distance.
    """
    l = _check_lengthscale(l)
    h = np.asarray(h, dtype=float)
    if not np.all(np.isfinite(h)) or np.any(h < 0.0):
        raise ValueError("distance must be nonnegative and finite")
    out = _g(h, SQRT5 / l)
    return float(out) if out.ndim == 0 else out


def matern52_d1(delta, l):
    """First derivative of the correlation with respect to the first argument.

    ``delta`` is the signed separation x - x'.  Odd in delta and zero at
    delta = 0.
    """
    l = _check_lengthscale(l)
    delta = np.asarray(delta, dtype=float)
    if not np.all(np.isfinite(delta)):
        raise ValueError("separation must be finite")
    out = _g1(delta, SQRT5 / l)
    return float(out) if out.ndim == 0 else out


def matern52_d2(delta, l):
    """Mixed second derivative d^2 g / (dx dx') at signed separation ``delta``.

    Even in delta; its value at zero, theta^2/3, is the variance factor of
    the derivative process in this dimension.
    """
    l = _check_lengthscale(l)
    delta = np.asarray(delta, dtype=float)
    if not np.all(np.isfinite(delta)):
        raise ValueError("separation must be finite")
    out = _g2(delta, SQRT5 / l)
    return float(out) if out.ndim == 0 else out


def correlation_block(A, B, params: KernelParams, deriv_a: int | None = None,
                      deriv_b: int | None = None) -> np.ndarray:
    """Correlation block between point sets ``A`` (rows) and ``B`` (columns).

    With ``deriv_a = k`` the rows are the derivative field in dimension k;
    with ``deriv_b = k2`` the columns are.  The variance is *not* applied.

    Parameters
    ----------
    A, B : ndarray, shape (na, d) / (nb, d)
    deriv_a, deriv_b : int or None
        Differentiated dimension of the row/column field, or None for values.
    """
    A = np.atleast_2d(np.asarray(A, dtype=float))
    B = np.atleast_2d(np.asarray(B, dtype=float))
    d = params.ndim
    if A.shape[1] != d or B.shape[1] != d:
        raise ValueError(
            f"point dimension mismatch: A has {A.shape[1]}, B has {B.shape[1]}, "
            f"kernel has {d}")
    for k in (deriv_a, deriv_b):
        if k is not None and not (0 <= k < d):
            raise ValueError(f"derivative dimension {k} outside 0..{d - 1}")
    theta = params.theta
    delta = A[:, None, :] - B[None, :, :]
    factors = _g(np.abs(delta), theta)
    if deriv_a is not None and deriv_a == deriv_b:
        factors[..., deriv_a] = _g2(delta[..., deriv_a], theta[deriv_a])
    else:
        if deriv_a is not None:
            factors[..., deriv_a] = _g1(delta[..., deriv_a], theta[deriv_a])
        if deriv_b is not None:
            # differentiate the second argument: odd factor flips sign
            factors[..., deriv_b] = -_g1(delta[..., deriv_b], theta[deriv_b])
    return factors.prod(axis=-1)


def _as_point(x, d: int) -> np.ndarray:
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if x.shape != (d,):
        raise ValueError(f"expected a point of dimension {d}, got shape {x.shape}")
    return x


def cov_ff(xi, xj, params: KernelParams) -> float:
    """Covariance between field values at ``xi`` and ``xj``."""
    d = params.ndim
    xi, xj = _as_point(xi, d), _as_point(xj, d)
    return params.variance * float(correlation_block(xi[None], xj[None], params)[0, 0])


def cov_fd(xi, xj, k: int, params: KernelParams) -> float:
    """Covariance between the dimension-``k`` derivative at ``xi`` and the value at ``xj``.

    The derivative is taken in the first argument, so the result is
    Cov[dy/dx_k (xi), y(xj)].
    """
    d = params.ndim
    xi, xj = _as_point(xi, d), _as_point(xj, d)
    return params.variance * float(
        correlation_block(xi[None], xj[None], params, deriv_a=k)[0, 0])


def cov_dd(xi, xj, k: int, k2: int, params: KernelParams) -> float:
    """Covariance between derivative fields: dimension ``k`` at ``xi``, ``k2`` at ``xj``."""
    d = params.ndim
    xi, xj = _as_point(xi, d), _as_point(xj, d)
    return params.variance * float(
        correlation_block(xi[None], xj[None], params, deriv_a=k, deriv_b=k2)[0, 0])
