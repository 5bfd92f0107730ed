"""Kernel layer tour: the Matern-5/2 correlation, its derivative factors,
and joint covariances over values and partial derivatives.

Run:  python3 demos/01_kernel_and_covariances.py
"""

import numpy as np

from monogp import (
    DerivativeSpec,
    KernelParams,
    assemble_joint_cov,
    cov_dd,
    cov_fd,
    cov_ff,
    matern52,
    matern52_d1,
    matern52_d2,
)
from monogp.gp import jittered_cholesky

print("Matern-5/2 correlation at a few distances (l = 0.5):")
for h in (0.0, 0.1, 0.5, 1.0, 2.0):
    print(f"  g({h:3.1f}) = {matern52(h, 0.5):.6f}")

print("\nDerivative factors agree with finite differences of the correlation:")
delta, l, h = 0.3, 0.7, 1e-6
fd1 = (matern52(abs(delta + h), l) - matern52(abs(delta - h), l)) / (2 * h)
print(f"  d1 analytic {matern52_d1(delta, l):+.8f}   finite diff {fd1:+.8f}")
fd2 = -(matern52(abs(delta + 1e-4), l) - 2 * matern52(abs(delta), l)
        + matern52(abs(delta - 1e-4), l)) / 1e-8
print(f"  d2 analytic {matern52_d2(delta, l):+.8f}   finite diff {fd2:+.8f}")
print(f"  d2 at zero separation is theta^2/3 = {matern52_d2(0.0, l):.6f}")

print("\nProduct covariances in two dimensions:")
params = KernelParams([0.6, 1.1], variance=2.0)
xi, xj = np.array([0.2, 0.8]), np.array([0.5, 0.4])
print(f"  cov_ff = {cov_ff(xi, xj, params):+.6f}")
print(f"  cov_fd (derivative in dim 0 at xi) = {cov_fd(xi, xj, 0, params):+.6f}")
print(f"  cov_dd same dim   = {cov_dd(xi, xj, 0, 0, params):+.6f}")
print(f"  cov_dd cross dims = {cov_dd(xi, xj, 0, 1, params):+.6f}")

print("\nJoint covariance over (values, predictions, derivatives):")
X = np.array([[0.1, 0.2], [0.5, 0.6], [0.9, 0.3]])
xstar = np.array([[0.4, 0.4]])
spec = DerivativeSpec(dims=(0, 1),
                      locations=(np.array([[0.3, 0.5]]), np.array([[0.6, 0.7]])),
                      directions=(1, 1))
sigma, layout = assemble_joint_cov(X, xstar, spec, params)
print(f"  matrix is {sigma.shape[0]}x{sigma.shape[1]}; blocks: "
      f"train={layout.n_train}, pred={layout.n_pred}, derivs={layout.deriv_counts}")
L, jit = jittered_cholesky(sigma, scale=params.variance)
print(f"  factorizes with jitter {jit:.1e} "
      "(positive semidefiniteness is the strongest sign-convention check)")
