"""Alice holds A, Bob holds b, and together they estimate x = A^-1 b.

Alice applies an odd polynomial that approximates a scaled inverse to the
singular values of A^dagger. Bob encodes |b><k| for each component k. One
trace estimate per component gives x_k; the vector error stays within eps.
"""

import numpy as np

from distrace import RngStream, linear_solve
from distrace import numkit

d, delta, eps = 2, 0.5, 0.1
A = numkit.random_well_conditioned(d, RngStream(11, ("A",)), delta, 1.0)
b = numkit.haar_unitary(d, RngStream(11, ("b",)))[:, 0]

x = np.linalg.solve(A, b)
res = linear_solve(A, b, eps, delta)
print("exact    x =", np.round(x, 4))
print("estimate x =", np.round(res.x_tilde, 4))
print(f"||error|| = {np.linalg.norm(res.x_tilde - x):.4f} (target {eps}), per-component eps {res.per_component_eps:.4f}")
print(f"residual ||A x~ - b|| = {res.residual:.4f}, queries {res.n_queries}")
