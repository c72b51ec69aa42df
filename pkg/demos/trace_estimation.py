"""Two parties estimate the overlap Tr(rho sigma) of states they never exchange.

Alice and Bob each hold an exact block-encoding of their own density matrix.
They share a seed, so in every iteration both apply the same Haar-random
unitary, measure a Hadamard test m times per part and send only the counts.
The estimator is unbiased, and its spread shrinks like 1/sqrt(N).
"""

import numpy as np

from distrace import ProtocolConfig, RngStream, dilate, run
from distrace import numkit
from distrace.polyapprox import monomial

d = 4
rho = numkit.random_density_matrix(d, d, 0.05, RngStream(1, ("rho",)))
sigma = numkit.random_density_matrix(d, d, 0.05, RngStream(1, ("sigma",)))
exact = np.trace(rho @ sigma).real
print(f"exact Tr(rho sigma)       = {exact:.5f}")

identity = monomial(1)
for N in (250, 1000, 4000):
    cfg = ProtocolConfig(d=d, N=N, m=64 * d * d, seed=7, poly_f=identity, poly_g=identity, be_a=dilate(rho), be_b=dilate(sigma))
    est = run(cfg)
    se = np.sqrt(est.empirical_variance)
    print(f"N = {N:5d}: estimate = {est.value.real:+.5f}  (std. error {se:.4f}, queries {est.n_queries_simulated})")

# Swapping the polynomials turns the same machinery into Tr(rho^2 sigma).
square = monomial(2)
cfg = ProtocolConfig(d=d, N=4000, m=64 * d * d, seed=7, poly_f=square, poly_g=identity, be_a=dilate(rho), be_b=dilate(sigma))
print(f"Tr(rho^2 sigma): exact {np.trace(rho @ rho @ sigma).real:.5f}, estimate {run(cfg).value.real:.5f}")
