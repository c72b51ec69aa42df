"""Expectation value under H = H1 + H2 when each party knows only one term.

One first-order product step gives Tr(M U1 U2 rho V2 V1). Its error is bounded
by t^2 ||[H1, H2]||, so the estimate is exact up to sampling noise when the
terms commute.
"""

import numpy as np

from distrace import RngStream, hamiltonian_expectation
from distrace import numkit

d, eps, t = 4, 0.1, 0.4
M = numkit.random_hermitian(d, RngStream(5, ("M",)), spectral_norm=1.0)
rho = numkit.random_density_matrix(d, 1, 1.0, RngStream(5, ("rho",)))

H1 = np.diag([0.9, 0.3, -0.2, -0.7])
cases = {
    "commuting": np.diag([-0.4, 0.5, 0.1, 0.6]),
    "non-commuting": numkit.random_hermitian(d, RngStream(5, ("H2",)), spectral_norm=1.0),
}
for name, H2 in cases.items():
    res = hamiltonian_expectation(H1, H2, M, rho, t, eps, t_cap=1.0)
    bound = res.t ** 2 * res.commutator_norm + eps
    print(f"{name:>13s}: exact {res.exact:+.4f}, estimate {res.estimate:+.4f}, "
          f"error {abs(res.estimate - res.exact):.4f} <= {bound:.4f}")
