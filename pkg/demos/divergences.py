"""Relative entropy and Petz-Renyi divergence between two remote states.

Each divergence reduces to one or two trace products Tr(P(rho) Q(sigma)) in
which P and Q are bounded polynomial approximations of logarithms or powers.
The error budget is split between polynomial error and sampling error, and the
result reports how it was spent.
"""

import numpy as np

from distrace import RngStream, relative_entropy, renyi_entropy
from distrace import apps, numkit

d, delta, eps = 2, 0.2, 0.1
rho = numkit.random_density_matrix(d, d, delta, RngStream(3, ("rho",)))
sigma = numkit.random_density_matrix(d, d, delta, RngStream(3, ("sigma",)))
print("rho spectrum  ", np.round(np.linalg.eigvalsh(rho), 3))
print("sigma spectrum", np.round(np.linalg.eigvalsh(sigma), 3))

res = relative_entropy(rho, sigma, eps, delta)
print(f"\nD(rho||sigma): exact {apps.exact_relative_entropy(rho, sigma):.4f}, estimate {res.value:.4f}")
print(f"  log rescaling K = {res.trace_terms[0].K:.3f}, queries {res.n_queries}")
for name, spent in res.eps_budget.allocations.items():
    print(f"  {name:>24s}: {spent:.4g}")

for alpha in (2.0, 0.5):
    kwargs = {"t_floor": 0.5} if alpha < 1 else {}
    res = renyi_entropy(rho, sigma, alpha, eps, delta, **kwargs)
    print(f"\nD_{alpha}(rho||sigma): exact {apps.exact_renyi(rho, sigma, alpha):.4f}, estimate {res.value:.4f}, queries {res.n_queries}")
