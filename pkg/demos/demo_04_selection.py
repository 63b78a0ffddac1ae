"""
Selecting interactions with spike-and-slab
==========================================

Six items, two true interactions. Posterior inclusion probabilities (PIPs)
above 0.5 mark the selected parameters; estimates of the others are set to
zero. The elasso baseline is shown alongside.
"""
import warnings

import numpy as np

from ssdmh import (
    AuxChainConfig,
    SamplerConfig,
    fit_elasso,
    posterior_summary,
    run_chain,
    sample_exact_rows,
)
from ssdmh.model import n_params, pair_index

p = 6
theta = np.zeros(n_params(p))
theta[p + pair_index(0, 1, p)] = 1.5
theta[p + pair_index(2, 4, p)] = -1.5
x = sample_exact_rows(theta, 400, 7)

chain = run_chain(x, SamplerConfig(iterations=800, burn_in=400, seed=3,
                                   aux=AuxChainConfig(sweeps=5), progress_every=0))
bayes = posterior_summary(chain)
print("spike-and-slab edges (j, k, gamma_hat, pip):")
for edge in bayes.edges():
    print("   ", edge)

with warnings.catch_warnings():
    warnings.simplefilter("ignore")
    elasso = fit_elasso(x)
print("elasso edges:", [(j, k, round(g, 3)) for j, k, g, _ in elasso.edges()])
print("signed adjacency (Bayes):")
print(bayes.signed_adjacency)
