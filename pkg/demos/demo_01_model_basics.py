"""
The pairwise binary item model, by hand
=======================================

Every respondent's answer row ``z`` (one 0/1 entry per item) has energy
``sum_j beta_j z_j + sum_{j<k} gamma_jk z_j z_k``. With a handful of items the
normalizing constant can be summed over all ``2^p`` rows, which is what makes
small models useful as an exact reference.
"""
import numpy as np

from ssdmh import ParamVector, log_partition_exact, n_params, sufficient_statistics
from ssdmh.model import row_probabilities, row_conditional_prob

# Three items: two easy-ish, one hard, items 0 and 2 help each other.
theta = ParamVector(beta=[0.5, 0.3, -1.0], gamma=[0.0, 1.2, -0.4])
print("parameters q =", theta.q, "(p + p(p-1)/2 with p = 3)")
print("parameter counts for p = 7, 24, 70:", [n_params(p) for p in (7, 24, 70)])

# Exact probabilities of the 8 possible answer rows; code = sum z_j 2^j.
probs = row_probabilities(theta.flat, 3)
for code, pr in enumerate(probs):
    z = [(code >> j) & 1 for j in range(3)]
    print(f"row {z}: {pr:.4f}")

# The data enter only through item counts and co-success counts.
x = np.array([[1, 0, 1], [1, 1, 1], [0, 0, 0], [1, 0, 0]])
s = sufficient_statistics(x)
print("item counts", s.item_counts, "pair counts", s.pair_counts)
print("log kappa for n = 4 rows:", log_partition_exact(theta.flat, 4))

# Full conditionals are logistic: P(z_0 = 1 | z_2 = 1) uses beta_0 + gamma_02.
print("P(z0=1 | z=[., 0, 1]) =", row_conditional_prob([0, 0, 1], 0, theta.flat))
