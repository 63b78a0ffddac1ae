"""Brute-force oracles shared by the test modules.

These deliberately avoid the package's vectorized code paths: plain Python
loops over explicit configurations.
"""
import itertools
import math

import numpy as np
import pytest


def gamma_lookup(theta, p):
    """dict (j, k) -> gamma_jk, built by walking the pairs in order."""
    out = {}
    pos = p
    for j in range(p):
        for k in range(j + 1, p):
            out[(j, k)] = float(theta[pos])
            pos += 1
    return out


def row_energy(z, theta, p):
    g = gamma_lookup(theta, p)
    e = sum(float(theta[j]) * z[j] for j in range(p))
    for (j, k), v in g.items():
        e += v * z[j] * z[k]
    return e


def enumerate_rows(theta, p):
    """All row configurations and their exact probabilities."""
    rows = list(itertools.product((0, 1), repeat=p))
    w = [math.exp(row_energy(z, theta, p)) for z in rows]
    total = sum(w)
    return rows, [v / total for v in w]


def oracle_log_partition(theta, n, p):
    rows = itertools.product((0, 1), repeat=p)
    return n * math.log(sum(math.exp(row_energy(z, theta, p)) for z in rows))


def naive_stats(x):
    x = np.asarray(x)
    n, p = x.shape
    items = [sum(int(x[i, j]) for i in range(n)) for j in range(p)]
    pairs = []
    for j in range(p):
        for k in range(j + 1, p):
            pairs.append(sum(int(x[i, j]) * int(x[i, k]) for i in range(n)))
    return items, pairs


def state_code(row):
    return int(sum(int(v) << j for j, v in enumerate(row)))


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)
