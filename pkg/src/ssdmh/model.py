"""Pairwise binary item-response model (inhomogeneous ERGM / Ising form).

A respondent's row ``z in {0,1}^p`` has unnormalized log-probability

    sum_j beta_j z_j + sum_{j<k} gamma_jk z_j z_k

and rows are independent, so the matrix-level normalizer is ``n * log Z_row``.
Parameters are stored as one flat vector ``theta = (beta, gamma)`` of length
``q = p + p(p-1)/2`` with ``gamma`` in lexicographic ``(j, k), j < k`` order.
All indices are 0-based.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import expit, logsumexp

#: Largest item count for which 2^p row states are enumerated.
ENUMERATION_MAX_P = 20

_ENUM_BLOCK = 1 << 15


def n_params(p: int) -> int:
    """Total parameter count ``q = p + p(p-1)/2``."""
    return p + p * (p - 1) // 2


def n_items(q: int) -> int:
    """Invert :func:`n_params`; raises if ``q`` is not a valid count."""
    p = int(round((np.sqrt(8 * q + 1) - 1) / 2))
    if n_params(p) != q:
        raise ValueError(f"{q} is not p + p(p-1)/2 for any integer p")
    return p


def pair_index(j: int, k: int, p: int) -> int:
    """Position of ``gamma_jk`` (``j < k``) inside the gamma block."""
    if j > k:
        j, k = k, j
    if not 0 <= j < k < p:
        raise IndexError(f"invalid pair ({j}, {k}) for p={p}")
    return j * (2 * p - j - 1) // 2 + (k - j - 1)


def pair_from_index(idx: int, p: int) -> tuple[int, int]:
    """Inverse of :func:`pair_index`."""
    m = p * (p - 1) // 2
    if not 0 <= idx < m:
        raise IndexError(f"pair index {idx} out of range for p={p}")
    j = 0
    while idx >= p - j - 1:
        idx -= p - j - 1
        j += 1
    return j, j + 1 + idx


def pair_arrays(p: int) -> tuple[np.ndarray, np.ndarray]:
    """Row and column arrays of all pairs in gamma order."""
    return np.triu_indices(p, k=1)


def interaction_matrix(theta: np.ndarray, p: int) -> np.ndarray:
    """Symmetric ``p x p`` matrix of gamma with a zero diagonal."""
    theta = np.asarray(theta, dtype=float)
    G = np.zeros((p, p))
    rows, cols = pair_arrays(p)
    G[rows, cols] = theta[p:]
    G[cols, rows] = theta[p:]
    return G


def check_responses(x) -> np.ndarray:
    """Validate an item-response matrix and return it as a read-only uint8 array.

    Raises ``ValueError`` on non-binary cells, fewer than one respondent or
    fewer than two items.
    """
    arr = np.asarray(x)
    if arr.ndim != 2:
        raise ValueError(f"response matrix must be 2-D, got shape {arr.shape}")
    n, p = arr.shape
    if n < 1 or p < 2:
        raise ValueError(f"need n >= 1 and p >= 2, got n={n}, p={p}")
    if arr.dtype == bool:
        arr = arr.astype(np.uint8)
    bad = ~np.isin(arr, (0, 1))
    if bad.any():
        i, j = np.argwhere(bad)[0]
        raise ValueError(f"non-binary value {arr[i, j]!r} at row {i}, column {j}")
    out = np.array(arr, dtype=np.uint8)
    out.flags.writeable = False
    return out


@dataclass(frozen=True)
class ParamVector:
    """Item easiness ``beta`` (length p) and pair interactions ``gamma``."""

    beta: np.ndarray
    gamma: np.ndarray

    def __post_init__(self):
        beta = np.asarray(self.beta, dtype=float)
        gamma = np.asarray(self.gamma, dtype=float)
        p = beta.shape[0]
        if gamma.shape != (p * (p - 1) // 2,):
            raise ValueError(f"gamma must have length {p * (p - 1) // 2} for p={p}")
        if not (np.all(np.isfinite(beta)) and np.all(np.isfinite(gamma))):
            raise ValueError("parameters must be finite")
        object.__setattr__(self, "beta", beta)
        object.__setattr__(self, "gamma", gamma)

    @property
    def p(self) -> int:
        return self.beta.shape[0]

    @property
    def q(self) -> int:
        return n_params(self.p)

    @property
    def flat(self) -> np.ndarray:
        return np.concatenate([self.beta, self.gamma])

    @classmethod
    def from_flat(cls, theta, p: int | None = None) -> "ParamVector":
        theta = np.asarray(theta, dtype=float)
        if p is None:
            p = n_items(theta.shape[0])
        if theta.shape != (n_params(p),):
            raise ValueError(f"expected {n_params(p)} parameters for p={p}, got {theta.shape}")
        return cls(theta[:p], theta[p:])

    @classmethod
    def zeros(cls, p: int) -> "ParamVector":
        return cls(np.zeros(p), np.zeros(p * (p - 1) // 2))

    def gamma_matrix(self) -> np.ndarray:
        return interaction_matrix(self.flat, self.p)


@dataclass(frozen=True)
class SuffStats:
    """Column totals and pairwise co-occurrence counts of a response matrix."""

    item_counts: np.ndarray
    pair_counts: np.ndarray
    n: int

    @property
    def p(self) -> int:
        return self.item_counts.shape[0]

    @property
    def flat(self) -> np.ndarray:
        return np.concatenate([self.item_counts, self.pair_counts])


def _as_theta(theta) -> np.ndarray:
    if isinstance(theta, ParamVector):
        return theta.flat
    return np.asarray(theta, dtype=float)


def stats_vector(x: np.ndarray) -> np.ndarray:
    """Flat sufficient statistics (length q) without validation."""
    x = np.asarray(x, dtype=np.int64)
    p = x.shape[1]
    cross = x.T @ x
    rows, cols = pair_arrays(p)
    return np.concatenate([np.diag(cross), cross[rows, cols]])


def sufficient_statistics(x) -> SuffStats:
    """Item counts ``sum_i x_ij`` and pair counts ``sum_i x_ij x_ik``."""
    x = check_responses(x)
    t = stats_vector(x)
    p = x.shape[1]
    return SuffStats(item_counts=t[:p], pair_counts=t[p:], n=x.shape[0])


def unnormalized_log_density(stats, theta) -> float:
    """``theta . T(x)``, the log of the model density up to ``log kappa(theta)``."""
    t = stats.flat if isinstance(stats, SuffStats) else np.asarray(stats)
    theta = _as_theta(theta)
    if t.shape != theta.shape:
        raise ValueError(
            f"statistics have length {t.shape[0]} but theta has length {theta.shape[0]}"
        )
    return float(np.dot(theta, t))


def _row_states(p: int, start: int, stop: int) -> np.ndarray:
    codes = np.arange(start, stop, dtype=np.int64)
    return ((codes[:, None] >> np.arange(p)) & 1).astype(np.float64)


def _check_enumerable(p: int, max_p: int) -> None:
    if p > max_p:
        raise ValueError(
            f"exact enumeration needs 2^{p} row states (bound is p <= {max_p}); "
            "use the Gibbs-based samplers instead"
        )


def row_log_weights(theta, p: int, max_p: int = ENUMERATION_MAX_P) -> np.ndarray:
    """Unnormalized log-probabilities of all ``2^p`` row states.

    State ``s`` has ``z_j = (s >> j) & 1``.
    """
    _check_enumerable(p, max_p)
    theta = _as_theta(theta)
    beta = theta[:p]
    G = interaction_matrix(theta, p)
    out = np.empty(1 << p)
    for start in range(0, 1 << p, _ENUM_BLOCK):
        stop = min(start + _ENUM_BLOCK, 1 << p)
        Z = _row_states(p, start, stop)
        out[start:stop] = Z @ beta + 0.5 * np.einsum("sj,jk,sk->s", Z, G, Z)
    return out


def log_row_partition(theta, p: int, max_p: int = ENUMERATION_MAX_P) -> float:
    """``log Z_row``, the single-respondent log normalizer."""
    return float(logsumexp(row_log_weights(theta, p, max_p)))


def log_partition_exact(theta, n: int, p: int | None = None,
                        max_p: int = ENUMERATION_MAX_P) -> float:
    """Exact ``log kappa(theta) = n * log Z_row`` by enumerating row states."""
    theta = _as_theta(theta)
    if p is None:
        p = n_items(theta.shape[0])
    return n * log_row_partition(theta, p, max_p)


def row_probabilities(theta, p: int, max_p: int = ENUMERATION_MAX_P) -> np.ndarray:
    """Normalized probabilities of all ``2^p`` row states."""
    w = row_log_weights(theta, p, max_p)
    return np.exp(w - logsumexp(w))


def row_conditional_prob(row, j: int, theta) -> float:
    """``P(z_j = 1 | z_{-j}, theta)`` for a single row."""
    theta = _as_theta(theta)
    row = np.asarray(row, dtype=float)
    p = row.shape[0]
    if not 0 <= j < p:
        raise IndexError(f"item index {j} out of range for p={p}")
    G = interaction_matrix(theta, p)
    return float(expit(theta[j] + G[j] @ row))


def conditional_logits(x: np.ndarray, theta) -> np.ndarray:
    """Matrix of ``beta_j + sum_k gamma_jk x_ik`` for every cell."""
    theta = _as_theta(theta)
    p = x.shape[1]
    return theta[:p] + np.asarray(x, dtype=float) @ interaction_matrix(theta, p)


def log_likelihood_exact(x, theta) -> float:
    """Exact log-likelihood of a response matrix (small p only)."""
    x = check_responses(x)
    n, p = x.shape
    theta = _as_theta(theta)
    return float(theta @ stats_vector(x)) - log_partition_exact(theta, n, p)
