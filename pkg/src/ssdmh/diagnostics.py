"""Convergence and fit diagnostics."""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .inner import run_gibbs, sample_exact_rows
from .model import check_responses, conditional_logits, interaction_matrix, stats_vector


@dataclass
class PppConfig:
    """Posterior predictive p-value settings.

    Datasets are drawn exactly when ``p <= exact_max_p``, otherwise by
    ``sim_sweeps`` Gibbs sweeps from a uniformly random matrix
    (``None`` means ``n`` sweeps).
    """

    num_draws: int = 1000
    sim_sweeps: int | None = None
    seed: int = 0
    exact_max_p: int = 12

    def __post_init__(self):
        if self.num_draws < 1:
            raise ValueError("num_draws must be >= 1")
        if self.sim_sweeps is not None and self.sim_sweeps < 1:
            raise ValueError("sim_sweeps must be >= 1")


def batch_means_mcse(series) -> np.ndarray | float:
    """Batch-means Monte Carlo standard error.

    Uses ``floor(sqrt(L))`` equal batches (a trailing remainder is dropped).
    A 2-D input is treated column-wise.
    """
    a = np.asarray(series, dtype=float)
    L = a.shape[0]
    if L < 4:
        raise ValueError(f"need at least 4 values for batch means, got {L}")
    b = int(np.floor(np.sqrt(L)))
    size = L // b
    means = a[: b * size].reshape((b, size) + a.shape[1:]).mean(axis=1)
    out = means.std(axis=0, ddof=1) / np.sqrt(b)
    return float(out) if a.ndim == 1 else out


def thin_indices(length: int, num: int) -> np.ndarray:
    """``num`` evenly spaced indices into ``range(length)``, endpoints included."""
    if length < 1:
        raise ValueError("cannot thin an empty series")
    if num >= length:
        return np.arange(length)
    return np.unique(np.round(np.linspace(0, length - 1, num)).astype(np.int64))


def _draw_matrix(draws, q: int) -> np.ndarray:
    if hasattr(draws, "theta_hat"):
        arr = np.asarray(draws.theta_hat, dtype=float)
    elif isinstance(getattr(draws, "theta", None), np.ndarray) and draws.theta.ndim == 2:
        arr = draws.theta
    elif isinstance(draws, (list, tuple)) and draws and hasattr(draws[0], "selection"):
        arr = np.stack([r.theta for r in draws])
    else:
        arr = np.asarray(draws, dtype=float)
    if arr.ndim == 1:
        arr = arr[None, :]
    if arr.ndim != 2 or arr.shape[1] != q:
        raise ValueError(f"draws must have {q} columns, got shape {arr.shape}")
    return arr


def simulate_dataset(theta, n: int, p: int, rng, sweeps: int | None = None,
                     exact_max_p: int = 12) -> np.ndarray:
    """One ``n x p`` dataset from the model at ``theta``."""
    if p <= exact_max_p:
        return sample_exact_rows(theta, n, rng, p=p)
    y = (rng.random((n, p)) < 0.5).astype(np.uint8)
    h = conditional_logits(y, theta)
    run_gibbs(y, h, interaction_matrix(theta, p), n if sweeps is None else sweeps, rng)
    return y


def posterior_predictive_pvalues(draws, x, cfg: PppConfig) -> np.ndarray:
    """Estimate ``P(T(y) > T(x))`` for every sufficient statistic.

    ``draws`` is a chain (or record sequence, or draws-by-q array), thinned to
    ``cfg.num_draws`` evenly spaced states. A point estimate (a single theta
    vector or a ``NetworkEstimate``) is reused for every simulated dataset.
    """
    x = check_responses(x)
    n, p = x.shape
    q = p + p * (p - 1) // 2
    thetas = _draw_matrix(draws, q)
    if thetas.shape[0] == 0:
        raise ValueError("no posterior draws")
    if thetas.shape[0] == 1:
        idx = np.zeros(cfg.num_draws, dtype=np.int64)
    else:
        if thetas.shape[0] < cfg.num_draws:
            warnings.warn(f"only {thetas.shape[0]} draws available; using all of them")
        idx = thin_indices(thetas.shape[0], cfg.num_draws)
    rng = np.random.default_rng(cfg.seed)
    tx = stats_vector(x)
    exceed = np.zeros(q)
    for k in idx:
        y = simulate_dataset(thetas[k], n, p, rng, cfg.sim_sweeps, cfg.exact_max_p)
        exceed += stats_vector(y) > tx
    return exceed / idx.shape[0]


def adjacency_rmse(estimate, truth) -> float:
    """``sqrt(mean((A_hat - A)^2))`` over all ``p^2`` ordered pairs, diagonal included."""
    a = np.asarray(estimate, dtype=float)
    b = np.asarray(truth, dtype=float)
    if a.shape != b.shape or a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    return float(np.sqrt(np.mean((a - b) ** 2)))


def pvalue_rmse(pvals) -> float:
    """Root mean squared distance of p-values from 0.5 over an ``N x q`` array."""
    a = np.asarray(pvals, dtype=float)
    if a.size == 0:
        raise ValueError("no p-values")
    return float(np.sqrt(np.mean((a - 0.5) ** 2)))
