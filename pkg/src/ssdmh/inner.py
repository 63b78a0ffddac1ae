"""Auxiliary-data generation from the item-response model.

The DMH step needs a dataset ``y`` drawn (approximately) from ``f(. | theta')``.
It is produced by single-site Gibbs sweeps started at the observed data.
Rows are conditionally independent, so every row consumes its own slice
``U[:, r, :]`` of a block of uniforms; the result does not depend on the
order, or the thread, in which rows are processed.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .model import (
    ENUMERATION_MAX_P,
    _as_theta,
    _check_enumerable,
    check_responses,
    conditional_logits,
    interaction_matrix,
    row_probabilities,
)

# uniforms generated per chunk of sweeps; bounds memory for large n * p
_CHUNK_CELLS = 1 << 20

_threads = 1


def set_threads(k: int) -> None:
    """Use the row-parallel kernel when ``k > 1``. Results are unchanged."""
    global _threads
    if k < 1:
        raise ValueError("thread count must be >= 1")
    if k > 1:
        import numba

        numba.set_num_threads(min(k, numba.config.NUMBA_NUM_THREADS))
    _threads = k


@dataclass
class AuxChainConfig:
    """Inner Gibbs chain settings.

    ``sweeps=None`` means one full sweep per respondent (``m = n``).
    ``init`` is ``"observed"`` (start at the data, the DMH convention) or
    ``"random"`` (start from iid fair coins).
    """

    sweeps: int | None = None
    init: str = "observed"

    def __post_init__(self):
        if self.sweeps is not None and self.sweeps < 1:
            raise ValueError("sweeps must be >= 1")
        if self.init not in ("observed", "random"):
            raise ValueError(f"unknown init {self.init!r}")

    def resolve(self, n: int) -> int:
        return n if self.sweeps is None else self.sweeps


def gibbs_sweeps_from_uniforms(y, theta, U) -> np.ndarray:
    """Deterministic Gibbs sweeps driven by a supplied uniform block.

    ``U`` has shape ``(sweeps, n, p)``. Returns a new matrix; ``y`` is untouched.
    """
    y = np.array(y, dtype=np.uint8)
    theta = _as_theta(theta)
    p = y.shape[1]
    h = conditional_logits(y, theta)
    G = interaction_matrix(theta, p)
    U = np.asarray(U, dtype=float)
    if U.ndim != 3 or U.shape[1:] != y.shape:
        raise ValueError(f"uniform block must have shape (k, {y.shape[0]}, {p})")
    _kernels.gibbs_sweeps(y, h, G, np.ascontiguousarray(U))
    return y


def run_gibbs(y: np.ndarray, h: np.ndarray, G: np.ndarray, sweeps: int,
              rng: np.random.Generator) -> None:
    """In-place Gibbs sweeps with fields ``h`` kept current. No validation."""
    n, p = y.shape
    chunk = max(1, _CHUNK_CELLS // (n * p))
    kernel = _kernels.gibbs_sweeps_parallel if _threads > 1 else _kernels.gibbs_sweeps
    done = 0
    while done < sweeps:
        k = min(chunk, sweeps - done)
        kernel(y, h, G, rng.random((k, n, p)))
        done += k


def gibbs_sweep(y, theta, rng: np.random.Generator) -> np.ndarray:
    """One row-major sweep resampling every cell from its full conditional."""
    y = check_responses(y)
    return gibbs_sweeps_from_uniforms(y, theta, rng.random((1,) + y.shape))


def sample_auxiliary(x, theta, cfg: AuxChainConfig, rng: np.random.Generator) -> np.ndarray:
    """Auxiliary dataset: ``cfg`` sweeps of Gibbs at ``theta`` started from ``x``."""
    x = check_responses(x)
    theta = _as_theta(theta)
    n, p = x.shape
    if cfg.init == "observed":
        y = np.array(x, dtype=np.uint8)
    else:
        y = (rng.random((n, p)) < 0.5).astype(np.uint8)
    h = conditional_logits(y, theta)
    run_gibbs(y, h, interaction_matrix(theta, p), cfg.resolve(n), rng)
    return y


def sample_exact_rows(theta, n: int, rng, p: int | None = None,
                      max_p: int = ENUMERATION_MAX_P) -> np.ndarray:
    """``n`` iid rows from the exactly enumerated row distribution.

    ``rng`` may be a Generator or a seed.
    """
    theta = _as_theta(theta)
    if p is None:
        from .model import n_items

        p = n_items(theta.shape[0])
    _check_enumerable(p, max_p)
    rng = np.random.default_rng(rng)
    cdf = np.cumsum(row_probabilities(theta, p, max_p))
    cdf /= cdf[-1]
    states = np.searchsorted(cdf, rng.random(n), side="right")
    states = np.minimum(states, cdf.shape[0] - 1)
    return ((states[:, None] >> np.arange(p)) & 1).astype(np.uint8)


def single_site_kernel(theta, p: int, j: int) -> np.ndarray:
    """``2^p x 2^p`` transition matrix of one Gibbs update of item ``j``."""
    from .model import row_conditional_prob

    size = 1 << p
    P = np.zeros((size, size))
    bit = 1 << j
    for s in range(size):
        row = (s >> np.arange(p)) & 1
        on = row_conditional_prob(row, j, theta)
        P[s, s | bit] += on
        P[s, s & ~bit] += 1.0 - on
    return P
