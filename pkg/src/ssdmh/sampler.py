"""Spike-and-slab double Metropolis-Hastings sampler.

One iteration visits every parameter ``i = 0..q-1`` in turn: a DMH update of
``theta_i`` followed immediately by a Gibbs draw of its inclusion indicator
``lambda_i``. The spike variance ``sigma2`` and slab multiplier ``omega`` are
then refreshed by random-walk Metropolis-Hastings.

Priors::

    theta_i | lambda_i  ~ lambda_i N(0, omega^2 sigma2) + (1 - lambda_i) N(0, sigma2)
    lambda_i            ~ Bernoulli(1/2)
    1 / sigma2          ~ Uniform(4, 100)     (density of sigma2 ~ sigma2^-2 on [0.01, 0.25])
    omega - 1           ~ Exponential(rate 0.01)
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, Sequence

import numpy as np
from scipy.special import expit

from .inner import AuxChainConfig, run_gibbs
from .model import (
    ENUMERATION_MAX_P,
    ParamVector,
    check_responses,
    conditional_logits,
    interaction_matrix,
    log_partition_exact,
    log_row_partition,
    n_items,
    n_params,
    pair_arrays,
    stats_vector,
)

log = logging.getLogger(__name__)

SIGMA2_MIN = 1.0 / 100.0
SIGMA2_MAX = 1.0 / 4.0
OMEGA_RATE = 0.01
_LOG_2PI = math.log(2.0 * math.pi)


@dataclass
class SelectionState:
    """Inclusion indicators and spike-and-slab hyperparameters."""

    lam: np.ndarray
    sigma2: float
    omega: float

    def __post_init__(self):
        self.lam = np.asarray(self.lam, dtype=np.uint8)
        self.sigma2 = float(self.sigma2)
        self.omega = float(self.omega)
        if not np.isin(self.lam, (0, 1)).all():
            raise ValueError("inclusion indicators must be 0 or 1")
        if not SIGMA2_MIN <= self.sigma2 <= SIGMA2_MAX:
            raise ValueError(f"sigma2={self.sigma2} outside [{SIGMA2_MIN}, {SIGMA2_MAX}]")
        if not self.omega >= 1.0:
            raise ValueError(f"omega={self.omega} must be >= 1")

    def copy(self) -> "SelectionState":
        return SelectionState(self.lam.copy(), self.sigma2, self.omega)


@dataclass
class SamplerConfig:
    """Outer-chain settings.

    ``kernel="exact"`` replaces the auxiliary-variable step with the exact
    likelihood ratio (enumerated partition function); it is the reference
    chain for small ``p``. ``proposal`` is ``"random_walk"`` (centered at the
    current value) or ``"independent"`` (``N(0, independent_sd^2)``).
    """

    iterations: int = 10_000
    burn_in: int = 1_000
    proposal_sd_theta: float = 0.2
    proposal_sd_sigma2: float = 0.02
    proposal_sd_omega: float = 0.5
    aux: AuxChainConfig = field(default_factory=AuxChainConfig)
    seed: int = 0
    mcse_target: float = 0.03
    adaptive_stop: bool = False
    check_every: int = 500
    checkpoint_every: int = 1_000
    checkpoint_path: str | Path | None = None
    proposal: str = "random_walk"
    independent_sd: float = 1.0
    adapt: bool = True
    adapt_window: int = 50
    select_beta: bool = True
    kernel: str = "dmh"
    init_theta: np.ndarray | None = None
    verify_ratio: bool = False
    progress_every: int = 1_000
    max_params: int = 5_000
    max_record_bytes: int = 4 * 1024**3

    def __post_init__(self):
        if self.iterations < 1:
            raise ValueError("iterations must be >= 1")
        if not 0 <= self.burn_in < self.iterations:
            raise ValueError("need 0 <= burn_in < iterations")
        for name in ("proposal_sd_theta", "proposal_sd_sigma2", "proposal_sd_omega",
                     "independent_sd", "mcse_target"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.proposal not in ("random_walk", "independent"):
            raise ValueError(f"unknown proposal {self.proposal!r}")
        if self.kernel not in ("dmh", "exact"):
            raise ValueError(f"unknown kernel {self.kernel!r}")
        if self.checkpoint_every < 1 or self.adapt_window < 1 or self.check_every < 1:
            raise ValueError("checkpoint_every, adapt_window and check_every must be >= 1")


@dataclass
class ChainRecord:
    iter: int
    theta: np.ndarray
    selection: SelectionState


@dataclass
class NetworkEstimate:
    """Point estimate of the item network.

    ``theta_hat`` is zero wherever ``pip < 0.5``; ``signed_adjacency`` holds
    the signs of the estimated interactions.
    """

    theta_hat: np.ndarray
    pip: np.ndarray
    signed_adjacency: np.ndarray

    @property
    def p(self) -> int:
        return self.signed_adjacency.shape[0]

    @property
    def params(self) -> ParamVector:
        return ParamVector.from_flat(self.theta_hat, self.p)

    def edges(self) -> list[tuple[int, int, float, float]]:
        """Retained interactions as ``(j, k, gamma_hat, pip)``."""
        p = self.p
        rows, cols = pair_arrays(p)
        out = []
        for idx, (j, k) in enumerate(zip(rows, cols)):
            g = self.theta_hat[p + idx]
            if g != 0.0:
                out.append((int(j), int(k), float(g), float(self.pip[p + idx])))
        return out


def signed_adjacency(theta, p: int) -> np.ndarray:
    """``sign(gamma_jk)`` as a symmetric integer matrix with zero diagonal."""
    return np.sign(interaction_matrix(theta, p)).astype(np.int8)


class Chain(Sequence):
    """Stored post-burn-in states, kept as arrays.

    Indexing yields :class:`ChainRecord`.
    """

    def __init__(self, iters, theta, lam, sigma2, omega, acceptance=None):
        self.iters = np.asarray(iters, dtype=np.int64)
        self.theta = np.asarray(theta, dtype=float)
        self.lam = np.asarray(lam, dtype=np.uint8)
        self.sigma2 = np.asarray(sigma2, dtype=float)
        self.omega = np.asarray(omega, dtype=float)
        self.acceptance = acceptance

    @classmethod
    def from_records(cls, records: Sequence[ChainRecord]) -> "Chain":
        if isinstance(records, Chain):
            return records
        records = list(records)
        if not records:
            raise ValueError("no chain records")
        return cls(
            [r.iter for r in records],
            np.stack([r.theta for r in records]),
            np.stack([r.selection.lam for r in records]),
            [r.selection.sigma2 for r in records],
            [r.selection.omega for r in records],
        )

    @property
    def p(self) -> int:
        return n_items(self.theta.shape[1])

    def __len__(self) -> int:
        return self.iters.shape[0]

    def __getitem__(self, i):
        if isinstance(i, slice):
            return Chain(self.iters[i], self.theta[i], self.lam[i],
                         self.sigma2[i], self.omega[i], self.acceptance)
        return ChainRecord(
            int(self.iters[i]),
            self.theta[i].copy(),
            SelectionState(self.lam[i].copy(), self.sigma2[i], self.omega[i]),
        )

    def __iter__(self) -> Iterator[ChainRecord]:
        for i in range(len(self)):
            yield self[i]


# ---------------------------------------------------------------- priors


def _normal_logpdf(x, var):
    return -0.5 * (_LOG_2PI + np.log(var)) - 0.5 * np.square(x) / var


def spike_slab_log_prior(theta_i: float, lambda_i: int, sigma2: float, omega: float) -> float:
    """Log density of ``theta_i`` under its spike (``lambda_i=0``) or slab."""
    var = omega * omega * sigma2 if lambda_i else sigma2
    return float(_normal_logpdf(theta_i, var))


def log_sigma2_prior(sigma2: float) -> float:
    if not SIGMA2_MIN <= sigma2 <= SIGMA2_MAX:
        return -math.inf
    return -2.0 * math.log(sigma2) - math.log(96.0)


def log_omega_prior(omega: float) -> float:
    if omega < 1.0:
        return -math.inf
    return math.log(OMEGA_RATE) - OMEGA_RATE * (omega - 1.0)


def inclusion_probability(theta_i: float, sigma2: float, omega: float) -> float:
    """``a / (a + b)`` with slab density ``a`` and spike density ``b``."""
    la = _normal_logpdf(theta_i, omega * omega * sigma2)
    lb = _normal_logpdf(theta_i, sigma2)
    return float(expit(la - lb))


def update_lambda_coordinate(theta_i: float, state: SelectionState,
                             rng: np.random.Generator) -> int:
    """Gibbs draw of one inclusion indicator."""
    return int(rng.random() < inclusion_probability(theta_i, state.sigma2, state.omega))


def _theta_log_prior(theta, lam, sigma2, omega) -> float:
    var = np.where(lam == 1, omega * omega * sigma2, sigma2)
    return float(np.sum(_normal_logpdf(theta, var)))


def sigma2_log_target(sigma2, theta, lam, omega) -> float:
    """``log pi(theta | lambda, sigma2, omega) + log pi(sigma2)``."""
    lp = log_sigma2_prior(sigma2)
    if lp == -math.inf:
        return lp
    return _theta_log_prior(theta, lam, sigma2, omega) + lp


def omega_log_target(omega, theta, lam, sigma2) -> float:
    """``log pi(theta_slab | sigma2, omega) + log pi(omega)``; spike terms are constant."""
    lp = log_omega_prior(omega)
    if lp == -math.inf:
        return lp
    slab = lam == 1
    return float(np.sum(_normal_logpdf(theta[slab], omega * omega * sigma2))) + lp


def update_sigma2(state: SelectionState, theta, rng: np.random.Generator,
                  sd: float = 0.02) -> tuple[float, bool]:
    """Random-walk MH step for the spike variance."""
    cur = state.sigma2
    prop = cur + sd * rng.standard_normal()
    u = rng.random()
    if not SIGMA2_MIN <= prop <= SIGMA2_MAX:
        return cur, False
    la = (sigma2_log_target(prop, theta, state.lam, state.omega)
          - sigma2_log_target(cur, theta, state.lam, state.omega))
    if math.log(u) < la:
        return prop, True
    return cur, False


def update_omega(state: SelectionState, theta, rng: np.random.Generator,
                 sd: float = 0.5) -> tuple[float, bool]:
    """Random-walk MH step for the slab multiplier; proposals below 1 are rejected."""
    cur = state.omega
    prop = cur + sd * rng.standard_normal()
    u = rng.random()
    if prop < 1.0:
        return cur, False
    la = (omega_log_target(prop, theta, state.lam, state.sigma2)
          - omega_log_target(cur, theta, state.lam, state.sigma2))
    if math.log(u) < la:
        return prop, True
    return cur, False


def draw_initial_state(q: int, rng: np.random.Generator) -> tuple[np.ndarray, SelectionState]:
    """All indicators on, ``theta ~ U(-5, 5)``, hyperparameters from their priors."""
    theta = rng.uniform(-5.0, 5.0, size=q)
    sigma2 = 1.0 / rng.uniform(4.0, 100.0)
    omega = 1.0 + rng.exponential(1.0 / OMEGA_RATE)
    return theta, SelectionState(np.ones(q, dtype=np.uint8), sigma2, omega)


# ------------------------------------------------------- theta updates


def dmh_log_ratio(delta: float, tx_i: float, ty_i: float, log_prior_new: float,
                  log_prior_old: float, log_q_ratio: float = 0.0) -> float:
    """Log acceptance ratio of a DMH move of one coordinate.

    With ``theta'`` differing from ``theta`` only at ``i`` by ``delta``, the
    four normalizing constants cancel and the likelihood factor reduces to
    ``exp(delta * (T_i(x) - T_i(y)))``.
    """
    return delta * (float(tx_i) - float(ty_i)) + log_prior_new - log_prior_old + log_q_ratio


def full_step_log_ratio(x, y, theta, theta_new) -> float:
    """Likelihood part of the DMH ratio from normalized densities (small p).

    ``log f(x|theta') + log f(y|theta) - log f(x|theta) - log f(y|theta')``.
    """
    x = np.asarray(x)
    n, p = x.shape
    theta = np.asarray(theta, dtype=float)
    theta_new = np.asarray(theta_new, dtype=float)
    tx = stats_vector(x)
    ty = stats_vector(y)
    lk_new = log_partition_exact(theta_new, n, p)
    lk_old = log_partition_exact(theta, n, p)
    return ((theta_new @ tx - lk_new) + (theta @ ty - lk_old)
            - (theta @ tx - lk_old) - (theta_new @ ty - lk_new))


def _coord_stat(z: np.ndarray, i: int, p: int, pairs) -> int:
    if i < p:
        return int(z[:, i].sum())
    j, k = pairs[i - p]
    return int(np.count_nonzero(z[:, j] & z[:, k]))


class _Workspace:
    """Data, statistics and cached conditional logits for the current theta."""

    def __init__(self, x: np.ndarray, theta: np.ndarray, cfg: SamplerConfig):
        self.x = x
        self.n, self.p = x.shape
        self.theta = np.array(theta, dtype=float)
        self.tx = stats_vector(x).astype(float)
        self.pairs = np.column_stack(pair_arrays(self.p))
        self.cfg = cfg
        self.sweeps = cfg.aux.resolve(self.n)
        self.G = interaction_matrix(self.theta, self.p)
        self.h = conditional_logits(x, self.theta)
        self.xf = x.astype(float)
        if cfg.kernel == "exact":
            self.log_z = log_row_partition(self.theta, self.p)

    def _shift(self, h, G, i, delta):
        p = self.p
        if i < p:
            h[:, i] += delta
        else:
            j, k = self.pairs[i - p]
            h[:, j] += delta * self.xf[:, k]
            h[:, k] += delta * self.xf[:, j]
            if G is not None:
                G[j, k] += delta
                G[k, j] += delta

    def auxiliary(self, i: int, delta: float, rng) -> np.ndarray:
        h = self.h.copy()
        G = self.G.copy()
        self._shift(h, G, i, delta)
        if self.cfg.aux.init == "observed":
            y = np.array(self.x, dtype=np.uint8)
        else:
            y = (rng.random(self.x.shape) < 0.5).astype(np.uint8)
            h = conditional_logits(y, _with(self.theta, i, self.theta[i] + delta))
        run_gibbs(y, h, G, self.sweeps, rng)
        return y

    def commit(self, i: int, new: float) -> None:
        delta = new - self.theta[i]
        self._shift(self.h, self.G, i, delta)
        self.theta[i] = new


def _with(theta, i, value):
    out = np.array(theta, dtype=float)
    out[i] = value
    return out


def _propose(cur: float, sd: float, cfg: SamplerConfig, rng) -> tuple[float, float]:
    """Proposal and ``log q(cur | prop) - log q(prop | cur)``."""
    if cfg.proposal == "random_walk":
        return cur + sd * rng.standard_normal(), 0.0
    s2 = cfg.independent_sd ** 2
    prop = cfg.independent_sd * rng.standard_normal()
    return prop, float(_normal_logpdf(cur, s2) - _normal_logpdf(prop, s2))


def _theta_step(ws: _Workspace, i: int, sel: SelectionState, sd: float,
                rng) -> tuple[float, bool]:
    cfg = ws.cfg
    cur = ws.theta[i]
    prop, lq = _propose(cur, sd, cfg, rng)
    lam_i = sel.lam[i]
    lp_new = spike_slab_log_prior(prop, lam_i, sel.sigma2, sel.omega)
    lp_old = spike_slab_log_prior(cur, lam_i, sel.sigma2, sel.omega)
    delta = prop - cur
    if cfg.kernel == "dmh":
        y = ws.auxiliary(i, delta, rng)
        ty = _coord_stat(y, i, ws.p, ws.pairs)
        la = dmh_log_ratio(delta, ws.tx[i], ty, lp_new, lp_old, lq)
        if cfg.verify_ratio and ws.p <= 4:
            full = full_step_log_ratio(ws.x, y, ws.theta, _with(ws.theta, i, prop))
            implemented = delta * (ws.tx[i] - ty)
            if abs(full - implemented) > 1e-10 * max(1.0, abs(full)):
                raise AssertionError(
                    f"DMH ratio mismatch at coordinate {i}: {implemented} vs {full}")
        new_log_z = None
    else:
        new_log_z = log_row_partition(_with(ws.theta, i, prop), ws.p)
        la = delta * ws.tx[i] - ws.n * (new_log_z - ws.log_z) + lp_new - lp_old + lq
    if math.log(rng.random()) < la:
        ws.commit(i, prop)
        if new_log_z is not None:
            ws.log_z = new_log_z
        return prop, True
    return cur, False


def dmh_update_coordinate(i: int, state: ChainRecord, x, cfg: SamplerConfig,
                          rng: np.random.Generator, sd: float | None = None
                          ) -> tuple[float, bool]:
    """One DMH (or exact, per ``cfg.kernel``) update of ``theta_i``.

    Returns the new value of the coordinate and whether the move was accepted.
    ``state`` is not modified.
    """
    x = check_responses(x)
    q = n_params(x.shape[1])
    if not 0 <= i < q:
        raise IndexError(f"coordinate {i} out of range for q={q}")
    ws = _Workspace(x, state.theta, cfg)
    return _theta_step(ws, i, state.selection,
                       cfg.proposal_sd_theta if sd is None else sd, rng)


# ------------------------------------------------------------- driver


def _batch_mcse_columns(a: np.ndarray) -> np.ndarray:
    from .diagnostics import batch_means_mcse

    return batch_means_mcse(a)


def run_chain(x, cfg: SamplerConfig) -> Chain:
    """Run the spike-and-slab DMH Gibbs sampler and return post-burn-in states."""
    x = check_responses(x)
    n, p = x.shape
    q = n_params(p)
    if q > cfg.max_params:
        raise ValueError(
            f"q={q} parameters exceeds max_params={cfg.max_params}; "
            "raise SamplerConfig.max_params if the memory is available")
    kept = cfg.iterations - cfg.burn_in
    if kept * q * 9 > cfg.max_record_bytes:
        raise ValueError(
            f"storing {kept} states of {q} parameters needs ~{kept * q * 9 / 1e9:.1f} GB; "
            "reduce iterations or raise SamplerConfig.max_record_bytes")
    if cfg.kernel == "exact" and p > ENUMERATION_MAX_P:
        raise ValueError(f"exact kernel needs p <= {ENUMERATION_MAX_P}")

    rng = np.random.default_rng(cfg.seed)
    theta0, sel = draw_initial_state(q, rng)
    if cfg.init_theta is not None:
        theta0 = np.array(cfg.init_theta, dtype=float)
        if theta0.shape != (q,):
            raise ValueError(f"init_theta must have length {q}")
    if not cfg.select_beta:
        sel.lam[:p] = 1

    ws = _Workspace(x, theta0, cfg)
    sd = np.full(q, cfg.proposal_sd_theta)
    sd_s2, sd_om = cfg.proposal_sd_sigma2, cfg.proposal_sd_omega
    win_acc = np.zeros(q)
    win_s2 = win_om = 0
    tot_acc = np.zeros(q)
    tot_s2 = tot_om = 0

    iters = np.empty(kept, dtype=np.int64)
    th = np.empty((kept, q))
    lm = np.empty((kept, q), dtype=np.uint8)
    s2 = np.empty(kept)
    om = np.empty(kept)
    stored = 0

    writer = None
    if cfg.checkpoint_path is not None:
        from .io import ChainWriter

        writer = ChainWriter(cfg.checkpoint_path, p=p, seed=cfg.seed)
    flushed = 0

    try:
        for t in range(cfg.iterations):
            for i in range(q):
                _, acc = _theta_step(ws, i, sel, sd[i], rng)
                win_acc[i] += acc
                if t >= cfg.burn_in:
                    tot_acc[i] += acc
                if cfg.select_beta or i >= p:
                    sel.lam[i] = update_lambda_coordinate(ws.theta[i], sel, rng)
            sel.sigma2, acc = update_sigma2(sel, ws.theta, rng, sd_s2)
            win_s2 += acc
            sel.omega, acc_w = update_omega(sel, ws.theta, rng, sd_om)
            win_om += acc_w
            if t >= cfg.burn_in:
                tot_s2 += acc
                tot_om += acc_w

            if cfg.adapt and t < cfg.burn_in and (t + 1) % cfg.adapt_window == 0:
                sd = _adapt(sd, win_acc / cfg.adapt_window)
                sd_s2 = float(_adapt(np.array([sd_s2]), np.array([win_s2 / cfg.adapt_window]),
                                     hi=0.1)[0])
                sd_om = float(_adapt(np.array([sd_om]), np.array([win_om / cfg.adapt_window]),
                                     hi=50.0)[0])
                win_acc[:] = 0
                win_s2 = win_om = 0

            if t >= cfg.burn_in:
                iters[stored] = t
                th[stored] = ws.theta
                lm[stored] = sel.lam
                s2[stored] = sel.sigma2
                om[stored] = sel.omega
                stored += 1
                if writer is not None and stored - flushed >= cfg.checkpoint_every:
                    writer.write_arrays(iters[flushed:stored], th[flushed:stored],
                                        lm[flushed:stored], s2[flushed:stored],
                                        om[flushed:stored])
                    flushed = stored

            if cfg.progress_every and (t + 1) % cfg.progress_every == 0:
                msg = f"iteration {t + 1}/{cfg.iterations}"
                if stored >= 16:
                    msg += f", max MCSE {_batch_mcse_columns(th[:stored]).max():.4f}"
                log.info(msg)

            if (cfg.adaptive_stop and stored >= max(400, cfg.check_every)
                    and stored % cfg.check_every == 0):
                if _batch_mcse_columns(th[:stored]).max() <= cfg.mcse_target:
                    log.info("MCSE target %.3g reached at iteration %d", cfg.mcse_target, t + 1)
                    break
        if writer is not None and stored > flushed:
            writer.write_arrays(iters[flushed:stored], th[flushed:stored], lm[flushed:stored],
                                s2[flushed:stored], om[flushed:stored])
    finally:
        if writer is not None:
            writer.close()

    denom = max(stored, 1)
    acceptance = {
        "theta": tot_acc / denom,
        "sigma2": tot_s2 / denom,
        "omega": tot_om / denom,
        "proposal_sd_theta": sd,
    }
    return Chain(iters[:stored], th[:stored], lm[:stored], s2[:stored], om[:stored],
                 acceptance)


def _adapt(sd: np.ndarray, rate: np.ndarray, lo: float = 1e-3, hi: float = 5.0) -> np.ndarray:
    out = sd.copy()
    out[rate < 0.2] *= 0.7
    out[rate > 0.4] *= 1.4
    return np.clip(out, lo, hi)


def posterior_summary(records) -> NetworkEstimate:
    """PIPs, PIP-thresholded posterior means and the signed adjacency matrix."""
    chain = Chain.from_records(records)
    if len(chain) == 0:
        raise ValueError("no chain records")
    pip = chain.lam.mean(axis=0)
    theta_hat = np.where(pip < 0.5, 0.0, chain.theta.mean(axis=0))
    p = chain.p
    return NetworkEstimate(theta_hat, pip, signed_adjacency(theta_hat, p))
