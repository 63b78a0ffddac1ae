"""Node-wise l1-penalized logistic regression with EBIC selection (elasso).

Each item is regressed on all others; the penalty for each node is chosen by
EBIC along a log-spaced path and the two estimates of every interaction are
combined with an AND or OR rule.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.special import logit

from . import _kernels
from .model import check_responses, n_params, pair_index
from .sampler import NetworkEstimate, signed_adjacency


@dataclass
class ElassoConfig:
    """``lambda_path=None`` builds 100 log-spaced penalties per node from
    ``lambda_max`` down to ``0.01 * lambda_max``."""

    lambda_path: np.ndarray | None = None
    n_lambda: int = 100
    lambda_min_ratio: float = 0.01
    ebic_gamma: float = 0.25
    rule: str = "and"
    max_iter: int = 1000
    tol: float = 1e-7
    intercept_bound: float = 20.0

    def __post_init__(self):
        self.rule = self.rule.lower()
        if self.rule not in ("and", "or"):
            raise ValueError(f"rule must be 'and' or 'or', got {self.rule!r}")
        if not 0.0 <= self.ebic_gamma <= 1.0:
            raise ValueError("ebic_gamma must lie in [0, 1]")
        if self.tol <= 0 or self.max_iter < 1:
            raise ValueError("tol must be positive and max_iter >= 1")
        if self.lambda_path is not None:
            path = np.asarray(self.lambda_path, dtype=float)
            if path.ndim != 1 or path.size == 0 or np.any(path <= 0):
                raise ValueError("lambda_path must be a non-empty vector of positive penalties")
            if np.any(np.diff(path) > 0):
                raise ValueError("lambda_path must be decreasing")
            self.lambda_path = path


class NodeFit(NamedTuple):
    intercept: float
    coef: np.ndarray
    converged: bool
    degenerate: bool
    objective: np.ndarray


def soft_threshold(z, t):
    return np.sign(z) * np.maximum(np.abs(z) - t, 0.0)


def node_objective(X, yv, intercept, coef, penalty) -> float:
    """Negative conditional log-likelihood plus ``penalty * ||coef||_1``."""
    eta = intercept + X @ coef
    return float(np.sum(np.logaddexp(0.0, eta) - yv * eta) + penalty * np.abs(coef).sum())


def node_loglik(X, yv, intercept, coef) -> float:
    eta = intercept + X @ coef
    return float(-np.sum(np.logaddexp(0.0, eta) - yv * eta))


def _design(x: np.ndarray, j: int) -> tuple[np.ndarray, np.ndarray]:
    xf = np.asarray(x, dtype=float)
    return np.ascontiguousarray(np.delete(xf, j, axis=1)), xf[:, j].copy()


def _degenerate(yv: np.ndarray, m: int, bound: float) -> NodeFit | None:
    mean = yv.mean()
    if 0.0 < mean < 1.0:
        return None
    warnings.warn("constant response column; intercept capped and coefficients zeroed")
    return NodeFit(bound if mean == 1.0 else -bound, np.zeros(m), True, True, np.zeros(1))


def _intercept_only(X, yv, penalty) -> NodeFit:
    coef = np.zeros(X.shape[1])
    b0 = float(logit(yv.mean()))
    obj = node_objective(X, yv, b0, coef, penalty)
    return NodeFit(b0, coef, True, False, np.array([obj]))


def _cd(X, yv, penalty, start, cfg) -> NodeFit:
    # at or above lambda_max the solution is exactly intercept-only; solving it
    # numerically can leave 1e-17 coefficients that would count as edges
    if penalty >= float(np.max(np.abs(X.T @ (yv - yv.mean())))):
        return _intercept_only(X, yv, penalty)
    b = np.array(start, dtype=float)
    trace = np.full(cfg.max_iter + 1, np.nan)
    it = _kernels.lasso_logistic_cd(X, yv, float(penalty), b, cfg.max_iter, cfg.tol, trace)
    used = abs(it)
    return NodeFit(float(b[0]), b[1:].copy(), it > 0, False, trace[: used + 1])


def nodewise_l1_logistic(x, j: int, penalty: float, cfg: ElassoConfig | None = None) -> NodeFit:
    """Fit item ``j`` on the remaining items with an l1 penalty (intercept free).

    Coefficients are returned in item order with item ``j`` removed.
    """
    cfg = cfg or ElassoConfig()
    x = check_responses(x)
    if penalty < 0:
        raise ValueError("penalty must be non-negative")
    X, yv = _design(x, j)
    deg = _degenerate(yv, X.shape[1], cfg.intercept_bound)
    if deg is not None:
        return deg
    start = np.zeros(X.shape[1] + 1)
    start[0] = logit(yv.mean())
    return _cd(X, yv, penalty, start, cfg)


def lambda_max(x, j: int) -> float:
    """Smallest penalty at which every coefficient of node ``j`` is zero."""
    X, yv = _design(check_responses(x), j)
    return float(np.max(np.abs(X.T @ (yv - yv.mean()))))


def ebic_score(loglik: float, df: int, n: int, p: int, gamma: float) -> float:
    """Extended BIC: ``-2 loglik + df log n + 2 gamma df log(p - 1)``."""
    return -2.0 * loglik + df * math.log(n) + 2.0 * gamma * df * math.log(p - 1)


def penalty_path(x, j: int, cfg: ElassoConfig) -> np.ndarray:
    if cfg.lambda_path is not None:
        return cfg.lambda_path
    top = lambda_max(x, j)
    if top == 0.0:
        return np.array([1.0])
    return np.geomspace(top, cfg.lambda_min_ratio * top, cfg.n_lambda)


def node_path(x, j: int, cfg: ElassoConfig) -> tuple[np.ndarray, list[NodeFit]]:
    """Warm-started fits of node ``j`` along its penalty path."""
    x = check_responses(x)
    X, yv = _design(x, j)
    deg = _degenerate(yv, X.shape[1], cfg.intercept_bound)
    path = penalty_path(x, j, cfg)
    if deg is not None:
        return path, [deg] * len(path)
    b = np.zeros(X.shape[1] + 1)
    b[0] = logit(yv.mean())
    fits = []
    for pen in path:
        fit = _cd(X, yv, pen, b, cfg)
        fits.append(fit)
        b = np.concatenate([[fit.intercept], fit.coef])
    return path, fits


def select_node(x, j: int, cfg: ElassoConfig) -> NodeFit:
    """EBIC-optimal fit of node ``j``; ties go to the larger penalty."""
    x = check_responses(x)
    n, p = x.shape
    X, yv = _design(x, j)
    path, fits = node_path(x, j, cfg)
    if fits[0].degenerate:
        return fits[0]
    scores = [
        ebic_score(node_loglik(X, yv, f.intercept, f.coef), int(np.count_nonzero(f.coef)),
                   n, p, cfg.ebic_gamma)
        for f in fits
    ]
    return fits[int(np.argmin(scores))]


def combine_nodewise(coefs: np.ndarray, rule: str) -> np.ndarray:
    """Symmetric interaction matrix from a ``p x p`` matrix of node-wise coefficients.

    ``coefs[j, k]`` is the coefficient of item ``k`` in the regression of ``j``.
    """
    a, b = coefs, coefs.T
    nz_a, nz_b = a != 0, b != 0
    keep = (nz_a & nz_b) if rule == "and" else (nz_a | nz_b)
    out = np.where(keep, 0.5 * (a + b), 0.0)
    np.fill_diagonal(out, 0.0)
    return out


def fit_elasso(x, cfg: ElassoConfig | None = None) -> NetworkEstimate:
    """Elasso network estimate: intercepts as easiness, combined interactions."""
    cfg = cfg or ElassoConfig()
    x = check_responses(x)
    p = x.shape[1]
    coefs = np.zeros((p, p))
    beta = np.zeros(p)
    for j in range(p):
        fit = select_node(x, j, cfg)
        beta[j] = fit.intercept
        coefs[j, np.arange(p) != j] = fit.coef
    G = combine_nodewise(coefs, cfg.rule)
    theta = np.zeros(n_params(p))
    theta[:p] = beta
    for j in range(p):
        for k in range(j + 1, p):
            theta[p + pair_index(j, k, p)] = G[j, k]
    pip = np.zeros_like(theta)
    pip[:p] = 1.0
    pip[p:] = theta[p:] != 0
    return NetworkEstimate(theta, pip, signed_adjacency(theta, p))
