import numpy as np
import pytest
from scipy import stats

from conftest import enumerate_rows, state_code
from ssdmh import _kernels
from ssdmh.inner import (
    AuxChainConfig,
    gibbs_sweep,
    gibbs_sweeps_from_uniforms,
    sample_auxiliary,
    sample_exact_rows,
    single_site_kernel,
)
from ssdmh.model import conditional_logits, interaction_matrix, n_params, stats_vector

THETA3 = np.array([0.4, -0.6, 0.2, 0.9, -0.7, 0.5])


def exact_distribution(theta, p):
    rows, probs = enumerate_rows(theta, p)
    out = np.zeros(1 << p)
    for z, pr in zip(rows, probs):
        out[state_code(z)] = pr
    return out


def exact_stat_moments(theta, p, n):
    rows, probs = enumerate_rows(theta, p)
    T = np.array([stats_vector(np.array([z])) for z in rows], dtype=float)
    probs = np.array(probs)
    mean = probs @ T
    var = probs @ (T - mean) ** 2
    return n * mean, n * var


class TestGibbsSweep:
    def test_zero_theta_gives_fair_coins(self, rng):
        x = np.ones((4000, 5), dtype=np.uint8)
        y = gibbs_sweep(x, np.zeros(n_params(5)), rng)
        assert abs(y.mean() - 0.5) < 0.01
        both = (y[:, 0] & y[:, 1]).mean()
        assert abs(both - 0.25) < 0.02

    def test_deterministic(self):
        x = np.random.default_rng(1).integers(0, 2, size=(20, 4))
        theta = np.random.default_rng(2).normal(size=10)
        a = gibbs_sweep(x, theta, np.random.default_rng(7))
        b = gibbs_sweep(x, theta, np.random.default_rng(7))
        np.testing.assert_array_equal(a, b)

    def test_rule_is_uniform_below_conditional(self):
        # one cell, one sweep: set iff U < logistic(beta)
        theta = np.array([0.3, -0.2, 0.0])
        y = np.zeros((1, 2), dtype=np.uint8)
        p0 = 1 / (1 + np.exp(-0.3))
        assert gibbs_sweeps_from_uniforms(y, theta, [[[p0 - 1e-9, 0.99]]])[0, 0] == 1
        assert gibbs_sweeps_from_uniforms(y, theta, [[[p0 + 1e-9, 0.99]]])[0, 0] == 0

    def test_row_permutation_equivariance(self, rng):
        x = rng.integers(0, 2, size=(12, 4)).astype(np.uint8)
        theta = rng.normal(size=10)
        U = rng.random((3, 12, 4))
        perm = rng.permutation(12)
        out = gibbs_sweeps_from_uniforms(x, theta, U)
        out_perm = gibbs_sweeps_from_uniforms(x[perm], theta, U[:, perm, :])
        np.testing.assert_array_equal(out[perm], out_perm)

    def test_parallel_kernel_matches_serial(self, rng):
        x = rng.integers(0, 2, size=(30, 5)).astype(np.uint8)
        theta = rng.normal(size=15)
        U = rng.random((4, 30, 5))
        outs = []
        for kern in (_kernels.gibbs_sweeps, _kernels.gibbs_sweeps_parallel):
            y = x.copy()
            h = conditional_logits(y, theta)
            kern(y, h, interaction_matrix(theta, 5), U)
            outs.append(y)
            np.testing.assert_allclose(h, conditional_logits(y, theta), atol=1e-12)
        np.testing.assert_array_equal(outs[0], outs[1])

    def test_stationary_distribution_p3(self):
        # 1000 independent row chains, 100 recorded sweeps each = 1e5 row states
        p, chains, burn, keep = 3, 1000, 50, 100
        rng = np.random.default_rng(11)
        y = rng.integers(0, 2, size=(chains, p)).astype(np.uint8)
        h = conditional_logits(y, THETA3)
        G = interaction_matrix(THETA3, p)
        _kernels.gibbs_sweeps(y, h, G, rng.random((burn, chains, p)))
        counts = np.zeros(1 << p)
        weights = 1 << np.arange(p)
        for _ in range(keep):
            _kernels.gibbs_sweeps(y, h, G, rng.random((1, chains, p)))
            counts += np.bincount(y @ weights, minlength=1 << p)
        tv = 0.5 * np.abs(counts / counts.sum() - exact_distribution(THETA3, p)).sum()
        assert tv < 0.02


class TestDetailedBalance:
    @pytest.mark.parametrize("p", [2, 3])
    def test_single_site_kernel_reversible(self, rng, p):
        theta = rng.normal(scale=1.5, size=n_params(p))
        pi = exact_distribution(theta, p)
        for j in range(p):
            P = single_site_kernel(theta, p, j)
            np.testing.assert_allclose(P.sum(axis=1), 1.0, atol=1e-12)
            flow = pi[:, None] * P
            np.testing.assert_allclose(flow, flow.T, atol=1e-10)
            np.testing.assert_allclose(pi @ P, pi, atol=1e-10)


class TestSampleAuxiliary:
    def test_sweeps_must_be_positive(self):
        with pytest.raises(ValueError):
            AuxChainConfig(sweeps=0)

    def test_zero_theta_ignores_data(self, rng):
        x = np.ones((3000, 4), dtype=np.uint8)
        y = sample_auxiliary(x, np.zeros(10), AuxChainConfig(sweeps=1), rng)
        assert abs(y.mean() - 0.5) < 0.015

    def test_default_sweeps_is_n(self):
        assert AuxChainConfig().resolve(37) == 37

    def test_moments_with_m_equal_n(self):
        n, p, reps = 50, 3, 10_000
        rng = np.random.default_rng(5)
        x = sample_exact_rows(THETA3, n, rng)
        cfg = AuxChainConfig()
        T = np.array([stats_vector(sample_auxiliary(x, THETA3, cfg, rng)) for _ in range(reps)])
        mean, var = exact_stat_moments(THETA3, p, n)
        z = (T.mean(axis=0) - mean) / np.sqrt(var / reps)
        assert np.all(np.abs(z) < 4.5), z
        np.testing.assert_allclose(T.var(axis=0), var, rtol=0.1)

    def test_long_inner_chain_decorrelates_from_data(self):
        # strongly coupled items so that a single sweep is visibly sticky
        theta = np.array([-1.5, -1.5, -1.5, 2.0, 2.0, 2.0])
        n, reps = 30, 1500
        rng = np.random.default_rng(9)
        pairs_long, pairs_short = [], []
        for _ in range(reps):
            x = sample_exact_rows(theta, n, rng)
            tx = stats_vector(x)
            pairs_long.append((tx, stats_vector(sample_auxiliary(x, theta, AuxChainConfig(20), rng))))
            pairs_short.append((tx, stats_vector(sample_auxiliary(x, theta, AuxChainConfig(1), rng))))
        for coord in range(6):
            long = np.array([(a[coord], b[coord]) for a, b in pairs_long], dtype=float)
            short = np.array([(a[coord], b[coord]) for a, b in pairs_short], dtype=float)
            # independent draws have zero correlation; one sweep stays visibly tied to x
            assert abs(np.corrcoef(long.T)[0, 1]) < 0.1
            assert np.corrcoef(short.T)[0, 1] > 0.25


class TestExactRows:
    def test_uniform_p2(self):
        y = sample_exact_rows(np.zeros(3), 100_000, 3)
        counts = np.bincount(y @ np.array([1, 2]), minlength=4)
        assert stats.chisquare(counts).pvalue > 0.001

    def test_saturation(self):
        theta = np.concatenate([np.full(4, 10.0), np.zeros(6)])
        y = sample_exact_rows(theta, 1000, 4)
        assert y.mean() > 0.999

    def test_matches_enumeration_p3(self):
        y = sample_exact_rows(THETA3, 1_000_000, 17)
        freq = np.bincount(y @ np.array([1, 2, 4]), minlength=8) / y.shape[0]
        assert 0.5 * np.abs(freq - exact_distribution(THETA3, 3)).sum() < 0.01

    def test_bound(self):
        with pytest.raises(ValueError):
            sample_exact_rows(np.zeros(n_params(21)), 5, 0)

    def test_seeded(self):
        a = sample_exact_rows(THETA3, 50, 4)
        b = sample_exact_rows(THETA3, 50, 4)
        np.testing.assert_array_equal(a, b)
