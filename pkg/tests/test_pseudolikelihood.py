import math
import warnings

import numpy as np
import pytest
from scipy import optimize

from ssdmh import _kernels
from ssdmh.inner import sample_exact_rows
from ssdmh.model import n_params, pair_index
from ssdmh.pseudolikelihood import (
    ElassoConfig,
    combine_nodewise,
    ebic_score,
    fit_elasso,
    lambda_max,
    node_objective,
    node_path,
    nodewise_l1_logistic,
    soft_threshold,
)


def theta_with_edges(p, beta, edges):
    theta = np.zeros(n_params(p))
    theta[:p] = beta
    for (j, k), g in edges.items():
        theta[p + pair_index(j, k, p)] = g
    return theta


@pytest.fixture(scope="module")
def data_p3():
    theta = theta_with_edges(3, [-0.3, 0.2, 0.1], {(0, 1): 1.0, (1, 2): -0.6})
    return sample_exact_rows(theta, 3000, 21)


class TestSoftThreshold:
    @pytest.mark.parametrize("z, t, expected", [(3.0, 1.0, 2.0), (-3.0, 1.0, -2.0),
                                                (0.5, 1.0, 0.0), (-1.0, 1.0, 0.0)])
    def test_values(self, z, t, expected):
        assert soft_threshold(z, t) == expected

    def test_single_coordinate_subproblem(self, rng):
        # a column orthogonal to the intercept decouples; the slope then solves
        # min_c 0.5 sum (r - c x)^2 + t |c| in closed form
        xcol = np.tile([1.0, -1.0], 10)
        for _ in range(20):
            r = rng.normal(size=20) * 3
            t = float(rng.uniform(0, 20))
            c = np.zeros(2)
            res = r.copy()
            _kernels._quadratic_cd(xcol[:, None].copy(), np.ones(20), res, c, t, 100, 1e-15)
            expected = soft_threshold(xcol @ r, t) / (xcol @ xcol)
            assert c[1] == pytest.approx(expected, abs=1e-12)
            assert c[0] == pytest.approx(r.mean(), abs=1e-12)


class TestNodeFit:
    def test_huge_penalty_gives_intercept_only(self, data_p3):
        fit = nodewise_l1_logistic(data_p3, 1, 1e6)
        assert not fit.coef.any()
        m = data_p3[:, 1].mean()
        assert fit.intercept == pytest.approx(math.log(m / (1 - m)), abs=1e-7)

    def test_lambda_max_zeroes_everything(self, data_p3):
        top = lambda_max(data_p3, 0)
        assert not nodewise_l1_logistic(data_p3, 0, top * 1.0001).coef.any()
        assert nodewise_l1_logistic(data_p3, 0, top * 0.9).coef.any()

    def test_path_starts_with_exact_zeros(self):
        # rounding at lambda_max must not leave tiny coefficients counted as edges
        for seed in range(10):
            x = sample_exact_rows(np.zeros(n_params(5)), 1000, 70 + seed)
            for j in range(5):
                _, fits = node_path(x, j, ElassoConfig())
                assert np.count_nonzero(fits[0].coef) == 0

    @pytest.mark.parametrize("j", [0, 1, 2])
    def test_unpenalized_matches_generic_optimizer(self, data_p3, j):
        fit = nodewise_l1_logistic(data_p3, j, 0.0, ElassoConfig(tol=1e-10))
        X = np.delete(data_p3, j, axis=1).astype(float)
        yv = data_p3[:, j].astype(float)

        def f(b):
            eta = b[0] + X @ b[1:]
            return np.sum(np.logaddexp(0, eta) - yv * eta)

        def g(b):
            r = 1 / (1 + np.exp(-(b[0] + X @ b[1:]))) - yv
            return np.concatenate([[r.sum()], X.T @ r])

        ref = optimize.minimize(f, np.zeros(3), jac=g, method="BFGS", options={"gtol": 1e-10})
        got = np.concatenate([[fit.intercept], fit.coef])
        np.testing.assert_allclose(got, ref.x, atol=1e-4)

    def test_objective_never_increases(self, rng):
        for seed in range(5):
            x = np.random.default_rng(seed).integers(0, 2, size=(200, 6))
            for pen in (0.0, 1.0, 5.0):
                fit = nodewise_l1_logistic(x, seed % 6, pen)
                tr = fit.objective[~np.isnan(fit.objective)]
                assert np.all(np.diff(tr) <= 1e-12)
                X = np.delete(x, seed % 6, axis=1).astype(float)
                assert tr[-1] == pytest.approx(
                    node_objective(X, x[:, seed % 6], fit.intercept, fit.coef, pen), rel=1e-12)

    def test_constant_column(self):
        x = np.array([[1, 0, 1], [1, 1, 0], [1, 0, 0], [1, 1, 1]])
        with pytest.warns(UserWarning, match="constant"):
            fit = nodewise_l1_logistic(x, 0, 0.1)
        assert fit.degenerate and fit.intercept == 20.0 and not fit.coef.any()

    def test_negative_penalty(self, data_p3):
        with pytest.raises(ValueError):
            nodewise_l1_logistic(data_p3, 0, -1.0)


class TestPath:
    def test_path_shape(self, data_p3):
        path, fits = node_path(data_p3, 0, ElassoConfig())
        assert len(path) == 100
        assert path[0] == pytest.approx(lambda_max(data_p3, 0))
        assert path[-1] == pytest.approx(0.01 * path[0])
        assert np.all(np.diff(path) < 0)

    @pytest.mark.parametrize("seed", range(4))
    def test_monotone_shrinkage(self, seed):
        rng = np.random.default_rng(seed)
        p = 6
        theta = theta_with_edges(p, rng.normal(scale=0.5, size=p),
                                 {(0, 1): 1.2, (2, 3): -1.0, (1, 4): 0.6})
        x = sample_exact_rows(theta, 400, rng)
        for j in range(p):
            _, fits = node_path(x, j, ElassoConfig())
            counts = [int(np.count_nonzero(f.coef)) for f in fits]
            # penalties decrease along the path, so support can only grow
            assert all(a <= b for a, b in zip(counts, counts[1:])), counts


class TestEbic:
    def test_hand_case(self):
        assert ebic_score(-100, 3, 100, 10, 0.25) == pytest.approx(
            200 + 3 * math.log(100) + 1.5 * math.log(9), abs=1e-12)

    def test_degenerate_cases(self):
        assert ebic_score(-42.0, 0, 50, 7, 0.5) == 84.0
        assert ebic_score(-42.0, 4, 50, 7, 0.0) == pytest.approx(84 + 4 * math.log(50))


class TestCombine:
    def test_and_or(self):
        c = np.zeros((3, 3))
        c[0, 1] = 0.8  # only one direction nonzero
        c[1, 2], c[2, 1] = 0.4, 0.6
        a = combine_nodewise(c, "and")
        o = combine_nodewise(c, "or")
        assert a[0, 1] == a[1, 0] == 0
        assert o[0, 1] == o[1, 0] == 0.4
        assert a[1, 2] == o[1, 2] == pytest.approx(0.5)
        assert np.array_equal(a, a.T) and np.array_equal(o, o.T)

    def test_bad_rule(self):
        with pytest.raises(ValueError):
            ElassoConfig(rule="xor")


class TestFitElasso:
    def test_independent_items_empty_graph(self):
        x = sample_exact_rows(np.zeros(n_params(5)), 1000, 3)
        est = fit_elasso(x)
        assert est.edges() == []
        assert np.all(est.signed_adjacency == 0)
        np.testing.assert_array_equal(est.pip[:5], 1.0)

    def test_strong_edge_recovered(self):
        theta = theta_with_edges(3, [-1.0, -1.0, 0.0], {(0, 2): 2.0})
        hits = 0
        for seed in range(5):
            est = fit_elasso(sample_exact_rows(theta, 1000, seed))
            hits += [(j, k) for j, k, _, _ in est.edges()] == [(0, 2)]
        assert hits >= 4

    def test_symmetric_and_consistent(self, data_p3):
        est = fit_elasso(data_p3, ElassoConfig(rule="or"))
        A = est.signed_adjacency
        assert np.array_equal(A, A.T) and not np.diag(A).any()
        assert np.all((est.pip[3:] == 1) == (est.theta_hat[3:] != 0))

    def test_deterministic(self, data_p3):
        a = fit_elasso(data_p3)
        b = fit_elasso(data_p3)
        np.testing.assert_array_equal(a.theta_hat, b.theta_hat)

    def test_constant_column_warns(self):
        x = sample_exact_rows(np.zeros(6), 200, 0).copy()
        x[:, 2] = 0
        with warnings.catch_warnings(record=True) as w:
            warnings.simplefilter("always")
            est = fit_elasso(x)
        assert any("constant" in str(m.message) for m in w)
        assert est.theta_hat[2] == -20.0
