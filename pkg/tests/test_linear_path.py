import numpy as np
import pytest

from pathselect import (
    ConvergenceError,
    L1Penalty,
    ScadPenalty,
    fit_path,
    lambda_grid,
    ols_refit,
    resolve_penalty,
    sigma_tilde,
    standardize,
    univariate_update,
)
from pathselect.linear_path import _make_grid, gram_min_eigenvalue
from pathselect.penalties import soft_threshold

from oracles import pls_objective_2d_argmin


def orthonormal_design(n, d, rng):
    """Standardized design with X'X/n = I (exactly, via QR)."""
    Q, _ = np.linalg.qr(rng.standard_normal((n, d + 1)))
    Q = Q - Q.mean(axis=0)
    Q = Q[:, :d] / np.sqrt((Q[:, :d] ** 2).mean(axis=0))
    # re-orthogonalize after centering/scaling drift
    for _ in range(3):
        G = Q.T @ Q / n
        Q = Q @ np.linalg.inv(np.linalg.cholesky(G).T)
        Q = Q - Q.mean(axis=0)
        Q = Q / np.sqrt((Q**2).mean(axis=0))
    return standardize(Q)


class TestLambdaGrid:
    def test_count_four_shape(self):
        grid = _make_grid(1.0, 1e-4, 4)
        assert grid.shape == (4,)
        assert np.all(np.diff(grid) < 0)
        # first half log-spaced down to the geometric midpoint
        assert grid[0] == pytest.approx(1.0, abs=1e-15)
        assert grid[1] == pytest.approx(1e-2, rel=1e-12)
        assert grid[-1] == pytest.approx(1e-4, rel=1e-12)

    def test_default_count_and_split(self):
        grid = _make_grid(2.0, 2e-4, 200)
        assert grid.shape == (200,)
        assert np.all(np.diff(grid) < 0)
        mid = 2.0 * 1e-2
        assert grid[99] == pytest.approx(mid, rel=1e-10)
        # log-spaced first half: constant ratio
        ratios = grid[1:100] / grid[:99]
        np.testing.assert_allclose(ratios, ratios[0], rtol=1e-10)
        # equally spaced second half: constant difference
        diffs = np.diff(grid[99:])
        np.testing.assert_allclose(diffs, diffs[0], rtol=1e-8)

    def test_anchor_zeroes_all_slopes(self):
        rng = np.random.default_rng(2)
        design = orthonormal_design(60, 4, rng)
        y = rng.standard_normal(60) * 2.0 + 1.0
        target = np.abs(design.standardized.T @ (y - y.mean())).max() / 60
        grid = lambda_grid(design, y, count=8)
        assert grid[0] == pytest.approx(target, rel=1e-11)
        for kind in (L1Penalty(), ScadPenalty(3.7)):
            path = fit_path(design, y, kind, grid[:1], allow_nonconvex=True)
            np.testing.assert_array_equal(path.coefficients[0, 1:], 0.0)
            assert path.coefficients[0, 0] == pytest.approx(y.mean(), abs=1e-10)

    def test_known_lambda_max(self):
        # scale y so max_j |x_j'(y - ybar)|/n is exactly 0.8
        rng = np.random.default_rng(3)
        design = orthonormal_design(50, 3, rng)
        y = rng.standard_normal(50)
        cur = np.abs(design.standardized.T @ (y - y.mean())).max() / 50
        y = y * (0.8 / cur)
        grid = lambda_grid(design, y, count=8)
        assert grid[0] == pytest.approx(0.8, rel=1e-11)
        assert grid[-1] == pytest.approx(0.8e-4, rel=1e-11)

    def test_constant_response_rejected(self):
        design = standardize(np.random.default_rng(0).standard_normal((20, 3)))
        with pytest.raises(ValueError):
            lambda_grid(design, np.full(20, 3.14))

    def test_count_validation(self):
        design = standardize(np.random.default_rng(0).standard_normal((20, 3)))
        y = np.random.default_rng(1).standard_normal(20)
        for bad in (3, 2, 5):
            with pytest.raises(ValueError):
                lambda_grid(design, y, count=bad)


class TestOrthonormalOracle:
    """On an orthonormal design the path has a coordinatewise closed form."""

    def test_l1_equals_soft_threshold(self):
        rng = np.random.default_rng(4)
        design = orthonormal_design(80, 5, rng)
        y = rng.standard_normal(80) * 3.0
        grid = lambda_grid(design, y, count=50)
        path = fit_path(design, y, L1Penalty(), grid)
        z = design.standardized.T @ (y - y.mean()) / 80
        for g, lam in enumerate(grid):
            expect = soft_threshold(z, lam) / design.column_scales
            np.testing.assert_allclose(path.coefficients[g, 1:], expect, atol=1e-6)

    def test_scad_equals_univariate_update(self):
        rng = np.random.default_rng(5)
        design = orthonormal_design(80, 5, rng)
        y = rng.standard_normal(80) * 3.0
        grid = lambda_grid(design, y, count=50)
        path = fit_path(design, y, ScadPenalty(3.7), grid, allow_nonconvex=True)
        z = design.standardized.T @ (y - y.mean()) / 80
        for g, lam in enumerate(grid):
            expect = univariate_update(z, lam, ScadPenalty(3.7)) / design.column_scales
            np.testing.assert_allclose(path.coefficients[g, 1:], expect, atol=1e-6)


class TestBruteForceOracle:
    def test_two_dim_instances(self):
        rng = np.random.default_rng(6)
        checked = 0
        while checked < 4:
            X = rng.standard_normal((20, 2))
            design = standardize(X)
            if gram_min_eigenvalue(design) < 0.45:
                continue  # keep SCAD(3.7) convex so the argmin is global
            y = X @ np.array([1.2, -0.7]) + rng.standard_normal(20)
            yc = y - y.mean()
            Xs = design.standardized
            bound = min(5.0, float(np.abs(Xs.T @ yc / 20).sum()) / 0.4 + 1.0)
            for lam in (0.3, 0.05):
                for kind in (L1Penalty(), ScadPenalty(3.7)):
                    path = fit_path(design, y, kind, np.array([lam]),
                                    allow_nonconvex=True)
                    got = path.coefficients[0, 1:] * design.column_scales
                    if isinstance(kind, ScadPenalty):
                        def vf(t, lam=lam):
                            t = np.asarray(t, dtype=float)
                            mid = (2 * 3.7 * lam * t - t**2 - lam**2) / (2 * 2.7)
                            flat = 4.7 * lam**2 / 2
                            return np.where(t <= lam, lam * t,
                                            np.where(t <= 3.7 * lam, mid, flat))
                        kinks = (lam, 2 * lam, 3.7 * lam)
                    else:
                        def vf(t, lam=lam):
                            return lam * np.asarray(t, dtype=float)
                        kinks = ()
                    oracle = pls_objective_2d_argmin(Xs, yc, lam, vf, kinks,
                                                     lo=-bound, hi=bound)
                    np.testing.assert_allclose(got, oracle, atol=2e-3)
            checked += 1


class TestPathMechanics:
    def test_warm_equals_cold_start(self):
        rng = np.random.default_rng(7)
        X = rng.standard_normal((40, 6))
        y = X[:, 0] * 2 - X[:, 3] + 0.5 * rng.standard_normal(40)
        design = standardize(X)
        grid = lambda_grid(design, y, count=30)
        kind, allow = resolve_penalty("scad", design)
        warm = fit_path(design, y, kind, grid, allow_nonconvex=allow)
        for g in (0, 7, 15, 29):
            cold = fit_path(design, y, kind, grid[g : g + 1], allow_nonconvex=allow)
            np.testing.assert_allclose(
                cold.coefficients[0], warm.coefficients[g], atol=1e-6
            )

    def test_endpoint_near_ols(self):
        rng = np.random.default_rng(8)
        X = rng.standard_normal((60, 5))
        y = X @ np.array([1.0, 0.0, -2.0, 0.5, 0.0]) + rng.standard_normal(60)
        design = standardize(X)
        grid = lambda_grid(design, y)
        path = fit_path(design, y, L1Penalty(), grid)
        _, rss_ols = ols_refit(design, range(5), y)
        rss_path = path.sigma2_hat[-1] * 60
        assert rss_path <= rss_ols * 1.01

    def test_df_bookkeeping(self):
        rng = np.random.default_rng(9)
        X = rng.standard_normal((50, 4))
        y = X[:, 1] + 0.1 * rng.standard_normal(50)
        design = standardize(X)
        grid = lambda_grid(design, y, count=20)
        path = fit_path(design, y, L1Penalty(), grid)
        assert path.df[0] == 1  # intercept only at lambda_max
        assert np.all(path.df <= 5)
        for g in range(20):
            assert path.df[g] == np.count_nonzero(path.coefficients[g])

    def test_objective_nonincreasing_along_grid(self):
        # warm starts mean each new lambda's objective starts from the old
        # optimum; with a smaller lambda the optimum can only drop
        rng = np.random.default_rng(10)
        X = rng.standard_normal((50, 4))
        y = X[:, 0] - X[:, 2] + rng.standard_normal(50)
        design = standardize(X)
        grid = lambda_grid(design, y, count=30)
        path = fit_path(design, y, L1Penalty(), grid)
        assert np.all(np.diff(path.objective) <= 1e-12)

    def test_sigma2_hat_from_original_scale(self):
        rng = np.random.default_rng(11)
        X = rng.standard_normal((30, 3)) * 5 + 2
        y = X[:, 0] + rng.standard_normal(30)
        design = standardize(X)
        grid = lambda_grid(design, y, count=10)
        path = fit_path(design, y, L1Penalty(), grid)
        for g in range(10):
            pred = path.coefficients[g, 0] + X @ path.coefficients[g, 1:]
            assert path.sigma2_hat[g] == pytest.approx(
                np.mean((y - pred) ** 2), rel=1e-10
            )

    def test_nonconvergence_carries_grid_index(self):
        rng = np.random.default_rng(12)
        X = rng.standard_normal((40, 5))
        X[:, 1] = X[:, 0] + 0.01 * rng.standard_normal(40)  # near-duplicate
        y = X[:, 0] + 0.2 * rng.standard_normal(40)
        design = standardize(X)
        grid = lambda_grid(design, y, count=10)
        with pytest.raises(ConvergenceError) as info:
            fit_path(design, y, L1Penalty(), grid, max_iter=1)
        err = info.value
        assert 0 <= err.grid_index < 10
        assert err.partial.coefficients.shape == (err.grid_index, 6)
        assert err.partial.lambdas.shape == (err.grid_index,)

    def test_lambda_validation(self):
        design = standardize(np.random.default_rng(0).standard_normal((20, 2)))
        y = np.random.default_rng(1).standard_normal(20)
        with pytest.raises(ValueError):
            fit_path(design, y, L1Penalty(), np.array([0.5, 0.5]))
        with pytest.raises(ValueError):
            fit_path(design, y, L1Penalty(), np.array([0.1, 0.5]))
        with pytest.raises(ValueError):
            fit_path(design, y, L1Penalty(), np.array([-0.5]))


class TestResolvePenalty:
    def test_modes(self):
        rng = np.random.default_rng(13)
        design = orthonormal_design(50, 3, rng)
        kind, allow = resolve_penalty("l1", design)
        assert isinstance(kind, L1Penalty) and allow is False
        kind, allow = resolve_penalty("scad37", design)
        assert isinstance(kind, ScadPenalty) and kind.a == 3.7 and allow is True
        kind, allow = resolve_penalty("scad", design)
        # orthonormal: min eigenvalue 1, adaptive shape floors at 3.7
        assert isinstance(kind, ScadPenalty) and kind.a == pytest.approx(3.7)
        assert allow is False

    def test_adaptive_shape_grows_with_collinearity(self):
        rng = np.random.default_rng(14)
        X = rng.standard_normal((60, 3))
        X[:, 2] = X[:, 0] + 0.15 * rng.standard_normal(60)
        design = standardize(X)
        eig = gram_min_eigenvalue(design)
        assert eig < 1 / 2.7
        kind, _ = resolve_penalty("scad", design)
        assert kind.a == pytest.approx(1.0 + 1.0 / eig, rel=1e-12)

    def test_unknown_mode(self):
        design = standardize(np.random.default_rng(0).standard_normal((10, 2)))
        with pytest.raises(ValueError):
            resolve_penalty("ridge", design)

    def test_nonconvex_requires_opt_in(self):
        rng = np.random.default_rng(15)
        X = rng.standard_normal((60, 3))
        X[:, 2] = X[:, 0] + 0.15 * rng.standard_normal(60)
        design = standardize(X)
        y = X[:, 0] + rng.standard_normal(60)
        grid = lambda_grid(design, y, count=10)
        with pytest.raises(ValueError):
            fit_path(design, y, ScadPenalty(3.7), grid, allow_nonconvex=False)
        path = fit_path(design, y, ScadPenalty(3.7), grid, allow_nonconvex=True)
        assert path.coefficients.shape == (10, 4)


class TestOlsRefit:
    def test_empty_support(self):
        rng = np.random.default_rng(16)
        X = rng.standard_normal((25, 3))
        y = rng.standard_normal(25) + 4.0
        coef, rss = ols_refit(standardize(X), (), y)
        assert coef[0] == pytest.approx(y.mean(), abs=1e-12)
        np.testing.assert_array_equal(coef[1:], 0.0)
        assert rss == pytest.approx(np.sum((y - y.mean()) ** 2), rel=1e-12)

    def test_exact_fit(self):
        rng = np.random.default_rng(17)
        X = rng.standard_normal((25, 4))
        y = 1.0 + 2.0 * X[:, 1] - 3.0 * X[:, 3]
        coef, rss = ols_refit(standardize(X), (1, 3), y)
        assert rss == pytest.approx(0.0, abs=1e-18)
        assert coef[2] == pytest.approx(2.0, abs=1e-10)
        assert coef[4] == pytest.approx(-3.0, abs=1e-10)

    def test_hand_solved_normal_equations(self):
        # n=5, one predictor: slope = Sxy/Sxx, intercept = ybar - slope*xbar
        x = np.array([0.0, 1.0, 2.0, 3.0, 4.0])
        y = np.array([1.0, 2.0, 1.5, 3.5, 3.0])
        slope = np.sum((x - 2.0) * (y - y.mean())) / np.sum((x - 2.0) ** 2)
        intercept = y.mean() - slope * 2.0
        coef, rss = ols_refit(standardize(x.reshape(-1, 1)), (0,), y)
        assert coef[0] == pytest.approx(intercept, rel=1e-12)
        assert coef[1] == pytest.approx(slope, rel=1e-12)
        assert rss == pytest.approx(np.sum((y - intercept - slope * x) ** 2), rel=1e-12)

    def test_bad_support(self):
        design = standardize(np.random.default_rng(0).standard_normal((10, 3)))
        y = np.arange(10.0)
        with pytest.raises(ValueError):
            ols_refit(design, (0, 0), y)
        with pytest.raises(ValueError):
            ols_refit(design, (3,), y)


class TestSigmaTilde:
    def test_exact_linear_gives_zero(self):
        rng = np.random.default_rng(18)
        X = rng.standard_normal((20, 3))
        y = X @ np.array([1.0, -1.0, 0.5]) + 2.0
        assert sigma_tilde(standardize(X), y) == pytest.approx(0.0, abs=1e-18)

    def test_divisor(self):
        # construct y with residual norm^2 exactly 14 against [1, X]
        rng = np.random.default_rng(19)
        X = rng.standard_normal((10, 2))
        Q, _ = np.linalg.qr(np.column_stack([np.ones(10), X, rng.standard_normal((10, 1))]))
        resid_dir = Q[:, 3]  # unit vector orthogonal to the span of [1, X]
        y = X @ np.array([0.5, 1.0]) + np.sqrt(14.0) * resid_dir
        assert sigma_tilde(standardize(X), y) == pytest.approx(2.0, rel=1e-10)

    def test_requires_spare_rows(self):
        rng = np.random.default_rng(20)
        X = rng.standard_normal((5, 4))
        y = rng.standard_normal(5)
        with pytest.raises(ValueError):
            sigma_tilde(standardize(X), y)
