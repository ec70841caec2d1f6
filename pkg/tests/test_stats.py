import numpy as np
import pytest
from scipy.linalg import hadamard
from scipy.stats import kstest, norm

from sypi.stats import (
    CiResult,
    ci_test,
    fisher_z_pvalue,
    lasso_cd,
    lasso_objective,
    ols_residuals,
    partial_correlation,
    soft_threshold,
)


# ---------------------------------------------------------------------------
# ols_residuals


def test_residuals_zero_for_exact_fit():
    rng = np.random.default_rng(0)
    Z = rng.normal(size=(60, 3))
    y = Z @ np.array([1.5, -2.0, 0.25]) + 4.0
    r = ols_residuals(y, Z)
    assert np.max(np.abs(r)) < 1e-9


def test_residuals_center_when_no_regressors():
    y = np.array([3.0, 5.0, 10.0, 2.0])
    r = ols_residuals(y, None)
    assert np.allclose(r, y - y.mean())


def test_residuals_simple_regression_hand_case():
    # normal equations solved by hand: slope 1.3, intercept -0.5
    y = np.array([1.0, 2.0, 3.0, 5.0])
    z = np.array([1.0, 2.0, 3.0, 4.0])
    r = ols_residuals(y, z)
    expected = y - (1.3 * z - 0.5)
    assert np.allclose(r, expected, atol=1e-12)
    assert np.allclose(expected, [0.2, -0.1, -0.4, 0.3])


def test_residuals_rank_deficient_conditioning():
    rng = np.random.default_rng(1)
    z = rng.normal(size=100)
    Z = np.column_stack([z, z])  # duplicated column
    y = 2 * z + rng.normal(size=100)
    r = ols_residuals(y, Z)
    assert abs(r @ z) < 1e-8  # projection removed the z component


def test_residuals_rejects_bad_input():
    with pytest.raises(ValueError):
        ols_residuals(np.array([1.0, 2.0]), np.ones((3, 1)))
    with pytest.raises(ValueError):
        ols_residuals(np.array([1.0, np.nan]), None)


# ---------------------------------------------------------------------------
# partial correlation


def test_partial_corr_empty_conditioning_is_pearson():
    rng = np.random.default_rng(2)
    x = rng.normal(size=500)
    y = 0.3 * x + rng.normal(size=500)
    r = partial_correlation(x, y, None)
    assert abs(r - np.corrcoef(x, y)[0, 1]) < 1e-12


def test_partial_corr_identical_series():
    rng = np.random.default_rng(3)
    x = rng.normal(size=200)
    z = rng.normal(size=200)
    assert partial_correlation(x, x, z) == pytest.approx(1.0, abs=1e-9)


def test_partial_corr_removes_common_driver():
    # x' = z + 0.1 x, y' = z + 0.1 y with independent x, y, z: strongly
    # correlated marginally, nearly independent given z
    rng = np.random.default_rng(4)
    n = 10000
    x, y, z = rng.normal(size=(3, n))
    xp = z + 0.1 * x
    yp = z + 0.1 * y
    assert np.corrcoef(xp, yp)[0, 1] > 0.8
    assert abs(partial_correlation(xp, yp, z)) < 0.05


def test_partial_corr_affine_invariance():
    rng = np.random.default_rng(5)
    x = rng.normal(size=300)
    y = rng.normal(size=300) + 0.5 * x
    Z = rng.normal(size=(300, 2))
    base = partial_correlation(x, y, Z)
    scaled = partial_correlation(
        3.7 * x - 11.0, -0.2 * y + 4.0, Z * np.array([5.0, -0.3]) + 1.0
    )
    assert abs(abs(scaled) - abs(base)) < 1e-9
    # sign flips with the sign of the rescaling product
    assert np.sign(scaled) == -np.sign(base)


def test_partial_corr_degenerate_residual_returns_zero():
    x = np.linspace(0.0, 1.0, 50)
    y = np.ones(50)  # constant
    assert partial_correlation(x, y, None) == 0.0


# ---------------------------------------------------------------------------
# fisher z


def test_fisher_z_null_statistic():
    assert fisher_z_pvalue(0.0, 100, 0) == pytest.approx(1.0)


def test_fisher_z_hand_value():
    # atanh(0.1) * sqrt(45) = 0.6730700; 2 * (1 - Phi) = 0.5009028
    p = fisher_z_pvalue(0.1, 50, 2)
    assert p == pytest.approx(0.500902774975834, abs=1e-9)
    stat = np.arctanh(0.1) * np.sqrt(45)
    assert stat == pytest.approx(0.673069974218, abs=1e-9)
    assert p == pytest.approx(2 * norm.sf(stat), abs=1e-12)


def test_fisher_z_near_perfect_correlation():
    assert fisher_z_pvalue(0.99, 1000, 0) < 1e-15


def test_fisher_z_monotone_in_r_and_n():
    rs = [0.05, 0.1, 0.2, 0.4, 0.8]
    ps = [fisher_z_pvalue(r, 200, 3) for r in rs]
    assert all(a > b for a, b in zip(ps, ps[1:]))
    ns = [20, 50, 100, 1000]
    ps = [fisher_z_pvalue(0.1, n, 3) for n in ns]
    assert all(a > b for a, b in zip(ps, ps[1:]))


def test_fisher_z_degenerate_dof():
    assert fisher_z_pvalue(0.5, 5, 3) == 1.0  # dof = -1


def test_ci_test_null_pvalues_uniform():
    # KS uniformity of p-values under the null at level 0.01
    rng = np.random.default_rng(6)
    pvals = []
    for _ in range(1000):
        x = rng.normal(size=500)
        y = rng.normal(size=500)
        pvals.append(ci_test(x, y).p)
    assert kstest(pvals, "uniform").pvalue > 0.01


def test_ci_test_result_fields():
    rng = np.random.default_rng(7)
    x = rng.normal(size=300)
    y = rng.normal(size=300)
    Z = rng.normal(size=(300, 4))
    res = ci_test(x, y, Z)
    assert isinstance(res, CiResult)
    assert res.n_eff == 300 and res.k == 4 and not res.degenerate
    assert abs(res.r) <= 1.0 and 0.0 <= res.p <= 1.0


def test_ci_test_flags_degenerate_sample():
    res = ci_test(np.ones(5), np.ones(5), np.ones((5, 3)))
    assert res.degenerate and res.p == 1.0


# ---------------------------------------------------------------------------
# lasso


def test_lasso_full_shrinkage_at_lambda_max():
    rng = np.random.default_rng(8)
    X = rng.normal(size=(200, 5))
    y = X @ np.array([1.0, 0.5, 0.0, -0.3, 0.2]) + rng.normal(size=200)
    Xs = (X - X.mean(0)) / X.std(0)
    lam_max = np.max(np.abs(Xs.T @ (y - y.mean()))) / 200
    fit = lasso_cd(X, y, lam_max + 1e-12)
    assert np.all(fit.coef == 0.0)
    assert fit.converged


def test_lasso_orthonormal_design_soft_threshold():
    # Hadamard columns are exactly orthogonal with unit variance, so the
    # solution is the soft-thresholded per-column OLS coefficient
    H = hadamard(16).astype(float)[:, 1:]  # drop the constant column
    rng = np.random.default_rng(9)
    y = rng.normal(size=16) * 2.0
    lam = 0.15
    fit = lasso_cd(H, y, lam)
    yc = y - y.mean()
    for j in range(H.shape[1]):
        b_ols = float(H[:, j] @ yc) / 16
        expected = np.sign(b_ols) * max(abs(b_ols) - lam, 0.0)
        assert fit.coef[j] == pytest.approx(expected, abs=1e-6)


def test_lasso_single_predictor_unpenalized_is_ols():
    rng = np.random.default_rng(10)
    x = rng.normal(size=500)
    y = 0.85 * x + rng.normal(size=500)
    fit = lasso_cd(x[:, None], y, 0.0)
    xs = (x - x.mean()) / x.std()
    b_ols = float(xs @ (y - y.mean())) / 500
    assert fit.coef[0] == pytest.approx(b_ols, abs=1e-9)


def test_lasso_objective_non_increasing():
    rng = np.random.default_rng(11)
    X = rng.normal(size=(150, 8))
    X[:, 4] = 0.95 * X[:, 3] + 0.05 * X[:, 4]  # correlated pair
    y = X @ rng.normal(size=8) + rng.normal(size=150)
    fit = lasso_cd(X, y, 0.05, track_objective=True)
    path = fit.objective_path
    assert path is not None and len(path) >= 2
    assert np.all(np.diff(path) <= 1e-12)


def test_lasso_constant_column_dropped():
    rng = np.random.default_rng(12)
    X = rng.normal(size=(100, 3))
    X[:, 1] = 7.0
    y = X[:, 0] + rng.normal(size=100)
    fit = lasso_cd(X, y, 0.01)
    assert fit.dropped[1] and not fit.dropped[0]
    assert fit.coef[1] == 0.0


def test_lasso_matches_reference_solver():
    # cross-check against scikit-learn-style objective via scipy optimize
    rng = np.random.default_rng(13)
    X = rng.normal(size=(120, 6))
    y = X @ np.array([0.8, 0.0, -0.5, 0.0, 0.3, 0.0]) + 0.5 * rng.normal(size=120)
    lam = 0.08
    fit = lasso_cd(X, y, lam)
    Xs = (X - X.mean(0)) / X.std(0)
    yc = y - y.mean()
    # the fit must satisfy the subgradient optimality conditions
    grad = -(Xs.T @ (yc - Xs @ fit.coef)) / 120
    for j in range(6):
        if fit.coef[j] != 0.0:
            assert grad[j] + lam * np.sign(fit.coef[j]) == pytest.approx(0.0, abs=1e-6)
        else:
            assert abs(grad[j]) <= lam + 1e-6
    # and achieve an objective no worse than a dense reference point
    assert lasso_objective(Xs, yc, fit.coef, lam) <= lasso_objective(
        Xs, yc, np.linalg.lstsq(Xs, yc, rcond=None)[0], lam
    ) + 1e-12


def test_soft_threshold():
    assert soft_threshold(0.5, 0.2) == pytest.approx(0.3)
    assert soft_threshold(-0.5, 0.2) == pytest.approx(-0.3)
    assert soft_threshold(0.1, 0.2) == 0.0
