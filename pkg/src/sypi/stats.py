"""Numeric substrate: residualization, partial correlation, Fisher-z
p-values, and an l1-penalized least-squares solver (cyclic coordinate
descent with soft-thresholding).

All functions are pure and operate on plain numpy arrays; rows are
samples, columns are variables.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.stats import norm

VARIANCE_EPS = 1e-12
R_CLAMP = 1.0 - 1e-12


@dataclass
class CiResult:
    """Outcome of one conditional-independence test.

    ``r`` is the partial correlation, ``p`` the two-sided Fisher-z
    p-value, ``n_eff`` the number of aligned samples and ``k`` the size
    of the conditioning set. ``degenerate`` is set when a residual was
    (near-)constant or when too few samples were available; such results
    report r = 0, p = 1 and carry no dependence evidence.
    """

    r: float
    p: float
    n_eff: int
    k: int
    degenerate: bool = False


@dataclass
class LassoFit:
    """Result of :func:`lasso_cd`.

    Coefficients are on the standardized scale (each predictor scaled to
    zero mean, unit variance; response centered). ``dropped`` marks
    near-constant columns whose coefficient is forced to zero.
    """

    coef: np.ndarray
    intercept: float
    n_iter: int
    converged: bool
    dropped: np.ndarray
    objective_path: np.ndarray | None = None


def _as_matrix(Z, n_rows: int) -> np.ndarray:
    if Z is None:
        return np.empty((n_rows, 0), dtype=float)
    Z = np.asarray(Z, dtype=float)
    if Z.ndim == 1:
        Z = Z[:, None]
    if Z.ndim != 2:
        raise ValueError("conditioning set must be a 2-d array")
    return Z


def _check_finite(*arrays) -> None:
    for a in arrays:
        if not np.all(np.isfinite(a)):
            raise ValueError("non-finite values in input")


def ols_residuals(y, Z=None) -> np.ndarray:
    """Residuals of ``y`` after least-squares projection on ``Z``.

    An all-ones intercept column is appended internally, so an empty
    ``Z`` simply centers ``y``. Rank-deficient designs use the
    minimum-norm solution (lstsq), which keeps duplicated conditioning
    columns harmless.
    """
    y = np.asarray(y, dtype=float)
    if y.ndim != 1:
        raise ValueError("y must be 1-d")
    Z = _as_matrix(Z, y.shape[0])
    if Z.shape[0] != y.shape[0]:
        raise ValueError(f"row mismatch: len(y)={y.shape[0]}, rows(Z)={Z.shape[0]}")
    _check_finite(y, Z)
    design = np.hstack([Z, np.ones((y.shape[0], 1))])
    beta, *_ = np.linalg.lstsq(design, y, rcond=None)
    return y - design @ beta


def partial_correlation(x, y, Z=None) -> float:
    """Pearson correlation of the residuals of ``x`` and ``y`` given ``Z``.

    With an empty conditioning set this is the plain Pearson
    correlation. Returns 0.0 when either residual vector is
    (near-)constant; use :func:`ci_test` to obtain the degeneracy flag
    alongside the p-value.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape:
        raise ValueError("x and y must have equal length")
    rx = ols_residuals(x, Z)
    ry = ols_residuals(y, Z)
    vx = float(rx @ rx) / rx.shape[0]
    vy = float(ry @ ry) / ry.shape[0]
    if vx < VARIANCE_EPS or vy < VARIANCE_EPS:
        return 0.0
    r = float(rx @ ry) / np.sqrt((rx @ rx) * (ry @ ry))
    return float(np.clip(r, -1.0, 1.0))


def fisher_z_pvalue(r: float, n_eff: int, k: int) -> float:
    """Two-sided p-value for a (partial) correlation via the Fisher
    z-transform with ``n_eff - k - 3`` degrees-of-freedom correction.

    Returns 1.0 when ``n_eff - k - 3 < 1`` (no usable evidence).
    """
    if abs(r) > 1.0:
        raise ValueError("|r| must be <= 1")
    dof = n_eff - k - 3
    if dof < 1:
        return 1.0
    z = np.arctanh(np.clip(r, -R_CLAMP, R_CLAMP))
    stat = abs(z) * np.sqrt(dof)
    return float(2.0 * norm.sf(stat))


def ci_test(x, y, Z=None) -> CiResult:
    """Partial-correlation conditional-independence test.

    Combines :func:`partial_correlation` and :func:`fisher_z_pvalue`;
    degenerate inputs (constant residuals, too few samples) yield a
    flagged ``r=0, p=1`` result instead of an error.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape:
        raise ValueError("x and y must have equal length")
    Z = _as_matrix(Z, x.shape[0])
    n_eff = x.shape[0]
    k = Z.shape[1]
    if n_eff - k - 3 < 1:
        return CiResult(r=0.0, p=1.0, n_eff=n_eff, k=k, degenerate=True)
    rx = ols_residuals(x, Z)
    ry = ols_residuals(y, Z)
    vx = float(rx @ rx) / n_eff
    vy = float(ry @ ry) / n_eff
    if vx < VARIANCE_EPS or vy < VARIANCE_EPS:
        return CiResult(r=0.0, p=1.0, n_eff=n_eff, k=k, degenerate=True)
    r = float(np.clip(float(rx @ ry) / np.sqrt((rx @ rx) * (ry @ ry)), -1.0, 1.0))
    return CiResult(r=r, p=fisher_z_pvalue(r, n_eff, k), n_eff=n_eff, k=k)


def soft_threshold(v: float, t: float) -> float:
    """sign(v) * max(|v| - t, 0)."""
    return float(np.sign(v) * max(abs(v) - t, 0.0))


def lasso_objective(X, y, beta, lam: float) -> float:
    """(1/(2n)) * ||y - X beta||^2 + lam * ||beta||_1 on given arrays."""
    n = X.shape[0]
    r = y - X @ beta
    return float((r @ r) / (2.0 * n) + lam * np.sum(np.abs(beta)))


def lasso_cd(
    X,
    y,
    lam: float,
    tol: float = 1e-7,
    max_sweeps: int = 10000,
    track_objective: bool = False,
) -> LassoFit:
    """l1-penalized least squares by cyclic coordinate descent.

    Minimizes ``(1/(2n)) ||y - X beta||^2 + lam ||beta||_1`` after
    standardizing the columns of ``X`` to zero mean / unit variance and
    centering ``y``. Coefficients are reported on that standardized
    scale. Near-constant columns are dropped (coefficient forced to 0,
    marked in ``dropped``). Convergence: max coefficient change of a
    sweep below ``tol``.

    Sweeps run on the Gram matrix from a least-squares warm start; the
    descent path still decreases the objective monotonically and lands
    on the usual soft-thresholding fixed point.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if X.ndim != 2 or y.ndim != 1 or X.shape[0] != y.shape[0]:
        raise ValueError("X must be (n, p) and y (n,) with matching n")
    if lam < 0:
        raise ValueError("penalty must be non-negative")
    _check_finite(X, y)
    n, p = X.shape
    mean = X.mean(axis=0)
    std = X.std(axis=0)
    dropped = std * std < VARIANCE_EPS
    safe_std = np.where(dropped, 1.0, std)
    Xs = (X - mean) / safe_std
    Xs[:, dropped] = 0.0
    yc = y - y.mean()
    gram = (Xs.T @ Xs) / n
    corr = (Xs.T @ yc) / n
    fit = _lasso_cd_gram(
        gram,
        corr,
        float(yc @ yc) / n,
        lam,
        dropped,
        tol=tol,
        max_sweeps=max_sweeps,
        track_objective=track_objective,
    )
    fit.intercept = float(y.mean())
    return fit


def _lasso_cd_gram(
    gram: np.ndarray,
    corr: np.ndarray,
    y_var: float,
    lam: float,
    dropped: np.ndarray,
    tol: float = 1e-7,
    max_sweeps: int = 10000,
    track_objective: bool = False,
) -> LassoFit:
    """Coordinate descent given gram = X'X/n and corr = X'y/n of the
    standardized, centered problem (unit diagonal on non-dropped
    columns)."""
    p = gram.shape[0]
    beta = np.zeros(p)
    active = np.flatnonzero(~dropped)
    if active.size:
        sub = np.ix_(active, active)
        start, *_ = np.linalg.lstsq(gram[sub], corr[active], rcond=None)
        beta[active] = start

    def objective(b):
        return float(
            0.5 * y_var - corr @ b + 0.5 * b @ gram @ b + lam * np.sum(np.abs(b))
        )

    path = [objective(beta)] if track_objective else None
    converged = False
    sweeps = 0
    grad_cache = gram @ beta  # (G beta)_j maintained across updates
    for sweeps in range(1, max_sweeps + 1):
        max_delta = 0.0
        for j in active:
            bj = beta[j]
            rho = corr[j] - grad_cache[j] + bj
            bnew = soft_threshold(rho, lam)
            if bnew != bj:
                grad_cache += (bnew - bj) * gram[:, j]
                beta[j] = bnew
                max_delta = max(max_delta, abs(bnew - bj))
        if track_objective:
            path.append(objective(beta))
        if max_delta < tol:
            converged = True
            break
    return LassoFit(
        coef=beta,
        intercept=0.0,
        n_iter=sweeps,
        converged=converged,
        dropped=dropped,
        objective_path=np.asarray(path) if track_objective else None,
    )
