"""Lasso-Granger baseline.

The target is regressed on lags 1..max_lag of every candidate and of
itself in one l1-penalized fit; a candidate is selected iff any of its
lag coefficients survives soft-thresholding (exactly nonzero). The
target's own lags never count as causes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .panel import TimeSeriesPanel
from .simulate import GroundTruth
from .stats import lasso_cd

DEFAULT_GRANGER_MAX_LAG = 3


@dataclass
class GrangerReport:
    selected: np.ndarray
    max_coef: np.ndarray
    lam: float
    max_lag: int


@dataclass
class LambdaTuneResult:
    lam: float
    fnr: float
    attainable: bool


def _granger_design(panel: TimeSeriesPanel, max_lag: int):
    """Design with blocks [cand_1 lags 1..L, ..., cand_d lags, target lags]."""
    T = panel.n_samples
    if T - max_lag < 10 * (max_lag + 1):
        raise ValueError("sample too short for the requested max_lag")
    cols = []
    for j in range(panel.n_candidates):
        x = panel.series(j)
        for s in range(1, max_lag + 1):
            cols.append(x[max_lag - s : T - s])
    y = panel.target
    for s in range(1, max_lag + 1):
        cols.append(y[max_lag - s : T - s])
    return np.column_stack(cols), y[max_lag:]


def lasso_granger(
    panel: TimeSeriesPanel, lam: float, max_lag: int = DEFAULT_GRANGER_MAX_LAG
) -> GrangerReport:
    """Select candidates with any nonzero lag coefficient at penalty
    ``lam``."""
    if max_lag < 1:
        raise ValueError("max_lag must be >= 1")
    X, y = _granger_design(panel, max_lag)
    fit = lasso_cd(X, y, lam)
    d = panel.n_candidates
    max_coef = np.zeros(d)
    selected = np.zeros(d, dtype=bool)
    for j in range(d):
        block = fit.coef[j * max_lag : (j + 1) * max_lag]
        max_coef[j] = float(np.max(np.abs(block)))
        selected[j] = bool(np.any(block != 0.0))
    return GrangerReport(selected=selected, max_coef=max_coef, lam=lam, max_lag=max_lag)


def _pooled_fnr(
    graphs: list[tuple[TimeSeriesPanel, GroundTruth]], lam: float, max_lag: int
) -> float:
    fn = tp = 0
    for panel, truth in graphs:
        sel = lasso_granger(panel, lam, max_lag).selected
        tp += int(np.sum(sel & truth.is_cause))
        fn += int(np.sum(~sel & truth.is_cause))
    return fn / (fn + tp) if fn + tp else 0.0


def tune_lambda_for_fnr(
    graphs: list[tuple[TimeSeriesPanel, GroundTruth]],
    target_fnr: float,
    max_lag: int = DEFAULT_GRANGER_MAX_LAG,
    lam_hi: float = 1.0,
    n_steps: int = 30,
) -> LambdaTuneResult:
    """Largest penalty at which the pooled miss rate over ``graphs``
    stays at or below ``target_fnr`` (bisection).

    When even an unpenalized fit misses too much the target is
    unattainable: returns lam = 0 with ``attainable=False``.
    """
    if not 0.0 <= target_fnr <= 1.0:
        raise ValueError("target_fnr must be in [0, 1]")
    if _pooled_fnr(graphs, 0.0, max_lag) > target_fnr:
        return LambdaTuneResult(lam=0.0, fnr=_pooled_fnr(graphs, 0.0, max_lag), attainable=False)
    if _pooled_fnr(graphs, lam_hi, max_lag) <= target_fnr:
        return LambdaTuneResult(
            lam=lam_hi, fnr=_pooled_fnr(graphs, lam_hi, max_lag), attainable=True
        )
    lo, hi = 0.0, lam_hi  # fnr(lo) <= target < fnr(hi)
    for _ in range(n_steps):
        mid = 0.5 * (lo + hi)
        if _pooled_fnr(graphs, mid, max_lag) <= target_fnr:
            lo = mid
        else:
            hi = mid
    return LambdaTuneResult(lam=lo, fnr=_pooled_fnr(graphs, lo, max_lag), attainable=True)
