"""Minimum-lag detection.

The lag of a candidate x with respect to the target y is the smallest
shift s at which x still carries information about y[t] given x's own
deeper past. Per shift, both x[t-s] and y[t] are residualized on
x[t-s-1], ..., x[t-s-P]; the bivariate l1 fit of the standardized
residual pair has the closed-form coefficient
soft_threshold(partial_r, lam), and the shift is detected when that
coefficient clears ``coef_threshold`` and its Fisher-z p-value clears
``alpha``. Conditioning on the candidate's own past (and never on its
future) mirrors the population definition of the lag, so collider
paths through future values stay closed. A candidate confounded with
the target through a third series with memory is detected at lag 0.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .panel import TimeSeriesPanel
from .stats import ci_test, soft_threshold

DEFAULT_MAX_LAG = 10
DEFAULT_LAG_LAMBDA = 0.001
DEFAULT_COEF_THRESHOLD = 0.0
DEFAULT_LAG_ALPHA = 0.01


@dataclass
class LagTable:
    """Per-candidate minimum lag; candidates without a detected lag are
    absent and are excluded from all downstream conditioning sets."""

    lags: dict[int, int] = field(default_factory=dict)
    n_candidates: int = 0

    def lag(self, i: int) -> int | None:
        return self.lags.get(i)

    def present(self, i: int) -> bool:
        return i in self.lags

    @property
    def present_indices(self) -> list[int]:
        return sorted(self.lags)

    def pair_offset(self, i: int, j: int) -> int:
        """lag(i) - lag(j); both must be present."""
        return self.lags[i] - self.lags[j]


def lag_statistics(
    x,
    y,
    max_lag: int = DEFAULT_MAX_LAG,
    lam: float = DEFAULT_LAG_LAMBDA,
    past_controls: int | None = None,
):
    """Per-shift (coefficient, p-value) pairs for shifts 0..max_lag.

    The coefficient is the bivariate l1 solution on the standardized
    residual pair (soft-thresholded partial correlation of x[t-s] and
    y[t] given x's deeper past); the p-value is its Fisher-z
    significance.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("x and y must be 1-d with equal length")
    if max_lag < 1:
        raise ValueError("max_lag must be >= 1")
    T = x.shape[0]
    if T < 10 * (max_lag + 2):
        raise ValueError(
            f"series too short for lag search: need >= {10 * (max_lag + 2)} "
            f"samples, got {T}"
        )
    if past_controls is None:
        # deep enough that autocorrelation tails beyond the controls are
        # negligible, shallow enough to keep short panels usable
        past = int(min(3 * max_lag, max(max_lag, T // 20)))
    else:
        past = past_controls
    depth = max_lag + past
    base = np.column_stack([x[depth - k : T - k] for k in range(depth + 1)])
    y_al = y[depth:]
    coefs = np.zeros(max_lag + 1)
    pvals = np.ones(max_lag + 1)
    for s in range(max_lag + 1):
        res = ci_test(base[:, s], y_al, base[:, s + 1 : s + past + 1])
        if res.degenerate:
            continue
        coefs[s] = soft_threshold(res.r, lam)
        pvals[s] = res.p
    return coefs, pvals


def find_min_lag(
    x,
    y,
    max_lag: int = DEFAULT_MAX_LAG,
    lam: float = DEFAULT_LAG_LAMBDA,
    coef_threshold: float = DEFAULT_COEF_THRESHOLD,
    alpha: float = DEFAULT_LAG_ALPHA,
    past_controls: int | None = None,
) -> int | None:
    """Smallest shift s in 0..max_lag whose coefficient is nonzero,
    at least ``coef_threshold`` in magnitude and significant at
    ``alpha``.

    Returns None when no shift qualifies (including constant
    candidates). Raises ValueError when the series are too short to
    align the design reliably.
    """
    coefs, pvals = lag_statistics(x, y, max_lag, lam, past_controls)
    for s in range(max_lag + 1):
        if coefs[s] == 0.0 or abs(coefs[s]) < coef_threshold:
            continue
        if pvals[s] < alpha:
            return s
    return None


def find_all_lags(
    panel: TimeSeriesPanel,
    max_lag: int = DEFAULT_MAX_LAG,
    lam: float = DEFAULT_LAG_LAMBDA,
    coef_threshold: float = DEFAULT_COEF_THRESHOLD,
    alpha: float = DEFAULT_LAG_ALPHA,
) -> LagTable:
    """Run :func:`find_min_lag` for every candidate in the panel."""
    lags: dict[int, int] = {}
    for i in range(panel.n_candidates):
        w = find_min_lag(
            panel.series(i), panel.target, max_lag, lam, coef_threshold, alpha
        )
        if w is not None:
            lags[i] = w
    return LagTable(lags=lags, n_candidates=panel.n_candidates)
