"""Causal feature selection by systematic path isolation.

For each candidate i with detected lag w_i the algorithm runs two
partial-correlation tests against the target:

  test 1   x_i[t]   vs y[t + w_i]  given  S_i and y[t + w_i - 1]
  test 2   x_i[t-1] vs y[t + w_i]  given  S_i, x_i[t] and y[t + w_i - 1]

where S_i holds, for every other candidate j with a detected lag, the
node x_j at relative offset w_i - w_j - 1 (the nodes entering the
target one step before the tested arrival). A candidate is reported as
a cause when test 1 rejects independence (p1 < threshold1) and test 2
accepts it (p2 > threshold2): a confounded candidate fails test 2
because conditioning on x_i[t] opens the collider between its own past
and the target.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import lags as lags_mod
from .lags import LagTable
from .panel import TimeSeriesPanel
from .stats import CiResult, ci_test

TARGET = -1

CAUSE = "cause"
NOT_CAUSE = "not_cause"
NO_LAG = "no_lag"

DEFAULT_THRESHOLD1 = 0.01
DEFAULT_THRESHOLD2 = 0.2


class DegenerateSampleError(ValueError):
    """Too few aligned samples to run a test."""


@dataclass(frozen=True)
class NodeRef:
    """A (series, relative time offset) pair. ``series`` is a candidate
    index or ``TARGET``; offsets are relative to the anchor time t."""

    series: int
    offset: int


@dataclass
class CandidateResult:
    index: int
    name: str
    lag: int | None
    p1: float | None
    p2: float | None
    n_eff: int | None
    decision: str
    flags: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "index": self.index,
            "name": self.name,
            "lag": self.lag,
            "p1": self.p1,
            "p2": self.p2,
            "n_eff": self.n_eff,
            "decision": self.decision,
            "flags": list(self.flags),
        }


@dataclass
class DiscoveryReport:
    results: list[CandidateResult]
    threshold1: float
    threshold2: float
    target_name: str = "Y"

    @property
    def causes(self) -> list[str]:
        return [r.name for r in self.results if r.decision == CAUSE]

    @property
    def cause_indices(self) -> list[int]:
        return [r.index for r in self.results if r.decision == CAUSE]

    def to_dict(self) -> dict:
        return {
            "target": self.target_name,
            "threshold1": self.threshold1,
            "threshold2": self.threshold2,
            "causes": self.causes,
            "candidates": [r.to_dict() for r in self.results],
        }


def build_conditioning_set(i: int, lag_table: LagTable) -> list[NodeRef]:
    """Conditioning nodes for candidate i: every other candidate j with
    a detected lag contributes its node at offset lag_i - lag_j - 1.
    Candidates without a lag are omitted."""
    lag_i = lag_table.lag(i)
    if lag_i is None:
        raise ValueError(f"candidate {i} has no detected lag")
    refs = []
    for j in lag_table.present_indices:
        if j == i:
            continue
        refs.append(NodeRef(j, lag_i - lag_table.lags[j] - 1))
    return refs


def align_samples(panel: TimeSeriesPanel, refs: list[NodeRef]) -> np.ndarray:
    """Matrix of aligned samples, one column per ref.

    Rows are all anchor times t with t + offset inside [0, T-1] for
    every ref, so n_eff = T - (max offset - min offset).
    """
    if not refs:
        raise ValueError("refs must be non-empty")
    offsets = [r.offset for r in refs]
    lo, hi = min(offsets), max(offsets)
    T = panel.n_samples
    n_eff = T - (hi - lo)
    if n_eff < len(refs) + 2:
        raise DegenerateSampleError(
            f"only {n_eff} aligned samples for {len(refs)} series"
        )
    start = -lo
    cols = []
    for r in refs:
        src = panel.target if r.series == TARGET else panel.series(r.series)
        a = start + r.offset
        cols.append(src[a : a + n_eff])
    return np.column_stack(cols)


def _run_ci(panel, x_ref, y_ref, z_refs, test) -> CiResult:
    mat = align_samples(panel, [x_ref, y_ref] + z_refs)
    return test(mat[:, 0], mat[:, 1], mat[:, 2:])


def sypi_discover(
    panel: TimeSeriesPanel,
    threshold1: float = DEFAULT_THRESHOLD1,
    threshold2: float = DEFAULT_THRESHOLD2,
    max_lag: int = lags_mod.DEFAULT_MAX_LAG,
    lag_lambda: float = lags_mod.DEFAULT_LAG_LAMBDA,
    lag_coef_threshold: float = lags_mod.DEFAULT_COEF_THRESHOLD,
    lag_alpha: float = lags_mod.DEFAULT_LAG_ALPHA,
    lag_table: LagTable | None = None,
    test: Callable[..., CiResult] = ci_test,
    compute_all: bool = False,
) -> DiscoveryReport:
    """Identify candidates that cause the target.

    Decision per candidate: ``no_lag`` when no lag was detected,
    ``cause`` when p1 < threshold1 and p2 > threshold2, ``not_cause``
    otherwise. With ``compute_all`` the second test runs even when the
    first fails to reject, which lets threshold sweeps reuse one pass.
    ``test`` may be any conditional-independence test with the
    signature of :func:`sypi.stats.ci_test`.
    """
    if lag_table is None:
        lag_table = lags_mod.find_all_lags(
            panel,
            max_lag=max_lag,
            lam=lag_lambda,
            coef_threshold=lag_coef_threshold,
            alpha=lag_alpha,
        )
    results = []
    for i in range(panel.n_candidates):
        lag = lag_table.lag(i)
        if lag is None:
            results.append(
                CandidateResult(i, panel.names[i], None, None, None, None, NO_LAG)
            )
            continue
        cond = build_conditioning_set(i, lag_table)
        flags = []
        if any(r.offset == lag - 1 for r in cond):
            # A zero-lag (confounded) candidate lands at the same time
            # index as the conditioned target-past node.
            flags.append("conditioning_node_at_target_past_time")
        target_past = NodeRef(TARGET, lag - 1)
        target_node = NodeRef(TARGET, lag)
        try:
            res1 = _run_ci(
                panel, NodeRef(i, 0), target_node, cond + [target_past], test
            )
            res2 = None
            if res1.p < threshold1 or compute_all:
                res2 = _run_ci(
                    panel,
                    NodeRef(i, -1),
                    target_node,
                    cond + [NodeRef(i, 0), target_past],
                    test,
                )
        except DegenerateSampleError:
            results.append(
                CandidateResult(
                    i,
                    panel.names[i],
                    lag,
                    None,
                    None,
                    None,
                    NOT_CAUSE,
                    flags + ["degenerate_sample"],
                )
            )
            continue
        if res1.degenerate or (res2 is not None and res2.degenerate):
            flags.append("degenerate_test")
        p1 = float(res1.p)
        p2 = float(res2.p) if res2 is not None else None
        decision = (
            CAUSE
            if (p1 < threshold1 and p2 is not None and p2 > threshold2)
            else NOT_CAUSE
        )
        results.append(
            CandidateResult(
                i, panel.names[i], lag, p1, p2, res1.n_eff, decision, flags
            )
        )
    return DiscoveryReport(
        results=results,
        threshold1=threshold1,
        threshold2=threshold2,
        target_name=panel.target_name,
    )
