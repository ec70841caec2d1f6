"""Benchmark harness: sample graphs, run selection and the baseline,
pool confusion counts, sweep thresholds for ROC curves.

Aggregation pools raw counts across the graphs of a cell (not averaged
per-graph rates). Identical root seeds reproduce cells bit-for-bit:
every graph derives its generator from (root_seed, cell_index,
graph_index) alone, so graphs are independent and order-insensitive.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from . import discovery, lags as lags_mod
from .granger import DEFAULT_GRANGER_MAX_LAG, lasso_granger
from .simulate import GraphConfig, GroundTruth, ground_truth, sample_graph_spec, simulate_panel


@dataclass
class CellConfig:
    T: int = 2000
    n_obs: int = 4
    n_hidden: int = 1
    p_cross: float = 0.2
    p_target: float = 0.2
    noise_pct: float = 0.2
    n_graphs: int = 100
    threshold1: float = discovery.DEFAULT_THRESHOLD1
    threshold2: float = discovery.DEFAULT_THRESHOLD2
    max_lag: int = lags_mod.DEFAULT_MAX_LAG
    lag_lambda: float = lags_mod.DEFAULT_LAG_LAMBDA
    lag_coef_threshold: float = lags_mod.DEFAULT_COEF_THRESHOLD
    lag_alpha: float = lags_mod.DEFAULT_LAG_ALPHA
    multi_lag_mode: bool = False
    granger_lambda: float | None = None
    granger_max_lag: int = DEFAULT_GRANGER_MAX_LAG

    def graph_config(self) -> GraphConfig:
        return GraphConfig(
            n_obs=self.n_obs,
            n_hidden=self.n_hidden,
            p_cross=self.p_cross,
            p_target=self.p_target,
            noise_pct=self.noise_pct,
            multi_lag_mode=self.multi_lag_mode,
        )

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "CellConfig":
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown cell config keys: {sorted(unknown)}")
        return cls(**d)


@dataclass
class ConfusionCounts:
    tp: int = 0
    fp: int = 0
    tn: int = 0
    fn: int = 0
    tp_direct: int = 0
    fn_direct: int = 0

    def add(self, other: "ConfusionCounts") -> None:
        self.tp += other.tp
        self.fp += other.fp
        self.tn += other.tn
        self.fn += other.fn
        self.tp_direct += other.tp_direct
        self.fn_direct += other.fn_direct

    @property
    def fpr(self) -> float:
        denom = self.fp + self.tn
        return self.fp / denom if denom else float("nan")

    @property
    def fnr_total(self) -> float:
        denom = self.fn + self.tp
        return self.fn / denom if denom else float("nan")

    @property
    def fnr_direct(self) -> float:
        denom = self.fn_direct + self.tp_direct
        return self.fn_direct / denom if denom else float("nan")

    @property
    def tpr(self) -> float:
        denom = self.tp + self.fn
        return self.tp / denom if denom else float("nan")


def compute_metrics(selected, truth: GroundTruth) -> ConfusionCounts:
    """Confusion counts of a selection against ground truth.

    ``selected`` is a boolean array or a list of decision strings (any
    decision other than "cause", including "no_lag", counts as a
    negative call).
    """
    if len(selected) and isinstance(selected[0], str):
        selected = np.array([s == discovery.CAUSE for s in selected])
    selected = np.asarray(selected, dtype=bool)
    if selected.shape != truth.is_cause.shape:
        raise ValueError("selection and ground truth must align")
    cause = truth.is_cause
    direct = truth.is_direct
    return ConfusionCounts(
        tp=int(np.sum(selected & cause)),
        fp=int(np.sum(selected & ~cause)),
        tn=int(np.sum(~selected & ~cause)),
        fn=int(np.sum(~selected & cause)),
        tp_direct=int(np.sum(selected & direct)),
        fn_direct=int(np.sum(~selected & direct)),
    )


@dataclass
class GraphRecord:
    graph_index: int
    lag_present: np.ndarray
    p1: np.ndarray
    p2: np.ndarray
    is_cause: np.ndarray
    is_direct: np.ndarray
    granger_selected: dict[float, np.ndarray] = field(default_factory=dict)

    def sypi_selected(self, threshold1: float, threshold2: float) -> np.ndarray:
        with np.errstate(invalid="ignore"):
            return (
                self.lag_present
                & np.where(np.isnan(self.p1), False, self.p1 < threshold1)
                & np.where(np.isnan(self.p2), False, self.p2 > threshold2)
            )


def run_graph(
    cell: CellConfig,
    root_seed: int,
    cell_index: int,
    graph_index: int,
    granger_lambdas: tuple[float, ...] = (),
) -> GraphRecord:
    """Simulate one graph of a cell and collect everything threshold
    sweeps need (both p-values per candidate, baseline selections per
    penalty)."""
    rng = np.random.default_rng([root_seed, cell_index, graph_index])
    spec = sample_graph_spec(cell.graph_config(), rng)
    panel = simulate_panel(spec, cell.T, rng)
    truth = ground_truth(spec)
    report = discovery.sypi_discover(
        panel,
        threshold1=cell.threshold1,
        threshold2=cell.threshold2,
        max_lag=cell.max_lag,
        lag_lambda=cell.lag_lambda,
        lag_coef_threshold=cell.lag_coef_threshold,
        lag_alpha=cell.lag_alpha,
        compute_all=True,
    )
    d = panel.n_candidates
    p1 = np.full(d, np.nan)
    p2 = np.full(d, np.nan)
    lag_present = np.zeros(d, dtype=bool)
    for r in report.results:
        lag_present[r.index] = r.lag is not None
        if r.p1 is not None:
            p1[r.index] = r.p1
        if r.p2 is not None:
            p2[r.index] = r.p2
    lambdas = list(granger_lambdas)
    if cell.granger_lambda is not None and cell.granger_lambda not in lambdas:
        lambdas.append(cell.granger_lambda)
    granger_sel = {
        lam: lasso_granger(panel, lam, cell.granger_max_lag).selected
        for lam in lambdas
    }
    return GraphRecord(
        graph_index=graph_index,
        lag_present=lag_present,
        p1=p1,
        p2=p2,
        is_cause=truth.is_cause,
        is_direct=truth.is_direct,
        granger_selected=granger_sel,
    )


@dataclass
class BenchCell:
    config: CellConfig
    counts: ConfusionCounts
    granger_counts: ConfusionCounts | None
    records: list[GraphRecord]
    errors: list[str] = field(default_factory=list)


def _record_truth(rec: GraphRecord) -> GroundTruth:
    return GroundTruth(
        is_direct=rec.is_direct,
        is_indirect=rec.is_cause & ~rec.is_direct,
        is_sg_unconfounded=np.ones_like(rec.is_cause),
        is_cause=rec.is_cause,
    )


def pool_records(
    records: list[GraphRecord], threshold1: float, threshold2: float
) -> ConfusionCounts:
    total = ConfusionCounts()
    for rec in records:
        total.add(
            compute_metrics(rec.sypi_selected(threshold1, threshold2), _record_truth(rec))
        )
    return total


def pool_granger(records: list[GraphRecord], lam: float) -> ConfusionCounts:
    total = ConfusionCounts()
    for rec in records:
        total.add(compute_metrics(rec.granger_selected[lam], _record_truth(rec)))
    return total


def run_cell(
    cell: CellConfig,
    root_seed: int,
    cell_index: int = 0,
    granger_lambdas: tuple[float, ...] = (),
    n_jobs: int = 1,
) -> BenchCell:
    """All graphs of one cell; per-graph failures are recorded, not
    fatal."""
    records: list[GraphRecord] = []
    errors: list[str] = []
    args = [
        (cell, root_seed, cell_index, g, tuple(granger_lambdas))
        for g in range(cell.n_graphs)
    ]
    if n_jobs > 1 and cell.n_graphs > 1:
        with ProcessPoolExecutor(max_workers=n_jobs) as pool:
            for out in pool.map(_run_graph_star, args):
                if isinstance(out, str):
                    errors.append(out)
                else:
                    records.append(out)
    else:
        for a in args:
            out = _run_graph_star(a)
            if isinstance(out, str):
                errors.append(out)
            else:
                records.append(out)
    counts = pool_records(records, cell.threshold1, cell.threshold2)
    granger_counts = (
        pool_granger(records, cell.granger_lambda)
        if cell.granger_lambda is not None
        else None
    )
    return BenchCell(
        config=cell,
        counts=counts,
        granger_counts=granger_counts,
        records=records,
        errors=errors,
    )


def _run_graph_star(args):
    cell, root_seed, cell_index, graph_index, lambdas = args
    try:
        return run_graph(cell, root_seed, cell_index, graph_index, lambdas)
    except Exception as exc:  # recorded per graph
        return f"graph {graph_index}: {type(exc).__name__}: {exc}"


def run_grid(
    cells: list[CellConfig], root_seed: int, n_jobs: int = 1
) -> list[BenchCell]:
    """Run every cell; deterministic in (cells, root_seed)."""
    return [
        run_cell(cell, root_seed, cell_index=i, n_jobs=n_jobs)
        for i, cell in enumerate(cells)
    ]


def default_grid(n_graphs: int = 100) -> list[CellConfig]:
    """Medium-density suite: T = 2000, one hidden series, 3..8 observed.
    Medium = the middle of the studied edge-probability ranges."""
    return [
        CellConfig(T=2000, n_obs=d, n_hidden=1, p_cross=0.15, p_target=0.2,
                   noise_pct=0.2, n_graphs=n_graphs)
        for d in range(3, 9)
    ]


# ---------------------------------------------------------------------------
# ROC


@dataclass
class RocPoint:
    method: str
    setting: float  # threshold1 for sypi, penalty for the baseline
    fpr: float
    tpr: float


def default_threshold1_grid(n: int = 12) -> np.ndarray:
    return np.geomspace(1e-4, 0.5, n)


def default_lambda_grid(n: int = 12) -> np.ndarray:
    return np.geomspace(5e-4, 0.5, n)


def roc_sweep(
    cell: CellConfig,
    root_seed: int,
    threshold1_grid=None,
    lambda_grid=None,
    cell_index: int = 0,
    threshold2: float | None = None,
    n_jobs: int = 1,
) -> list[RocPoint]:
    """Pooled (FPR, TPR) operating points: threshold1 sweep with
    threshold2 held fixed, plus a penalty sweep for the baseline.
    Points are sorted by FPR within each method."""
    t1_grid = (
        default_threshold1_grid() if threshold1_grid is None else np.asarray(threshold1_grid)
    )
    lam_grid = (
        default_lambda_grid() if lambda_grid is None else np.asarray(lambda_grid)
    )
    t2 = cell.threshold2 if threshold2 is None else threshold2
    bench = run_cell(
        cell, root_seed, cell_index, granger_lambdas=tuple(lam_grid), n_jobs=n_jobs
    )
    points: list[RocPoint] = []
    for t1 in t1_grid:
        counts = pool_records(bench.records, float(t1), t2)
        points.append(RocPoint("sypi", float(t1), counts.fpr, counts.tpr))
    for lam in lam_grid:
        counts = pool_granger(bench.records, float(lam))
        points.append(RocPoint("lasso_granger", float(lam), counts.fpr, counts.tpr))
    points.sort(key=lambda p: (p.method, p.fpr, p.tpr))
    return points


def staircase_tpr(points: list[RocPoint], fpr: float) -> float:
    """Best TPR the sweep attains at or below a given FPR."""
    best = 0.0
    for p in points:
        if not np.isnan(p.fpr) and p.fpr <= fpr and not np.isnan(p.tpr):
            best = max(best, p.tpr)
    return best


def roc_dominates(points_a: list[RocPoint], points_b: list[RocPoint]) -> bool:
    """True when curve A's staircase is at or above curve B's at every
    FPR knot both sweeps cover."""
    fprs_a = [p.fpr for p in points_a if not np.isnan(p.fpr)]
    fprs_b = [p.fpr for p in points_b if not np.isnan(p.fpr)]
    if not fprs_a or not fprs_b:
        return True
    f_max = min(max(fprs_a), max(fprs_b))
    knots = sorted({f for f in fprs_a + fprs_b if f <= f_max})
    return all(
        staircase_tpr(points_a, f) >= staircase_tpr(points_b, f) for f in knots
    )
