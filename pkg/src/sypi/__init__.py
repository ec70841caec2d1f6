"""Causal feature selection for time series under latent confounding.

The library identifies direct and indirect causes of a target series
from a panel of candidate series using two partial-correlation tests
per candidate at an automatically detected lag, together with the
machinery needed to study the method: a random-graph simulator with a
structural-assumption validator, a d-separation oracle that verifies
the population-level guarantees, a Lasso-Granger baseline, and a
benchmark harness for false-positive / false-negative rates and ROC
sweeps.
"""

__version__ = "0.1.0"

from .bench import (
    BenchCell,
    CellConfig,
    ConfusionCounts,
    RocPoint,
    compute_metrics,
    default_grid,
    roc_dominates,
    roc_sweep,
    run_cell,
    run_grid,
)
from .discovery import (
    CAUSE,
    NO_LAG,
    NOT_CAUSE,
    TARGET,
    DiscoveryReport,
    NodeRef,
    align_samples,
    build_conditioning_set,
    sypi_discover,
)
from .granger import GrangerReport, lasso_granger, tune_lambda_for_fnr
from .io import load_csv, save_panel_csv
from .lags import LagTable, find_all_lags, find_min_lag, lag_statistics
from .oracle import (
    UnrolledDag,
    check_population_guarantees,
    d_separated,
    graphical_lags,
    population_conditions,
    unroll,
)
from .panel import TimeSeriesPanel
from .simulate import (
    Edge,
    FullTimeGraphSpec,
    GraphConfig,
    GroundTruth,
    ground_truth,
    has_single_lag_dependencies,
    sample_graph_spec,
    simulate_panel,
    simulate_raw,
    validate_spec,
)
from .stats import (
    CiResult,
    LassoFit,
    ci_test,
    fisher_z_pvalue,
    lasso_cd,
    ols_residuals,
    partial_correlation,
)

__all__ = [
    "__version__",
    "BenchCell",
    "CellConfig",
    "ConfusionCounts",
    "RocPoint",
    "compute_metrics",
    "default_grid",
    "roc_dominates",
    "roc_sweep",
    "run_cell",
    "run_grid",
    "CAUSE",
    "NO_LAG",
    "NOT_CAUSE",
    "TARGET",
    "DiscoveryReport",
    "NodeRef",
    "align_samples",
    "build_conditioning_set",
    "sypi_discover",
    "GrangerReport",
    "lasso_granger",
    "tune_lambda_for_fnr",
    "load_csv",
    "save_panel_csv",
    "LagTable",
    "find_all_lags",
    "find_min_lag",
    "lag_statistics",
    "UnrolledDag",
    "check_population_guarantees",
    "d_separated",
    "graphical_lags",
    "population_conditions",
    "unroll",
    "TimeSeriesPanel",
    "Edge",
    "FullTimeGraphSpec",
    "GraphConfig",
    "GroundTruth",
    "ground_truth",
    "has_single_lag_dependencies",
    "sample_graph_spec",
    "simulate_panel",
    "simulate_raw",
    "validate_spec",
    "CiResult",
    "LassoFit",
    "ci_test",
    "fisher_z_pvalue",
    "lasso_cd",
    "ols_residuals",
    "partial_correlation",
]
