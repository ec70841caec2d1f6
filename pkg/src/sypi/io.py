"""CSV ingestion, report/metric serialization and run manifests.

Input CSVs are wide: a header row, optionally one time-index column
(ignored for the math), numeric data columns. Written files are
replaced atomically (write-temp-then-rename) so failed runs leave no
partial artifacts.
"""

from __future__ import annotations

import csv
import json
import os
import warnings
from contextlib import contextmanager
from datetime import datetime, timezone

import numpy as np

from .bench import BenchCell, RocPoint
from .discovery import DiscoveryReport
from .panel import MIN_RECOMMENDED_LENGTH, TimeSeriesPanel

PANEL_DECIMALS = 12  # significant digits written to panel CSVs

_TIME_COLUMN_NAMES = {
    "date", "time", "t", "index", "period", "month", "week", "year", "day",
}


class DataError(ValueError):
    """Unusable input data (maps to exit code 2 on the command line)."""


@contextmanager
def atomic_write(path):
    tmp = f"{path}.tmp"
    fh = open(tmp, "w", newline="")
    try:
        yield fh
    except BaseException:
        fh.close()
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    fh.close()
    os.replace(tmp, path)


def _parse_cell(raw: str) -> float:
    raw = raw.strip()
    if not raw or raw.lower() in ("na", "nan", "null", "none"):
        return np.nan
    try:
        return float(raw)
    except ValueError:
        return np.nan


def load_csv(
    path,
    target_column: str,
    missing_policy: str = "ffill",
    time_column: str | None = "auto",
    standardize: bool = True,
) -> TimeSeriesPanel:
    """Read a wide CSV into a panel.

    ``missing_policy`` "ffill" forward-fills interior gaps and drops
    leading rows that cannot be filled; "strict" raises on any
    non-numeric cell. ``time_column`` "auto" treats the first column as
    a time index when its name suggests one or it is mostly
    non-numeric; pass a column name to force it, or None for none.
    Near-constant columns are flagged on the returned panel.
    """
    if missing_policy not in ("ffill", "strict"):
        raise ValueError(f"unknown missing policy {missing_policy!r}")
    try:
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    if len(rows) < 2:
        raise DataError(f"{path}: need a header row and at least one data row")
    header = [h.strip() for h in rows[0]]
    data_rows = [r for r in rows[1:] if any(cell.strip() for cell in r)]

    def column(idx: int) -> list[str]:
        return [r[idx] if idx < len(r) else "" for r in data_rows]

    time_idx: int | None = None
    if time_column == "auto":
        first = column(0)
        n_bad = sum(1 for c in first if np.isnan(_parse_cell(c)))
        if header[0].lower() in _TIME_COLUMN_NAMES or n_bad > len(first) / 2:
            time_idx = 0
    elif time_column is not None:
        if time_column not in header:
            raise DataError(f"time column {time_column!r} not in header")
        time_idx = header.index(time_column)
    if target_column not in header:
        raise DataError(f"target column {target_column!r} not in header")
    target_idx = header.index(target_column)
    if target_idx == time_idx:
        raise DataError("target column cannot be the time column")

    data_idx = [i for i in range(len(header)) if i not in (time_idx,)]
    values = np.empty((len(data_rows), len(data_idx)))
    for out_col, i in enumerate(data_idx):
        col = column(i)
        parsed = np.array([_parse_cell(c) for c in col])
        if missing_policy == "strict" and np.isnan(parsed).any():
            bad = int(np.flatnonzero(np.isnan(parsed))[0])
            raise DataError(
                f"non-numeric or missing cell in column {header[i]!r}, row {bad + 2}"
            )
        values[:, out_col] = parsed

    # forward-fill interior/trailing gaps, then drop unfillable leading rows
    for col in range(values.shape[1]):
        v = values[:, col]
        for t in range(1, v.shape[0]):
            if np.isnan(v[t]):
                v[t] = v[t - 1]
    keep = ~np.isnan(values).any(axis=1)
    first_keep = int(np.argmax(keep)) if keep.any() else len(data_rows)
    values = values[first_keep:]
    if values.shape[0] == 0:
        raise DataError(f"{path}: no usable rows after cleaning")
    if values.shape[0] < MIN_RECOMMENDED_LENGTH:
        warnings.warn(
            f"{path}: only {values.shape[0]} usable rows; results will be noisy",
            stacklevel=2,
        )
    labels = None
    if time_idx is not None:
        labels = [r[time_idx].strip() for r in data_rows[first_keep:]]

    names = [header[i] for i in data_idx]
    target_pos = names.index(target_column)
    target = values[:, target_pos]
    cand = np.delete(values, target_pos, axis=1)
    cand_names = [n for n in names if n != target_column]
    near_constant = []
    if standardize:
        for col in range(cand.shape[1]):
            cand[:, col], flat = _standardize_flagging(cand[:, col])
            if flat:
                near_constant.append(cand_names[col])
        target, flat = _standardize_flagging(target)
        if flat:
            near_constant.append(target_column)
    if near_constant:
        warnings.warn(f"near-constant columns: {near_constant}", stacklevel=2)
    return TimeSeriesPanel(
        candidates=cand,
        target=target,
        names=cand_names,
        target_name=target_column,
        time_labels=labels,
        near_constant=near_constant,
    )


def _standardize_flagging(x: np.ndarray):
    x = x - x.mean()
    sd = x.std()
    if sd < 1e-12:
        return x, True
    return x / sd, False


def save_panel_csv(panel: TimeSeriesPanel, path) -> None:
    """Panel to CSV: time index, candidate columns, target column.
    Values carry 12 significant digits, enough to round-trip through
    :func:`load_csv` to that precision."""
    labels = panel.time_labels or [str(t) for t in range(panel.n_samples)]
    with atomic_write(path) as fh:
        w = csv.writer(fh)
        w.writerow(["t"] + panel.names + [panel.target_name])
        for t in range(panel.n_samples):
            row = [labels[t]]
            row += [f"{v:.{PANEL_DECIMALS}g}" for v in panel.candidates[t]]
            row.append(f"{panel.target[t]:.{PANEL_DECIMALS}g}")
            w.writerow(row)


def report_table(report: DiscoveryReport) -> str:
    """Human-readable table of a discovery report."""
    headers = ["candidate", "lag", "p1", "p2", "decision", "flags"]
    rows = []
    for r in report.results:
        rows.append(
            [
                r.name,
                "-" if r.lag is None else str(r.lag),
                "-" if r.p1 is None else f"{r.p1:.4g}",
                "-" if r.p2 is None else f"{r.p2:.4g}",
                r.decision,
                ",".join(r.flags) if r.flags else "",
            ]
        )
    widths = [max(len(h), *(len(row[i]) for row in rows)) if rows else len(h)
              for i, h in enumerate(headers)]
    lines = [
        "  ".join(h.ljust(widths[i]) for i, h in enumerate(headers)),
        "  ".join("-" * w for w in widths),
    ]
    lines += ["  ".join(row[i].ljust(widths[i]) for i in range(len(headers)))
              for row in rows]
    causes = ", ".join(report.causes) if report.causes else "(none)"
    lines.append("")
    lines.append(f"causes of {report.target_name}: {causes}")
    return "\n".join(lines)


def save_report_json(report: DiscoveryReport, path) -> None:
    with atomic_write(path) as fh:
        json.dump(report.to_dict(), fh, indent=2)


def write_manifest(path, command: str, config: dict, seed) -> None:
    """Everything needed to replay a run: tool version, command,
    config, seed."""
    from . import __version__

    payload = {
        "tool": "sypi",
        "version": __version__,
        "created_utc": datetime.now(timezone.utc).isoformat(),
        "command": command,
        "seed": seed,
        "config": config,
    }
    with atomic_write(path) as fh:
        json.dump(payload, fh, indent=2)


_METRIC_FIELDS = [
    "cell_index", "T", "n_obs", "n_hidden", "p_cross", "p_target", "noise_pct",
    "n_graphs", "threshold1", "threshold2", "method", "fpr", "fnr_total",
    "fnr_direct", "tp", "fp", "tn", "fn", "tp_direct", "fn_direct", "n_errors",
]


def save_metrics_csv(cells: list[BenchCell], path) -> None:
    """One row per cell and method."""
    with atomic_write(path) as fh:
        w = csv.writer(fh)
        w.writerow(_METRIC_FIELDS)
        for idx, cell in enumerate(cells):
            cfg = cell.config
            for method, counts in (
                ("sypi", cell.counts),
                ("lasso_granger", cell.granger_counts),
            ):
                if counts is None:
                    continue
                w.writerow(
                    [
                        idx, cfg.T, cfg.n_obs, cfg.n_hidden, cfg.p_cross,
                        cfg.p_target, cfg.noise_pct, cfg.n_graphs,
                        cfg.threshold1, cfg.threshold2, method,
                        f"{counts.fpr:.6g}", f"{counts.fnr_total:.6g}",
                        f"{counts.fnr_direct:.6g}", counts.tp, counts.fp,
                        counts.tn, counts.fn, counts.tp_direct,
                        counts.fn_direct, len(cell.errors),
                    ]
                )


def save_roc_csv(points: list[RocPoint], path) -> None:
    with atomic_write(path) as fh:
        w = csv.writer(fh)
        w.writerow(["method", "setting", "fpr", "tpr"])
        for p in points:
            w.writerow([p.method, f"{p.setting:.6g}", f"{p.fpr:.6g}", f"{p.tpr:.6g}"])
