"""Command-line entry point.

Subcommands: discover (causes of a target column in a CSV), simulate
(random graph -> panel CSV + spec file), bench (metric grid -> CSV),
roc (threshold/penalty sweep -> CSV), oracle-check (population
guarantee suite). Exit codes: 0 ok, 1 usage, 2 data error, 3 internal
assertion or failed check.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import __version__, bench as bench_mod, io as io_mod, oracle
from .discovery import sypi_discover
from .lags import (
    DEFAULT_COEF_THRESHOLD,
    DEFAULT_LAG_ALPHA,
    DEFAULT_LAG_LAMBDA,
    DEFAULT_MAX_LAG,
)
from .simulate import GraphConfig, sample_graph_spec, simulate_panel

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_INTERNAL = 3

# low-sample preset: accept dependence more readily in test 1 and in the
# lag detector
REAL_DATA_THRESHOLD1 = 0.05
REAL_DATA_LAG_ALPHA = 0.05


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _build_parser() -> _Parser:
    p = _Parser(prog="sypi", description=__doc__)
    p.add_argument("--version", action="version", version=f"sypi {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    d = sub.add_parser("discover", help="identify causes of a target column")
    d.add_argument("--input", required=True, help="wide CSV with a header row")
    d.add_argument("--target", required=True, help="target column name")
    d.add_argument("--threshold1", type=float, default=None)
    d.add_argument("--threshold2", type=float, default=0.2)
    d.add_argument("--max-lag", type=int, default=DEFAULT_MAX_LAG)
    d.add_argument("--lag-lambda", type=float, default=DEFAULT_LAG_LAMBDA)
    d.add_argument("--lag-threshold", type=float, default=DEFAULT_COEF_THRESHOLD)
    d.add_argument("--lag-alpha", type=float, default=None)
    d.add_argument(
        "--preset",
        choices=["simulation", "real-data"],
        default="simulation",
        help="real-data lowers the dependence bar for short series",
    )
    d.add_argument("--missing-policy", choices=["ffill", "strict"], default="ffill")
    d.add_argument("--time-column", default="auto")
    d.add_argument("--json-out", default=None, help="write the report as JSON")

    s = sub.add_parser("simulate", help="sample a random graph and simulate a panel")
    s.add_argument("--seed", type=int, required=True)
    s.add_argument("--n-obs", type=int, required=True)
    s.add_argument("--n-hidden", type=int, default=0)
    s.add_argument("--p-cross", type=float, default=0.2)
    s.add_argument("--p-target", type=float, default=0.2)
    s.add_argument("--noise-pct", type=float, default=0.2)
    s.add_argument("--samples", type=int, default=2000)
    s.add_argument("--multi-lag", action="store_true")
    s.add_argument("--out-panel", required=True)
    s.add_argument("--out-spec", required=True)

    b = sub.add_parser("bench", help="run a benchmark grid")
    b.add_argument("--grid", default=None, help="JSON config; omit for the default grid")
    b.add_argument("--seed", type=int, required=True)
    b.add_argument("--out-dir", required=True)
    b.add_argument("--n-graphs", type=int, default=None, help="override per-cell graph count")
    b.add_argument("--jobs", type=int, default=1)

    r = sub.add_parser("roc", help="threshold/penalty sweep on one cell")
    r.add_argument("--seed", type=int, required=True)
    r.add_argument("--out-dir", required=True)
    r.add_argument("--n-obs", type=int, default=4)
    r.add_argument("--n-hidden", type=int, default=2)
    r.add_argument("--p-cross", type=float, default=0.2)
    r.add_argument("--p-target", type=float, default=0.2)
    r.add_argument("--noise-pct", type=float, default=0.2)
    r.add_argument("--samples", type=int, default=2000)
    r.add_argument("--n-graphs", type=int, default=100)
    r.add_argument("--jobs", type=int, default=1)

    o = sub.add_parser("oracle-check", help="verify the population guarantees")
    o.add_argument("--specs", type=int, default=200)
    o.add_argument("--seed", type=int, default=0)
    o.add_argument("--multi-lag", action="store_true")
    o.add_argument(
        "--dump-dir",
        default="oracle_counterexamples",
        help="where counterexample specs are written on failure",
    )
    return p


def _cmd_discover(args) -> int:
    threshold1 = args.threshold1
    lag_alpha = args.lag_alpha
    if args.preset == "real-data":
        if threshold1 is None:
            threshold1 = REAL_DATA_THRESHOLD1
        if lag_alpha is None:
            lag_alpha = REAL_DATA_LAG_ALPHA
    if threshold1 is None:
        threshold1 = 0.01
    if lag_alpha is None:
        lag_alpha = DEFAULT_LAG_ALPHA
    panel = io_mod.load_csv(
        args.input,
        target_column=args.target,
        missing_policy=args.missing_policy,
        time_column=args.time_column,
    )
    report = sypi_discover(
        panel,
        threshold1=threshold1,
        threshold2=args.threshold2,
        max_lag=args.max_lag,
        lag_lambda=args.lag_lambda,
        lag_coef_threshold=args.lag_threshold,
        lag_alpha=lag_alpha,
    )
    print(io_mod.report_table(report))
    if args.json_out:
        io_mod.save_report_json(report, args.json_out)
    return EXIT_OK


def _cmd_simulate(args) -> int:
    cfg = GraphConfig(
        n_obs=args.n_obs,
        n_hidden=args.n_hidden,
        p_cross=args.p_cross,
        p_target=args.p_target,
        noise_pct=args.noise_pct,
        multi_lag_mode=args.multi_lag,
    )
    rng = np.random.default_rng(args.seed)
    spec = sample_graph_spec(cfg, rng)
    panel = simulate_panel(spec, args.samples, rng)
    spec.save(args.out_spec)
    io_mod.save_panel_csv(panel, args.out_panel)
    print(f"wrote {args.out_panel} ({panel.n_samples} x {panel.n_candidates}) "
          f"and {args.out_spec}")
    return EXIT_OK


def _load_grid(path, n_graphs_override):
    if path is None:
        cells = bench_mod.default_grid()
    else:
        with open(path) as fh:
            payload = json.load(fh)
        cells = [bench_mod.CellConfig.from_dict(c) for c in payload["cells"]]
    if n_graphs_override is not None:
        for c in cells:
            c.n_graphs = n_graphs_override
    return cells


def _cmd_bench(args) -> int:
    cells = _load_grid(args.grid, args.n_graphs)
    results = bench_mod.run_grid(cells, args.seed, n_jobs=args.jobs)
    os.makedirs(args.out_dir, exist_ok=True)
    metrics_path = os.path.join(args.out_dir, "metrics.csv")
    io_mod.save_metrics_csv(results, metrics_path)
    io_mod.write_manifest(
        os.path.join(args.out_dir, "manifest.json"),
        command="bench",
        config={"cells": [c.to_dict() for c in cells]},
        seed=args.seed,
    )
    for idx, cell in enumerate(results):
        line = (f"cell {idx}: n_obs={cell.config.n_obs} "
                f"fpr={cell.counts.fpr:.4f} fnr_total={cell.counts.fnr_total:.4f} "
                f"fnr_direct={cell.counts.fnr_direct:.4f}")
        if cell.errors:
            line += f" ({len(cell.errors)} failed graphs)"
        print(line)
    print(f"wrote {metrics_path}")
    return EXIT_OK


def _cmd_roc(args) -> int:
    cell = bench_mod.CellConfig(
        T=args.samples,
        n_obs=args.n_obs,
        n_hidden=args.n_hidden,
        p_cross=args.p_cross,
        p_target=args.p_target,
        noise_pct=args.noise_pct,
        n_graphs=args.n_graphs,
    )
    points = bench_mod.roc_sweep(cell, args.seed, n_jobs=args.jobs)
    os.makedirs(args.out_dir, exist_ok=True)
    roc_path = os.path.join(args.out_dir, "roc.csv")
    io_mod.save_roc_csv(points, roc_path)
    io_mod.write_manifest(
        os.path.join(args.out_dir, "manifest.json"),
        command="roc",
        config=cell.to_dict(),
        seed=args.seed,
    )
    print(f"wrote {roc_path} ({len(points)} points)")
    return EXIT_OK


def _cmd_oracle_check(args) -> int:
    result = oracle.check_population_guarantees(
        n_specs=args.specs, seed=args.seed, multi_lag=args.multi_lag
    )
    print(result.summary())
    if result.ok:
        return EXIT_OK
    os.makedirs(args.dump_dir, exist_ok=True)
    for n, v in enumerate(result.necessity_violations + result.sufficiency_violations):
        print("  " + v.describe())
        path = os.path.join(args.dump_dir, f"counterexample_{n}.json")
        with io_mod.atomic_write(path) as fh:
            json.dump(
                {"kind": v.kind, "candidate": v.candidate,
                 "conditions": v.conditions, "spec": v.spec},
                fh,
                indent=2,
            )
    print(f"counterexample specs written to {args.dump_dir}/")
    return EXIT_INTERNAL


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        handler = {
            "discover": _cmd_discover,
            "simulate": _cmd_simulate,
            "bench": _cmd_bench,
            "roc": _cmd_roc,
            "oracle-check": _cmd_oracle_check,
        }[args.command]
        return handler(args)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --version / --help
        code = exc.code if isinstance(exc.code, int) else 0
        return code
    except io_mod.DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (AssertionError, RuntimeError) as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
