"""Population-level verification through d-separation.

A graph spec is unrolled into a finite window of time-indexed nodes;
d-separation queries on that window answer, without any sampling,
whether the two selection conditions hold for a candidate. Used to
check the population guarantees empirically over random specs:

  necessity    every direct unconfounded cause must pass both
               conditions (single-lag specs);
  sufficiency  every candidate passing both conditions must be a cause
               with an unconfounded path (single-lag specs) or at least
               a cause (multi-lag specs).
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .discovery import TARGET, NodeRef, build_conditioning_set
from .lags import LagTable
from .simulate import (
    FullTimeGraphSpec,
    GraphConfig,
    GroundTruth,
    ground_truth,
    has_single_lag_dependencies,
    sample_graph_spec,
)

DEFAULT_WINDOW = 40


class WindowInstabilityError(RuntimeError):
    """Oracle results differ between anchors; enlarge the window."""


@dataclass
class UnrolledDag:
    """Finite truncation of the infinite time graph.

    Node ids are t * n_series + series for t in [0, window)."""

    n_series: int
    window: int
    parents: list[list[int]]
    children: list[list[int]]
    observable: np.ndarray

    def node(self, series: int, t: int) -> int:
        if not 0 <= t < self.window:
            raise ValueError(f"time index {t} outside window [0, {self.window})")
        if not 0 <= series < self.n_series:
            raise ValueError(f"unknown series {series}")
        return t * self.n_series + series

    @property
    def n_nodes(self) -> int:
        return self.n_series * self.window


def unroll(spec: FullTimeGraphSpec, window: int = DEFAULT_WINDOW) -> UnrolledDag:
    """Materialize the spec's edges over a finite window."""
    min_window = 4 * (1 + spec.max_lag) + spec.n_series
    if window < min_window:
        raise ValueError(f"window {window} too small; need >= {min_window}")
    n = spec.n_series
    n_nodes = n * window
    parents: list[list[int]] = [[] for _ in range(n_nodes)]
    children: list[list[int]] = [[] for _ in range(n_nodes)]

    def add(src: int, dst: int) -> None:
        children[src].append(dst)
        parents[dst].append(src)

    for s in range(n):
        if spec.self_loops[s] > 0:
            for t in range(1, window):
                add((t - 1) * n + s, t * n + s)
    for e in spec.edges:
        for t in range(e.lag, window):
            add((t - e.lag) * n + e.src, t * n + e.dst)
    observable = np.ones(n, dtype=bool)
    observable[: spec.n_hidden] = False
    return UnrolledDag(
        n_series=n,
        window=window,
        parents=parents,
        children=children,
        observable=np.tile(observable, window),
    )


def d_separated(dag: UnrolledDag, a: int, b: int, z: set[int]) -> bool:
    """True iff every path between nodes a and b is blocked by z.

    Reachability with collider handling: a collider passes only when it
    is in z or has a descendant in z, which is precomputed as one
    reverse reachability pass from z.
    """
    if a in z or b in z:
        raise ValueError("query nodes must not be in the conditioning set")
    for node in (a, b):
        if not 0 <= node < dag.n_nodes:
            raise ValueError(f"unknown node id {node}")
    # ancestors of z (including z): nodes whose descendants meet z
    anc_z = set(z)
    stack = list(z)
    while stack:
        v = stack.pop()
        for p in dag.parents[v]:
            if p not in anc_z:
                anc_z.add(p)
                stack.append(p)

    UP, DOWN = 0, 1  # direction of travel when leaving a node
    seen = {(a, UP), (a, DOWN)}
    queue = deque(seen)
    while queue:
        v, direction = queue.popleft()
        if v == b:
            return False
        if direction == UP:
            # arrived from a child (or start); may keep climbing or turn down
            if v not in z:
                for nxt in dag.parents[v]:
                    if (nxt, UP) not in seen:
                        seen.add((nxt, UP))
                        queue.append((nxt, UP))
                for nxt in dag.children[v]:
                    if (nxt, DOWN) not in seen:
                        seen.add((nxt, DOWN))
                        queue.append((nxt, DOWN))
        else:
            # arrived from a parent: v is a chain or a collider
            if v not in z:
                for nxt in dag.children[v]:
                    if (nxt, DOWN) not in seen:
                        seen.add((nxt, DOWN))
                        queue.append((nxt, DOWN))
            if v in anc_z:
                for nxt in dag.parents[v]:
                    if (nxt, UP) not in seen:
                        seen.add((nxt, UP))
                        queue.append((nxt, UP))
    return True


# ---------------------------------------------------------------------------
# graphical lags and the two conditions


def _oracle_geometry(spec: FullTimeGraphSpec) -> tuple[int, int, int, int]:
    """(window, anchor1, anchor2, max_search_lag) sized so every query
    node of both anchors stays inside the window."""
    max_search = 2 * spec.n_series + 2
    pad = max_search + 2
    anchor1 = pad
    anchor2 = anchor1 + 2 * (spec.max_lag + 1)
    window = max(DEFAULT_WINDOW, anchor2 + pad)
    return window, anchor1, anchor2, max_search


def _graphical_lag_at(
    dag: UnrolledDag, spec: FullTimeGraphSpec, series: int, anchor: int, max_search: int
) -> int | None:
    """Minimum w >= 0 with the series node at the anchor d-connected to
    the target at anchor + w, given the series' in-window past."""
    past = {dag.node(series, t) for t in range(anchor)}
    x = dag.node(series, anchor)
    for w in range(max_search + 1):
        y = dag.node(spec.target, anchor + w)
        if not d_separated(dag, x, y, past):
            return w
    return None


def graphical_lags(spec: FullTimeGraphSpec, dag: UnrolledDag | None = None) -> LagTable:
    """Population analogue of the lasso lag search, evaluated at two
    anchors; a disagreement raises :class:`WindowInstabilityError`."""
    window, anchor1, anchor2, max_search = _oracle_geometry(spec)
    if dag is None:
        dag = unroll(spec, window)
    lags: dict[int, int] = {}
    for k in range(spec.n_obs):
        s = spec.candidate_series(k)
        w1 = _graphical_lag_at(dag, spec, s, anchor1, max_search)
        w2 = _graphical_lag_at(dag, spec, s, anchor2, max_search)
        if w1 != w2:
            raise WindowInstabilityError(
                f"lag of candidate {k} differs between anchors ({w1} vs {w2})"
            )
        if w1 is not None:
            lags[k] = w1
    return LagTable(lags=lags, n_candidates=spec.n_obs)


def population_conditions(
    spec: FullTimeGraphSpec,
    i: int,
    lag_table: LagTable | None = None,
    dag: UnrolledDag | None = None,
) -> tuple[bool, bool]:
    """(condition-1 dependence, condition-2 independence) for candidate
    i, evaluated graphically with the same conditioning set the
    finite-sample algorithm uses. Results are checked at two anchors."""
    window, anchor1, anchor2, _ = _oracle_geometry(spec)
    if dag is None:
        dag = unroll(spec, window)
    if lag_table is None:
        lag_table = graphical_lags(spec, dag)
    lag = lag_table.lag(i)
    if lag is None:
        raise ValueError(f"candidate {i} has no graphical lag")
    cond_refs = build_conditioning_set(i, lag_table)

    def eval_at(anchor: int) -> tuple[bool, bool]:
        def node_of(ref: NodeRef) -> int:
            series = spec.target if ref.series == TARGET else spec.candidate_series(
                ref.series
            )
            return dag.node(series, anchor + ref.offset)

        x_now = node_of(NodeRef(i, 0))
        x_prev = node_of(NodeRef(i, -1))
        y_node = node_of(NodeRef(TARGET, lag))
        z1 = {node_of(r) for r in cond_refs} | {node_of(NodeRef(TARGET, lag - 1))}
        cond1 = not d_separated(dag, x_now, y_node, z1)
        cond2 = d_separated(dag, x_prev, y_node, z1 | {x_now})
        return cond1, cond2

    r1 = eval_at(anchor1)
    r2 = eval_at(anchor2)
    if r1 != r2:
        raise WindowInstabilityError(
            f"conditions for candidate {i} differ between anchors: {r1} vs {r2}"
        )
    return r1


# ---------------------------------------------------------------------------
# population guarantee suite


@dataclass
class Violation:
    kind: str  # "necessity" | "sufficiency"
    spec_index: int
    candidate: int
    conditions: tuple[bool, bool] | None
    spec: dict

    def describe(self) -> str:
        return (
            f"{self.kind} violation: spec #{self.spec_index}, candidate "
            f"{self.candidate}, conditions={self.conditions}"
        )


@dataclass
class PopulationCheckResult:
    n_specs: int
    n_candidates_tested: int
    multi_lag: bool
    necessity_violations: list[Violation] = field(default_factory=list)
    sufficiency_violations: list[Violation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.necessity_violations and not self.sufficiency_violations

    def summary(self) -> str:
        mode = "multi-lag" if self.multi_lag else "single-lag"
        return (
            f"{self.n_specs} specs ({mode}), {self.n_candidates_tested} candidate "
            f"tests: {len(self.necessity_violations)} necessity violations / "
            f"{len(self.sufficiency_violations)} sufficiency violations"
        )


def _sample_single_lag_spec(cfg: GraphConfig, rng) -> FullTimeGraphSpec:
    for _ in range(2000):
        spec = sample_graph_spec(cfg, rng)
        if has_single_lag_dependencies(spec):
            return spec
    raise RuntimeError("could not sample a single-lag spec; lower the densities")


def check_population_guarantees(
    n_specs: int = 200,
    seed=0,
    multi_lag: bool = False,
    n_obs_range: tuple[int, int] = (2, 6),
    n_hidden_range: tuple[int, int] = (0, 2),
    density_range: tuple[float, float] = (0.1, 0.3),
) -> PopulationCheckResult:
    """Run the necessity/sufficiency checks over random specs.

    Single-lag mode samples only specs whose candidates all have a
    unique lag with the target, and demands that (a) every direct
    unconfounded cause passes both conditions and (b) every candidate
    passing both conditions is an unconfounded cause. Multi-lag mode
    checks only that (b') both conditions imply a (possibly confounded)
    cause.
    """
    rng = np.random.default_rng(seed)
    result = PopulationCheckResult(
        n_specs=n_specs, n_candidates_tested=0, multi_lag=multi_lag
    )
    for idx in range(n_specs):
        cfg = GraphConfig(
            n_obs=int(rng.integers(n_obs_range[0], n_obs_range[1] + 1)),
            n_hidden=int(rng.integers(n_hidden_range[0], n_hidden_range[1] + 1)),
            p_cross=float(rng.uniform(*density_range)),
            p_target=float(rng.uniform(*density_range)),
            multi_lag_mode=multi_lag,
        )
        if multi_lag:
            spec = sample_graph_spec(cfg, rng)
        else:
            spec = _sample_single_lag_spec(cfg, rng)
        truth = ground_truth(spec)
        window, *_ = _oracle_geometry(spec)
        dag = unroll(spec, window)
        lag_table = graphical_lags(spec, dag)
        for k in range(spec.n_obs):
            conds = None
            if lag_table.present(k):
                result.n_candidates_tested += 1
                conds = population_conditions(spec, k, lag_table, dag)
            passed = conds == (True, True)
            if not multi_lag and truth.is_direct[k] and truth.is_sg_unconfounded[k]:
                if not passed:
                    result.necessity_violations.append(
                        Violation("necessity", idx, k, conds, spec.to_dict())
                    )
            if passed:
                ok = (
                    truth.is_cause[k]
                    if multi_lag
                    else truth.is_cause[k] and truth.is_sg_unconfounded[k]
                )
                if not ok:
                    result.sufficiency_violations.append(
                        Violation("sufficiency", idx, k, conds, spec.to_dict())
                    )
    return result


def _truth_for_tests(spec: FullTimeGraphSpec) -> GroundTruth:
    # convenience re-export point for test modules
    return ground_truth(spec)
