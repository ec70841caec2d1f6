"""Random structural-model specifications and linear panel simulation.

A specification fixes a summary graph over hidden series, observed
candidate series and one target series (always a sink), with weighted
cross edges at lag 1 (plus optional lag-2 edges in multi-lag mode) and
unit-lag self-loops. Panels are generated as stationary linear
processes: every step is the weighted sum of the previous step(s) of
all incoming series plus Gaussian noise.

Series are indexed hidden first, then observed, target last; cross
edges only run from lower to higher index, which keeps the summary
graph acyclic by construction.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace

import numpy as np

from .panel import TimeSeriesPanel

WEIGHT_LO = 0.7
WEIGHT_HI = 0.95
SPECTRAL_LIMIT = 0.98
SPECTRAL_TARGET = 0.95
DEFAULT_BURN_IN = 500
SCHEMA_VERSION = 1
_MAX_SAMPLE_ATTEMPTS = 10000


@dataclass(frozen=True)
class Edge:
    src: int
    dst: int
    lag: int
    weight: float


@dataclass
class FullTimeGraphSpec:
    """Ground-truth structural model.

    ``self_loops[s] == 0`` means series s has no memory (allowed for
    hidden series only). ``stabilized`` marks that a spectral rescale
    of the weights was applied after sampling.
    """

    n_obs: int
    n_hidden: int
    edges: list[Edge]
    self_loops: np.ndarray
    noise_std: np.ndarray
    multi_lag_mode: bool = False
    stabilized: bool = False

    def __post_init__(self):
        self.self_loops = np.asarray(self.self_loops, dtype=float)
        self.noise_std = np.asarray(self.noise_std, dtype=float)

    @property
    def n_series(self) -> int:
        return self.n_hidden + self.n_obs + 1

    @property
    def target(self) -> int:
        return self.n_series - 1

    def is_hidden(self, s: int) -> bool:
        return s < self.n_hidden

    def candidate_series(self, k: int) -> int:
        """Series index of panel column k."""
        return self.n_hidden + k

    @property
    def max_lag(self) -> int:
        return max((e.lag for e in self.edges), default=1)

    def series_name(self, s: int) -> str:
        if s == self.target:
            return "Y"
        if self.is_hidden(s):
            return f"U{s + 1}"
        return f"X{s - self.n_hidden + 1}"

    def children(self) -> list[list[tuple[int, int, float]]]:
        """Adjacency: children[src] = [(dst, lag, weight), ...]."""
        adj: list[list[tuple[int, int, float]]] = [[] for _ in range(self.n_series)]
        for e in self.edges:
            adj[e.src].append((e.dst, e.lag, e.weight))
        return adj

    def parents_count(self) -> np.ndarray:
        indeg = np.zeros(self.n_series, dtype=int)
        for e in self.edges:
            indeg[e.dst] += 1
        return indeg

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "n_obs": self.n_obs,
            "n_hidden": self.n_hidden,
            "multi_lag_mode": self.multi_lag_mode,
            "stabilized": self.stabilized,
            "series": [
                {
                    "name": self.series_name(s),
                    "kind": "target"
                    if s == self.target
                    else ("hidden" if self.is_hidden(s) else "observed"),
                    "self_loop": float(self.self_loops[s]),
                    "noise_std": float(self.noise_std[s]),
                }
                for s in range(self.n_series)
            ],
            "edges": [
                {
                    "src": self.series_name(e.src),
                    "dst": self.series_name(e.dst),
                    "lag": e.lag,
                    "weight": e.weight,
                }
                for e in self.edges
            ],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "FullTimeGraphSpec":
        if d.get("schema_version") != SCHEMA_VERSION:
            raise ValueError(f"unsupported spec schema: {d.get('schema_version')!r}")
        names = [s["name"] for s in d["series"]]
        index = {name: i for i, name in enumerate(names)}
        n_hidden = sum(1 for s in d["series"] if s["kind"] == "hidden")
        n_obs = sum(1 for s in d["series"] if s["kind"] == "observed")
        spec = cls(
            n_obs=n_obs,
            n_hidden=n_hidden,
            edges=[
                Edge(index[e["src"]], index[e["dst"]], int(e["lag"]), float(e["weight"]))
                for e in d["edges"]
            ],
            self_loops=np.array([s["self_loop"] for s in d["series"]], dtype=float),
            noise_std=np.array([s["noise_std"] for s in d["series"]], dtype=float),
            multi_lag_mode=bool(d["multi_lag_mode"]),
            stabilized=bool(d["stabilized"]),
        )
        return spec

    def save(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=2)

    @classmethod
    def load(cls, path) -> "FullTimeGraphSpec":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


@dataclass
class GroundTruth:
    """Per-candidate labels derived from the summary graph."""

    is_direct: np.ndarray
    is_indirect: np.ndarray
    is_sg_unconfounded: np.ndarray
    is_cause: np.ndarray


@dataclass
class GraphConfig:
    n_obs: int
    n_hidden: int = 0
    p_cross: float = 0.2
    p_target: float = 0.2
    noise_pct: float = 0.2
    multi_lag_mode: bool = False
    ensure_target_edge: bool = True
    p_hidden_memory: float = 0.5

    def __post_init__(self):
        for name in ("p_cross", "p_target", "p_hidden_memory"):
            p = getattr(self, name)
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"{name} must be in [0, 1], got {p}")
        if self.n_obs < 1 or self.n_hidden < 0:
            raise ValueError("need n_obs >= 1 and n_hidden >= 0")
        if self.noise_pct <= 0:
            raise ValueError("noise_pct must be positive")


# ---------------------------------------------------------------------------
# summary-graph reachability helpers


def _simple_children(spec: FullTimeGraphSpec) -> list[set[int]]:
    adj = [set() for _ in range(spec.n_series)]
    for e in spec.edges:
        adj[e.src].add(e.dst)
    return adj


def _reachable_from(adj: list[set[int]], start: int, skip: int | None = None) -> set[int]:
    """Nodes reachable from ``start`` by a directed path of length >= 1
    that does not pass through ``skip``."""
    seen: set[int] = set()
    stack = [start]
    while stack:
        v = stack.pop()
        for u in adj[v]:
            if u == skip or u in seen:
                continue
            seen.add(u)
            stack.append(u)
    return seen


def path_lag_sums(
    spec: FullTimeGraphSpec, src: int, dst: int, banned: frozenset[int] = frozenset()
) -> set[int]:
    """All total lags of directed paths src -> dst whose intermediate
    series avoid ``banned``."""
    adj = spec.children()
    memo: dict[int, set[int]] = {}

    def sums(v: int) -> set[int]:
        if v in memo:
            return memo[v]
        out: set[int] = set()
        for (u, lag, _w) in adj[v]:
            if u == dst:
                out.add(lag)
            elif u not in banned:
                out.update(lag + s for s in sums(u))
        memo[v] = out
        return out

    return sums(src)


def series_target_lags(spec: FullTimeGraphSpec, s: int) -> set[int]:
    """All lags at which series s reaches the target along memory-free
    collider-free paths: directed-path lags plus, for every common
    cause c of s and the target, all differences len(c->target) -
    len(c->s).

    Shared intermediate series between the two branches of a common
    cause are not excluded, so the returned set can overstate; used
    only as a (conservative) multi-lag detector.
    """
    y = spec.target
    if s == y:
        raise ValueError("series must differ from the target")
    lags = set(path_lag_sums(spec, s, y, banned=frozenset()))
    for c in range(spec.n_series):
        if c in (s, y):
            continue
        to_s = path_lag_sums(spec, c, s, banned=frozenset({y}))
        if not to_s:
            continue
        to_y = path_lag_sums(spec, c, y, banned=frozenset({s}))
        lags.update(b - a for a in to_s for b in to_y)
    return lags


def has_single_lag_dependencies(spec: FullTimeGraphSpec) -> bool:
    """True when every observed candidate has at most one lag with the
    target (the regime where the selection conditions are necessary as
    well as sufficient)."""
    return all(
        len(series_target_lags(spec, spec.candidate_series(k))) <= 1
        for k in range(spec.n_obs)
    )


def _directly_affects_target(spec: FullTimeGraphSpec, u: int) -> bool:
    """Directed path u -> target with only hidden intermediates."""
    adj = _simple_children(spec)
    stack = [u]
    seen = {u}
    while stack:
        v = stack.pop()
        for w in adj[v]:
            if w == spec.target:
                return True
            if spec.is_hidden(w) and w not in seen:
                seen.add(w)
                stack.append(w)
    return False


def _touches_observed_collider(spec: FullTimeGraphSpec, u: int) -> bool:
    """Edge from u into a non-hidden node with at least two parents."""
    indeg = spec.parents_count()
    return any(
        not spec.is_hidden(e.dst) and indeg[e.dst] >= 2
        for e in spec.edges
        if e.src == u
    )


def _memoryless_required(spec: FullTimeGraphSpec, u: int) -> bool:
    return _directly_affects_target(spec, u) or _touches_observed_collider(spec, u)


# ---------------------------------------------------------------------------
# validation


def validate_spec(spec: FullTimeGraphSpec) -> list[str]:
    """Check the structural requirements; returns a list of violation
    messages (empty when the spec is admissible).

    Enforced: edges only forward in time with lag 1 (lag 2 only in
    multi-lag mode), acyclic summary graph, target is a sink, every
    observed series and the target keeps a unit-lag self-loop, no
    same-series links at lag > 1, hidden series that reach the target
    through hidden-only paths or feed an observed collider are
    memoryless with a single lag to the target, and weights lie in the
    sampling range unless a stability rescale was applied.
    """
    bad: list[str] = []
    n = spec.n_series
    if spec.self_loops.shape != (n,) or spec.noise_std.shape != (n,):
        return ["self_loops / noise_std length must equal the number of series"]
    if not np.all(np.isfinite(spec.noise_std)) or np.any(spec.noise_std < 0):
        bad.append("noise_std must be finite and non-negative")
    max_allowed_lag = 2 if spec.multi_lag_mode else 1
    for e in spec.edges:
        if not (0 <= e.src < n and 0 <= e.dst < n):
            bad.append(f"edge {e} out of range")
            continue
        if e.src == e.dst:
            bad.append(f"same-series cross edge {e} (memory only via self_loops)")
        if e.src == spec.target:
            bad.append("target must be a sink node")
        if not 1 <= e.lag <= max_allowed_lag:
            bad.append(f"edge lag {e.lag} not allowed (max {max_allowed_lag})")
        if e.weight <= 0:
            bad.append(f"edge weight must be positive, got {e.weight}")
        elif not spec.stabilized and not (WEIGHT_LO <= e.weight <= WEIGHT_HI):
            bad.append(f"edge weight {e.weight} outside [{WEIGHT_LO}, {WEIGHT_HI}]")
    # acyclicity of the summary graph (Kahn, on deduplicated edges)
    adj = _simple_children(spec)
    indeg = np.zeros(n, dtype=int)
    for v in range(n):
        for u in adj[v]:
            indeg[u] += 1
    queue = [v for v in range(n) if indeg[v] == 0]
    visited = 0
    while queue:
        v = queue.pop()
        visited += 1
        for u in adj[v]:
            indeg[u] -= 1
            if indeg[u] == 0:
                queue.append(u)
    if visited != n:
        bad.append("summary graph contains a directed cycle")
        return bad
    for s in range(n):
        loop = spec.self_loops[s]
        if spec.is_hidden(s):
            ok = loop == 0.0 or loop > 0
        else:
            ok = loop > 0
        if not ok:
            bad.append(f"series {spec.series_name(s)} needs a self-loop")
        if loop > 0 and not spec.stabilized and not (WEIGHT_LO <= loop <= WEIGHT_HI):
            bad.append(
                f"self-loop weight {loop} of {spec.series_name(s)} outside range"
            )
    for u in range(spec.n_hidden):
        if _memoryless_required(spec, u):
            if spec.self_loops[u] != 0.0:
                bad.append(
                    f"hidden {spec.series_name(u)} must be memoryless (it reaches "
                    "the target through hidden-only paths or feeds an observed "
                    "collider)"
                )
            if len(series_target_lags(spec, u)) > 1:
                bad.append(
                    f"hidden {spec.series_name(u)} must have a single lag to the "
                    "target"
                )
    return bad


def assert_valid(spec: FullTimeGraphSpec) -> None:
    bad = validate_spec(spec)
    if bad:
        raise ValueError("invalid graph spec: " + "; ".join(bad))


# ---------------------------------------------------------------------------
# stability


def transition_matrices(spec: FullTimeGraphSpec) -> tuple[np.ndarray, np.ndarray]:
    """(W1, W2) with W[dst, src] = weight; self-loops on W1's diagonal."""
    n = spec.n_series
    W1 = np.zeros((n, n))
    W2 = np.zeros((n, n))
    np.fill_diagonal(W1, spec.self_loops)
    for e in spec.edges:
        if e.lag == 1:
            W1[e.dst, e.src] += e.weight
        else:
            W2[e.dst, e.src] += e.weight
    return W1, W2


def spectral_radius(spec: FullTimeGraphSpec) -> float:
    W1, W2 = transition_matrices(spec)
    n = spec.n_series
    if not W2.any():
        companion = W1
    else:
        companion = np.zeros((2 * n, 2 * n))
        companion[:n, :n] = W1
        companion[:n, n:] = W2
        companion[n:, :n] = np.eye(n)
    return float(np.max(np.abs(np.linalg.eigvals(companion))))


def stabilize(spec: FullTimeGraphSpec) -> FullTimeGraphSpec:
    """Rescale all weights until the joint transition is comfortably
    stable. With an acyclic summary graph the radius already equals the
    largest self-loop, so this is a no-op in practice."""
    out = spec
    for _ in range(100):
        rho = spectral_radius(out)
        if rho < SPECTRAL_LIMIT:
            return out
        factor = SPECTRAL_TARGET / rho
        out = replace(
            out,
            edges=[Edge(e.src, e.dst, e.lag, e.weight * factor) for e in out.edges],
            self_loops=out.self_loops * factor,
            stabilized=True,
        )
    raise AssertionError("weight rescaling failed to stabilize the system")


# ---------------------------------------------------------------------------
# sampling


def sample_graph_spec(cfg: GraphConfig, seed) -> FullTimeGraphSpec:
    """Draw a random admissible specification.

    Cross edges appear independently with probability ``p_cross``
    between non-target series (respecting the fixed hidden-first
    order), edges into the target with ``p_target``; weights are
    uniform in [0.7, 0.95]. Hidden series draw a self-loop with
    probability ``p_hidden_memory`` and lose it again when the
    memoryless requirement applies. Specs violating the remaining
    requirements (or lacking an edge into the target, when
    ``ensure_target_edge``) are resampled.
    """
    rng = np.random.default_rng(seed)
    n = cfg.n_hidden + cfg.n_obs + 1
    target = n - 1
    for _ in range(_MAX_SAMPLE_ATTEMPTS):
        pairs: list[tuple[int, int, int]] = []
        lag_values = (1, 2) if cfg.multi_lag_mode else (1,)
        for lag in lag_values:
            for a in range(n - 1):
                for b in range(a + 1, n - 1):
                    if rng.random() < cfg.p_cross:
                        pairs.append((a, b, lag))
            for a in range(n - 1):
                if rng.random() < cfg.p_target:
                    pairs.append((a, target, lag))
        self_loops = np.zeros(n)
        for s in range(n):
            if s >= cfg.n_hidden:
                self_loops[s] = rng.uniform(WEIGHT_LO, WEIGHT_HI)
            elif rng.random() < cfg.p_hidden_memory:
                self_loops[s] = rng.uniform(WEIGHT_LO, WEIGHT_HI)
        weights = rng.uniform(WEIGHT_LO, WEIGHT_HI, size=len(pairs))
        spec = FullTimeGraphSpec(
            n_obs=cfg.n_obs,
            n_hidden=cfg.n_hidden,
            edges=[Edge(a, b, lag, float(w)) for (a, b, lag), w in zip(pairs, weights)],
            self_loops=self_loops,
            noise_std=np.full(n, np.sqrt(cfg.noise_pct)),
            multi_lag_mode=cfg.multi_lag_mode,
        )
        if cfg.ensure_target_edge and cfg.p_target > 0:
            if not any(e.dst == target for e in spec.edges):
                continue
        # memoryless requirement for hidden series
        direct_hidden = [
            u for u in range(cfg.n_hidden) if _memoryless_required(spec, u)
        ]
        for u in direct_hidden:
            spec.self_loops[u] = 0.0
        if cfg.multi_lag_mode:
            # keep hidden-to-target influence single-lag
            spec.edges = [
                e
                for e in spec.edges
                if not (e.lag == 2 and e.dst == target and e.src in direct_hidden)
            ]
        if any(len(series_target_lags(spec, u)) > 1 for u in direct_hidden):
            continue
        spec = stabilize(spec)
        assert_valid(spec)
        return spec
    raise RuntimeError("could not sample an admissible spec; loosen the config")


# ---------------------------------------------------------------------------
# simulation and labels


def simulate_raw(
    spec: FullTimeGraphSpec, T: int, seed, burn_in: int = DEFAULT_BURN_IN
) -> np.ndarray:
    """Raw (T, n_series) sample path, burn-in discarded, initial state
    zero."""
    if T < 1:
        raise ValueError("T must be positive")
    rho = spectral_radius(spec)
    assert rho < 1.0, f"unstable spec (spectral radius {rho:.3f})"
    rng = np.random.default_rng(seed)
    W1, W2 = transition_matrices(spec)
    n = spec.n_series
    use_lag2 = bool(W2.any())
    eps = rng.normal(size=(burn_in + T, n)) * spec.noise_std
    out = np.zeros((burn_in + T, n))
    prev = np.zeros(n)
    prev2 = np.zeros(n)
    for t in range(burn_in + T):
        x = W1 @ prev + eps[t]
        if use_lag2:
            x += W2 @ prev2
        out[t] = x
        prev2 = prev
        prev = x
    return out[burn_in:]


def simulate_panel(
    spec: FullTimeGraphSpec,
    T: int,
    seed,
    burn_in: int = DEFAULT_BURN_IN,
    standardize: bool = True,
) -> TimeSeriesPanel:
    """Observed panel: hidden series dropped, each remaining series
    standardized to zero mean / unit variance (decisions downstream are
    scale-invariant)."""
    if T < 50:
        raise ValueError("T must be >= 50 for a usable panel")
    raw = simulate_raw(spec, T, seed, burn_in)
    obs = raw[:, spec.n_hidden : spec.n_hidden + spec.n_obs].copy()
    target = raw[:, spec.target].copy()
    if standardize:
        for col in range(obs.shape[1]):
            obs[:, col] = _standardize(obs[:, col])
        target = _standardize(target)
    names = [spec.series_name(spec.candidate_series(k)) for k in range(spec.n_obs)]
    return TimeSeriesPanel(candidates=obs, target=target, names=names)


def _standardize(x: np.ndarray) -> np.ndarray:
    x = x - x.mean()
    sd = x.std()
    return x / sd if sd > 1e-15 else x


def ground_truth(spec: FullTimeGraphSpec) -> GroundTruth:
    """Labels from summary-graph reachability.

    direct: an edge into the target; indirect: a directed path of
    length >= 2; sg-unconfounded: no third series reaches both the
    candidate and (avoiding the candidate) the target.
    """
    adj = _simple_children(spec)
    y = spec.target
    n = spec.n_series
    reach = [_reachable_from(adj, v) for v in range(n)]
    d = spec.n_obs
    is_direct = np.zeros(d, dtype=bool)
    is_indirect = np.zeros(d, dtype=bool)
    is_unconf = np.ones(d, dtype=bool)
    for k in range(d):
        s = spec.candidate_series(k)
        is_direct[k] = y in adj[s]
        is_indirect[k] = any(m != y and y in reach[m] for m in adj[s])
        for z in range(n):
            if z == s or z == y:
                continue
            if s in reach[z] and y in _reachable_from(adj, z, skip=s):
                is_unconf[k] = False
                break
    return GroundTruth(
        is_direct=is_direct,
        is_indirect=is_indirect,
        is_sg_unconfounded=is_unconf,
        is_cause=is_direct | is_indirect,
    )
