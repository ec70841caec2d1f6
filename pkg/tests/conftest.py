import numpy as np
import pytest

from sypi.simulate import Edge, FullTimeGraphSpec


def build_spec(
    n_obs,
    n_hidden,
    edges,
    self_loops=None,
    hidden_memory=(),
    noise_std=0.45,
    multi_lag_mode=False,
):
    """Hand-built spec; edges are (src, dst, weight) at lag 1 or
    (src, dst, lag, weight). Series order: hidden, observed, target.
    Observed series and the target get self-loops of 0.8 unless
    overridden; hidden series listed in ``hidden_memory`` get one too.
    """
    n = n_hidden + n_obs + 1
    if self_loops is None:
        self_loops = np.zeros(n)
        self_loops[n_hidden:] = 0.8
        for u in hidden_memory:
            self_loops[u] = 0.8
    edge_objs = []
    for e in edges:
        if len(e) == 3:
            src, dst, w = e
            lag = 1
        else:
            src, dst, lag, w = e
        edge_objs.append(Edge(src, dst, lag, float(w)))
    return FullTimeGraphSpec(
        n_obs=n_obs,
        n_hidden=n_hidden,
        edges=edge_objs,
        self_loops=np.asarray(self_loops, dtype=float),
        noise_std=np.full(n, noise_std),
        multi_lag_mode=multi_lag_mode,
    )


@pytest.fixture
def two_path_spec():
    """One hidden mediator: X1 -> U -> Y (so X1 reaches the target at
    lag 2) and X2 -> Y directly (lag 1). U is memoryless as required
    for hidden series feeding the target."""
    # series: U=0, X1=1, X2=2, Y=3
    return build_spec(
        n_obs=2,
        n_hidden=1,
        edges=[(1, 0, 0.9), (0, 3, 0.9), (2, 3, 0.85)],
    )


@pytest.fixture
def confounded_pair_spec():
    """Memoryless hidden common cause: U -> X1 and U -> Y, no directed
    path from X1 to the target."""
    # series: U=0, X1=1, Y=2
    return build_spec(n_obs=1, n_hidden=1, edges=[(0, 1, 0.9), (0, 2, 0.9)])


@pytest.fixture
def memoryful_confounder_spec():
    """Hidden confounder with memory: U -> X1, U -> X2 -> Y. U keeps
    its self-loop (it reaches the target only through an observed
    series, so memory is allowed)."""
    # series: U=0, X1=1, X2=2, Y=3
    return build_spec(
        n_obs=2,
        n_hidden=1,
        edges=[(0, 1, 0.9), (0, 2, 0.9), (2, 3, 0.85)],
        hidden_memory=(0,),
    )


@pytest.fixture
def direct_cause_spec():
    """Single observed direct cause, nothing else."""
    # series: X1=0, Y=1
    return build_spec(n_obs=1, n_hidden=0, edges=[(0, 1, 0.85)])
