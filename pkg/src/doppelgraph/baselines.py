"""Classical random-graph generators used for comparison runs.

All generators are pure functions of their parameters and a 64-bit seed;
repeat trials should derive per-trial seeds with
:func:`doppelgraph._util.derive_seed` rather than reusing one generator
stream.
"""

from __future__ import annotations

from typing import Sequence, Union

import numpy as np

from .graph import DegreeSequence, Graph


class RewiringFailure(RuntimeError):
    """Degree-preserving rewiring did not produce a simple graph in budget."""


def _degree_values(s: Union[DegreeSequence, Sequence[int], np.ndarray]) -> np.ndarray:
    if isinstance(s, DegreeSequence):
        return np.array(s.degrees, dtype=np.int64)
    return np.asarray(list(s) if not isinstance(s, np.ndarray) else s, dtype=np.int64)


def er_graph(n: int, p: float, seed: int) -> Graph:
    """Independent-edge random graph: each of the C(n,2) pairs with probability p."""
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must lie in [0, 1]")
    rng = np.random.default_rng(seed)
    if n < 2 or p == 0.0:
        return Graph.from_edges(n, [])
    u, v = np.triu_indices(n, k=1)
    mask = rng.random(len(u)) < p
    return Graph.from_edges(n, np.column_stack([u[mask], v[mask]]))


def ba_graph(n: int, m: int, seed: int) -> Graph:
    """Preferential attachment with m edges per arriving node.

    Starts from m isolated seed nodes; the first arrival connects to all of
    them, and every later arrival picks m distinct targets from the urn of
    edge endpoints (attachment probability proportional to degree).  The
    result always has exactly m·(n−m) edges.
    """
    if not 1 <= m < n:
        raise ValueError("need 1 <= m < n")
    rng = np.random.default_rng(seed)
    edges: list[tuple[int, int]] = []
    repeated: list[int] = []
    targets = list(range(m))
    for source in range(m, n):
        edges.extend((source, t) for t in targets)
        repeated.extend(targets)
        repeated.extend([source] * m)
        chosen: set[int] = set()
        while len(chosen) < m:
            chosen.add(repeated[rng.integers(len(repeated))])
        targets = sorted(chosen)
    return Graph.from_edges(n, edges)


def chung_lu(s: Union[DegreeSequence, Sequence[int], np.ndarray], seed: int) -> Graph:
    """Independent edges with probability min(d_i·d_j / Σd, 1).

    Expected degrees match the input sequence when no probability needs
    clipping (max_i max_j d_i d_j <= Σd).
    """
    d = _degree_values(s).astype(np.float64)
    n = len(d)
    total = d.sum()
    rng = np.random.default_rng(seed)
    if n < 2 or total == 0:
        return Graph.from_edges(n, [])
    u, v = np.triu_indices(n, k=1)
    probs = np.minimum(d[u] * d[v] / total, 1.0)
    mask = rng.random(len(u)) < probs
    return Graph.from_edges(n, np.column_stack([u[mask], v[mask]]))


def conf_model(g0: Graph, target_overlap: float, max_retries: int = 10000,
               seed: int = 0) -> Graph:
    """Keep a random share of the original edges, rewire the rest by stubs.

    A uniform random ``ceil(target_overlap·|E|)`` subset of edges is kept;
    the remaining degree stubs are paired uniformly at random.  A pairing
    that would create a self-loop, a duplicate, or collide with a kept edge
    is rejected and redrawn whole.  On success every node keeps its exact
    original degree.

    Raises
    ------
    RewiringFailure
        After ``max_retries`` rejected pairings (more likely the smaller the
        requested overlap).
    """
    if not 0.0 <= target_overlap <= 1.0:
        raise ValueError("target_overlap must lie in [0, 1]")
    rng = np.random.default_rng(seed)
    edges = g0.edges()
    m = len(edges)
    if m == 0:
        return g0
    keep_count = int(np.ceil(target_overlap * m))
    keep_idx = rng.choice(m, size=keep_count, replace=False) if keep_count else np.zeros(0, int)
    kept = edges[np.sort(keep_idx)]
    kept_set = {(int(a), int(b)) for a, b in kept}

    deficit = g0.degrees().copy()
    for a, b in kept:
        deficit[a] -= 1
        deficit[b] -= 1
    stubs = np.repeat(np.arange(g0.node_count), deficit)
    if len(stubs) == 0:
        return Graph.from_edges(g0.node_count, kept)

    for _ in range(max_retries):
        perm = rng.permutation(len(stubs))
        a = stubs[perm[0::2]]
        b = stubs[perm[1::2]]
        lo, hi = np.minimum(a, b), np.maximum(a, b)
        if np.any(lo == hi):
            continue
        pairs = {(int(x), int(y)) for x, y in zip(lo, hi)}
        if len(pairs) < len(lo) or pairs & kept_set:
            continue
        return Graph.from_edges(g0.node_count, np.concatenate(
            [kept, np.column_stack([lo, hi])]))
    raise RewiringFailure(
        f"no simple rewiring found in {max_retries} attempts "
        f"(overlap {target_overlap:.3f}); try a larger overlap or budget")
