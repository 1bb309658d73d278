"""Shared fixtures: tiny graphs, synthetic generators, brute-force oracles."""

from itertools import combinations
from pathlib import Path

import numpy as np
import pytest

import doppelgraph as dg

DATA_DIR = Path(__file__).resolve().parent.parent / "data"

DATASETS = {
    "cora_ml": {"edges": DATA_DIR / "cora_ml.edges", "nodes": 2810, "lcc_edges": 6783},
    "citeseer": {"edges": DATA_DIR / "citeseer.edges", "nodes": 2120, "lcc_edges": 3679},
    "gene": {"edges": DATA_DIR / "gene.edges", "nodes": 814, "lcc_edges": 1436},
}


def dataset_graph(name: str) -> dg.Graph:
    """Load a real dataset's largest component or skip the calling test."""
    path = DATASETS[name]["edges"]
    if not path.exists():
        pytest.skip(f"dataset file {path} not present; see README data section")
    return dg.largest_connected_component(dg.read_edge_list(path))


@pytest.fixture
def triangle():
    return dg.Graph.from_edges(3, [(0, 1), (1, 2), (0, 2)])


@pytest.fixture
def path3():
    return dg.Graph.from_edges(3, [(0, 1), (1, 2)])


@pytest.fixture
def star4():
    return dg.Graph.from_edges(4, [(0, 1), (0, 2), (0, 3)])


@pytest.fixture
def k4():
    return complete_graph(4)


@pytest.fixture
def c4():
    return dg.Graph.from_edges(4, [(0, 1), (1, 2), (2, 3), (0, 3)])


def complete_graph(n: int) -> dg.Graph:
    return dg.Graph.from_edges(n, list(combinations(range(n), 2)))


def planted_partition(sizes, p_in, p_out, seed) -> tuple[dg.Graph, np.ndarray]:
    rng = np.random.default_rng(seed)
    n = int(sum(sizes))
    block = np.repeat(np.arange(len(sizes)), sizes)
    u, v = np.triu_indices(n, k=1)
    p = np.where(block[u] == block[v], p_in, p_out)
    mask = rng.random(len(u)) < p
    return dg.Graph.from_edges(n, np.column_stack([u[mask], v[mask]])), block


def random_graph(n: int, p: float, seed: int) -> dg.Graph:
    return dg.er_graph(n, p, seed)


def random_symmetric_oracle(n: int, seed: int) -> dg.MatrixOracle:
    m = np.random.default_rng(seed).random((n, n))
    m = (m + m.T) / 2.0
    np.fill_diagonal(m, 0.0)
    return dg.MatrixOracle(m)


# ---------------------------------------------------------------------------
# independent brute-force oracles (deliberately naive)


def brute_triangles(g: dg.Graph) -> int:
    edges = g.edge_set()
    count = 0
    for a, b, c in combinations(range(g.node_count), 3):
        if (a, b) in edges and (b, c) in edges and (a, c) in edges:
            count += 1
    return count


def brute_squares(g: dg.Graph) -> int:
    """4-cliques by enumerating 4-node subsets."""
    edges = g.edge_set()
    count = 0
    for quad in combinations(range(g.node_count), 4):
        if all(pair in edges for pair in combinations(quad, 2)):
            count += 1
    return count


def brute_wedges(g: dg.Graph) -> int:
    edges = g.edge_set()
    count = 0
    for a, b, c in combinations(range(g.node_count), 3):
        present = ((a, b) in edges) + ((b, c) in edges) + ((a, c) in edges)
        if present == 2:
            count += 1
        elif present == 3:
            count += 3
    return count


def brute_is_graphic(degrees) -> bool:
    """Exhaustive search over all simple graphs on len(degrees) nodes."""
    degrees = sorted(degrees, reverse=True)
    n = len(degrees)
    if any(d < 0 for d in degrees):
        return False
    pairs = list(combinations(range(n), 2))
    if sum(degrees) % 2:
        return False
    for mask in range(1 << len(pairs)):
        deg = [0] * n
        bits = mask
        idx = 0
        while bits:
            if bits & 1:
                a, b = pairs[idx]
                deg[a] += 1
                deg[b] += 1
            bits >>= 1
            idx += 1
        if sorted(deg, reverse=True) == degrees:
            return True
    return False


def brute_square_clustering(g: dg.Graph) -> np.ndarray:
    """Direct per-node evaluation of the square-clustering definition."""
    out = np.zeros(g.node_count)
    nb = {v: set(int(x) for x in g.neighbors(v)) for v in range(g.node_count)}
    for v in range(g.node_count):
        closed = 0
        potential = 0
        for u, w in combinations(sorted(nb[v]), 2):
            q = len((nb[u] & nb[w]) - {v})
            degm = q + 1 + (1 if w in nb[u] else 0)
            closed += q
            potential += q + (len(nb[u]) - degm) + (len(nb[w]) - degm)
        if potential > 0:
            out[v] = closed / potential
    return out
