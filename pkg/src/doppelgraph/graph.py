"""Immutable undirected simple graphs and degree-sequence utilities.

The :class:`Graph` type is the currency passed between every other module:
ingestion, statistics, realization, baselines and the pipeline all consume
and produce it.  Node ids are always the contiguous range ``0..n-1``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import IO, Iterable, Iterator, Optional, Sequence, Union

import numpy as np
import scipy.sparse as sp


class EdgeListParseError(ValueError):
    """Raised when an edge-list line cannot be parsed; carries the line number."""

    def __init__(self, line_number: int, line: str, reason: str):
        self.line_number = line_number
        self.line = line
        super().__init__(f"line {line_number}: {reason}: {line!r}")


class ContractViolation(ValueError):
    """Raised when an operation's input contract is violated."""


@dataclass(frozen=True)
class Graph:
    """Undirected simple graph stored as a compressed neighbor table.

    ``indptr``/``indices`` follow the CSR convention: the neighbors of node
    ``i`` are ``indices[indptr[i]:indptr[i+1]]``, sorted strictly
    increasing.  Instances are immutable; the backing arrays are marked
    read-only so they can be shared freely across threads.
    """

    node_count: int
    indptr: np.ndarray
    indices: np.ndarray
    edge_count: int = field(default=0)

    def __post_init__(self):
        indptr = np.ascontiguousarray(self.indptr, dtype=np.int64)
        indices = np.ascontiguousarray(self.indices, dtype=np.int64)
        indptr.setflags(write=False)
        indices.setflags(write=False)
        object.__setattr__(self, "indptr", indptr)
        object.__setattr__(self, "indices", indices)
        object.__setattr__(self, "edge_count", int(len(indices) // 2))

    @staticmethod
    def from_edges(node_count: int, edges: Iterable[tuple[int, int]]) -> "Graph":
        """Build a graph from an iterable of (u, v) pairs.

        Duplicate pairs, reversed duplicates and self-loops are coalesced or
        dropped so the result always satisfies the simple-graph invariants.
        """
        arr = np.asarray(list(edges), dtype=np.int64)
        if arr.size == 0:
            return Graph(node_count, np.zeros(node_count + 1, dtype=np.int64),
                         np.zeros(0, dtype=np.int64))
        if arr.min() < 0 or arr.max() >= node_count:
            raise ContractViolation("edge endpoint outside 0..node_count-1")
        u = np.minimum(arr[:, 0], arr[:, 1])
        v = np.maximum(arr[:, 0], arr[:, 1])
        keep = u != v
        u, v = u[keep], v[keep]
        key = u * node_count + v
        key = np.unique(key)
        u, v = key // node_count, key % node_count
        src = np.concatenate([u, v])
        dst = np.concatenate([v, u])
        order = np.lexsort((dst, src))
        src, dst = src[order], dst[order]
        indptr = np.zeros(node_count + 1, dtype=np.int64)
        np.add.at(indptr, src + 1, 1)
        np.cumsum(indptr, out=indptr)
        return Graph(node_count, indptr, dst)

    def neighbors(self, i: int) -> np.ndarray:
        """Sorted neighbor ids of node ``i`` (read-only view)."""
        return self.indices[self.indptr[i]:self.indptr[i + 1]]

    def degrees(self) -> np.ndarray:
        return np.diff(self.indptr)

    def has_edge(self, u: int, v: int) -> bool:
        nb = self.neighbors(u)
        j = np.searchsorted(nb, v)
        return j < len(nb) and nb[j] == v

    def edges(self) -> np.ndarray:
        """All edges as an (m, 2) array with u < v, sorted lexicographically."""
        src = np.repeat(np.arange(self.node_count), self.degrees())
        mask = src < self.indices
        return np.column_stack([src[mask], self.indices[mask]])

    def edge_set(self) -> set[tuple[int, int]]:
        return {(int(u), int(v)) for u, v in self.edges()}

    def adjacency(self) -> sp.csr_matrix:
        """Adjacency matrix as scipy CSR with unit weights."""
        data = np.ones(len(self.indices), dtype=np.float64)
        return sp.csr_matrix((data, self.indices.copy(), self.indptr.copy()),
                             shape=(self.node_count, self.node_count))

    def __eq__(self, other) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return (self.node_count == other.node_count
                and np.array_equal(self.indptr, other.indptr)
                and np.array_equal(self.indices, other.indices))

    def __repr__(self) -> str:
        return f"Graph(n={self.node_count}, m={self.edge_count})"


@dataclass(frozen=True)
class DegreeSequence:
    """Nonincreasing integer degree sequence.

    ``node_order`` optionally records which source node holds each rank
    (ties broken by smallest node id); it is what lets a rank-matched
    correspondence point back at original node ids.
    """

    degrees: np.ndarray
    node_order: Optional[np.ndarray] = None

    def __post_init__(self):
        d = np.ascontiguousarray(self.degrees, dtype=np.int64)
        if d.size and (np.any(d < 0) or np.any(np.diff(d) > 0)):
            raise ContractViolation("degrees must be nonnegative and nonincreasing")
        d.setflags(write=False)
        object.__setattr__(self, "degrees", d)
        if self.node_order is not None:
            order = np.ascontiguousarray(self.node_order, dtype=np.int64)
            order.setflags(write=False)
            object.__setattr__(self, "node_order", order)

    def __len__(self) -> int:
        return len(self.degrees)

    def __iter__(self) -> Iterator[int]:
        return iter(self.degrees.tolist())

    @staticmethod
    def from_values(values: Sequence[int]) -> "DegreeSequence":
        """Sort arbitrary nonnegative integers into a valid sequence."""
        v = np.sort(np.asarray(list(values), dtype=np.int64))[::-1]
        return DegreeSequence(v.copy())


# A node correspondence is an int array c with c[new_node] = original_node.
NodeCorrespondence = np.ndarray


def identity_correspondence(n: int) -> NodeCorrespondence:
    return np.arange(n, dtype=np.int64)


def from_edge_list(lines: Union[IO[str], Iterable[str]]) -> Graph:
    """Parse whitespace-separated ``u v`` lines into a graph.

    Lines starting with ``#`` and blank lines are ignored, except that a
    leading ``# nodes N`` comment (written by :func:`to_edge_list`) declares
    the node count and makes ids literal, so canonical files round-trip
    exactly, isolated nodes included.  Without it, node ids are compacted to
    ``0..n-1`` in ascending numeric order.  Duplicate edges and self-loops
    are dropped; a single warning reports the tally.

    Raises
    ------
    EdgeListParseError
        If a non-comment line does not hold two nonnegative integers, or an
        id exceeds a declared node count.
    """
    declared: Optional[int] = None
    raw_edges: list[tuple[int, int]] = []
    ids: set[int] = set()
    for lineno, line in enumerate(lines, start=1):
        text = line.strip()
        if not text:
            continue
        if text.startswith("#"):
            fields = text[1:].split()
            if declared is None and not raw_edges \
                    and len(fields) == 2 and fields[0] == "nodes" \
                    and fields[1].isdigit():
                declared = int(fields[1])
            continue
        parts = text.split()
        if len(parts) != 2:
            raise EdgeListParseError(lineno, text, "expected two fields")
        try:
            a, b = int(parts[0]), int(parts[1])
        except ValueError:
            raise EdgeListParseError(lineno, text, "non-integer token") from None
        if a < 0 or b < 0:
            raise EdgeListParseError(lineno, text, "negative node id")
        if declared is not None and (a >= declared or b >= declared):
            raise EdgeListParseError(lineno, text,
                                     f"node id exceeds declared count {declared}")
        ids.add(a)
        ids.add(b)
        raw_edges.append((a, b))

    if declared is None:
        id_map = {raw: new for new, raw in enumerate(sorted(ids))}
        n = len(id_map)
    else:
        id_map = {raw: raw for raw in ids}
        n = declared

    seen: set[tuple[int, int]] = set()
    edges: list[tuple[int, int]] = []
    dropped = 0
    for a, b in raw_edges:
        a, b = id_map[a], id_map[b]
        if a == b:
            dropped += 1
            continue
        key = (a, b) if a < b else (b, a)
        if key in seen:
            dropped += 1
            continue
        seen.add(key)
        edges.append(key)
    if dropped:
        warnings.warn(f"dropped {dropped} duplicate/self-loop record(s) from edge list",
                      stacklevel=2)
    return Graph.from_edges(n, edges)


def read_edge_list(path) -> Graph:
    with open(path, "r", encoding="utf-8") as fh:
        return from_edge_list(fh)


def to_edge_list(g: Graph) -> str:
    """Canonical text form: ``# nodes N`` header, then one ``u v`` per line
    with u < v in lexicographic order."""
    body = "".join(f"{u} {v}\n" for u, v in g.edges())
    return f"# nodes {g.node_count}\n{body}"


def write_edge_list(g: Graph, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(to_edge_list(g))


def connected_components(g: Graph) -> tuple[int, np.ndarray]:
    """Component count and per-node component labels (BFS order)."""
    if g.node_count == 0:
        return 0, np.zeros(0, dtype=np.int64)
    n_comp, labels = sp.csgraph.connected_components(
        g.adjacency(), directed=False, return_labels=True)
    return int(n_comp), labels.astype(np.int64)


def induced_subgraph(g: Graph, nodes: np.ndarray) -> tuple[Graph, np.ndarray]:
    """Subgraph induced by ``nodes`` with ids recompacted in ascending order.

    Returns the subgraph and the array mapping new ids to the original ones.
    """
    nodes = np.sort(np.asarray(nodes, dtype=np.int64))
    lookup = -np.ones(g.node_count, dtype=np.int64)
    lookup[nodes] = np.arange(len(nodes))
    edges = g.edges()
    if len(edges):
        keep = (lookup[edges[:, 0]] >= 0) & (lookup[edges[:, 1]] >= 0)
        edges = lookup[edges[keep]]
    return Graph.from_edges(len(nodes), edges), nodes


def largest_connected_component(g: Graph) -> Graph:
    """Induced subgraph on the largest component, ids recompacted.

    Ties between equally large components go to the one containing the
    smallest original node id, which makes the choice reproducible.
    """
    if g.node_count == 0:
        return g
    _, labels = connected_components(g)
    sizes = np.bincount(labels)
    best = np.flatnonzero(sizes == sizes.max())
    if len(best) > 1:
        # smallest minimum original id wins
        first_node = np.full(len(sizes), g.node_count, dtype=np.int64)
        np.minimum.at(first_node, labels, np.arange(g.node_count))
        best = best[np.argmin(first_node[best])]
    else:
        best = best[0]
    sub, _ = induced_subgraph(g, np.flatnonzero(labels == best))
    return sub


def degree_sequence(g: Graph) -> DegreeSequence:
    """Degrees sorted nonincreasing, remembering which node holds each rank."""
    deg = g.degrees()
    order = np.lexsort((np.arange(g.node_count), -deg))
    return DegreeSequence(deg[order], node_order=order)


def is_graphic(s: Union[DegreeSequence, Sequence[int]]) -> bool:
    """Erdős–Gallai test: can some simple graph realize this degree sequence?

    Deliberately independent of the greedy realization algorithm so the two
    can be cross-checked against each other.
    """
    if isinstance(s, DegreeSequence):
        d = s.degrees
    else:
        d = np.sort(np.asarray(list(s), dtype=np.int64))[::-1]
    n = len(d)
    if n == 0:
        return True
    if d.min() < 0 or d.max() >= max(n, 1):
        return False
    total = int(d.sum())
    if total % 2 != 0:
        return False
    prefix = np.cumsum(d)
    for k in range(1, n + 1):
        tail = d[k:]
        slack = k * (k - 1) + int(np.minimum(tail, k).sum())
        if prefix[k - 1] > slack:
            return False
    return True


def edge_overlap(g: Graph, g0: Graph, corr: NodeCorrespondence) -> float:
    """Fraction of g0's edges hit by g's edges mapped through ``corr``.

    ``corr[u]`` names the g0 node that g's node ``u`` stands for; it must be
    a bijection over equal node counts.
    """
    if g.node_count != g0.node_count:
        raise ContractViolation(
            f"node counts differ: {g.node_count} vs {g0.node_count}")
    corr = np.asarray(corr, dtype=np.int64)
    if len(corr) != g.node_count or len(np.unique(corr)) != g.node_count:
        raise ContractViolation("correspondence is not a bijection")
    if g0.edge_count == 0:
        raise ContractViolation("reference graph has no edges")
    edges = g.edges()
    if len(edges) == 0:
        return 0.0
    mu = corr[edges[:, 0]]
    mv = corr[edges[:, 1]]
    lo = np.minimum(mu, mv)
    hi = np.maximum(mu, mv)
    mapped = lo * g0.node_count + hi
    e0 = g0.edges()
    ref = e0[:, 0] * g0.node_count + e0[:, 1]
    hits = np.isin(mapped, ref).sum()
    return float(hits) / g0.edge_count
