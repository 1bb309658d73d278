"""Degree-sequence graph realization.

Two greedy realizers share the same skeleton: repeatedly pick the node with
the largest remaining degree and attach neighbors to it.  The classic
variant attaches in order of remaining degree and succeeds exactly on
graphic sequences; the probability-guided variant attaches in order of a
link-probability oracle, skipping hubs that run out of eligible partners
(leaving a reported stub deficit) instead of failing.

Tie-breaking is fixed so both algorithms are deterministic: hubs break ties
by lowest node index; neighbor candidates order by (probability desc,
remaining degree desc, index asc).  Under a constant oracle the guided
variant therefore reproduces the classic one exactly.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from typing import Optional, Protocol, Sequence, Union

import numpy as np

from .graph import ContractViolation, DegreeSequence, Graph, is_graphic

DegreesLike = Union[DegreeSequence, Sequence[int], np.ndarray]


class NonGraphicSequenceError(ValueError):
    """Raised when a degree sequence cannot be realized as a simple graph."""

    def __init__(self, message: str, stuck_node: Optional[int] = None):
        super().__init__(message)
        self.stuck_node = stuck_node


class LinkProbabilityOracle(Protocol):
    """Symmetric, deterministic map from node pairs to [0, 1]."""

    def prob(self, i: int, j: int) -> float: ...

    def prob_row(self, k: int, candidates: np.ndarray) -> np.ndarray: ...


@dataclass(frozen=True)
class ConstantOracle:
    """Assigns every pair the same probability; useful as a neutral guide."""

    value: float = 0.5

    def prob(self, i: int, j: int) -> float:
        return self.value

    def prob_row(self, k: int, candidates: np.ndarray) -> np.ndarray:
        return np.full(len(candidates), self.value)


class MatrixOracle:
    """Oracle backed by a precomputed symmetric probability matrix."""

    def __init__(self, matrix: np.ndarray):
        matrix = np.asarray(matrix, dtype=np.float64)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
            raise ContractViolation("probability matrix must be square")
        if not np.allclose(matrix, matrix.T, atol=1e-12):
            raise ContractViolation("probability matrix must be symmetric")
        self.matrix = matrix

    def prob(self, i: int, j: int) -> float:
        return float(self.matrix[i, j])

    def prob_row(self, k: int, candidates: np.ndarray) -> np.ndarray:
        return self.matrix[k, candidates]


@dataclass(frozen=True)
class TraceStep:
    hub: int
    attached: tuple[int, ...]
    remaining_hash: str


@dataclass
class RealizationTrace:
    """Per-iteration record of hub choices; replaying it rebuilds the graph."""

    node_count: int
    steps: list[TraceStep]

    def to_text(self) -> str:
        lines = [f"# nodes {self.node_count}"]
        for s in self.steps:
            attached = " ".join(str(t) for t in s.attached)
            lines.append(f"{s.hub}\t{attached}\t{s.remaining_hash}")
        return "\n".join(lines) + "\n"

    def replay(self) -> Graph:
        edges = [(s.hub, t) for s in self.steps for t in s.attached]
        return Graph.from_edges(self.node_count, edges)


@dataclass
class RealizationResult:
    """Realized graph plus bookkeeping about how realization went."""

    graph: Graph
    target_degrees: np.ndarray
    stub_deficit: int
    skipped_hubs: tuple[int, ...]
    trace: Optional[RealizationTrace] = None


def _as_degree_array(s: DegreesLike) -> np.ndarray:
    if isinstance(s, DegreeSequence):
        return np.array(s.degrees, dtype=np.int64)
    d = np.asarray(list(s) if not isinstance(s, np.ndarray) else s, dtype=np.int64)
    if d.ndim != 1:
        raise ContractViolation("degree input must be one-dimensional")
    if d.size and d.min() < 0:
        raise ContractViolation("degrees must be nonnegative")
    return d.copy()


def _remaining_hash(rd: np.ndarray) -> str:
    return hashlib.sha1(np.ascontiguousarray(rd).tobytes()).hexdigest()[:12]


def havel_hakimi(s: DegreesLike, *, trace: bool = False) -> RealizationResult:
    """Greedy realization by remaining degree.

    Accepts a :class:`DegreeSequence` or a raw per-node degree array (which
    need not be sorted; node identities are then kept as given).  Succeeds
    exactly when the sequence is graphic.

    Raises
    ------
    NonGraphicSequenceError
        When some hub cannot be supplied enough positive-remaining-degree
        partners; ``stuck_node`` names that hub.
    """
    d = _as_degree_array(s)
    n = len(d)
    rd = d.copy()
    adjacent = np.zeros((n, n), dtype=bool)
    edges: list[tuple[int, int]] = []
    steps: list[TraceStep] = []
    ids = np.arange(n)

    while True:
        if rd.size == 0 or rd.max() == 0:
            break
        k = int(np.lexsort((ids, -rd))[0])
        need = int(rd[k])
        eligible = (~adjacent[k]) & (rd > 0)
        eligible[k] = False
        cand = np.flatnonzero(eligible)
        if len(cand) < need:
            raise NonGraphicSequenceError(
                f"sequence is not graphic: node {k} needs {need} partners, "
                f"{len(cand)} available", stuck_node=k)
        order = cand[np.lexsort((cand, -rd[cand]))]
        chosen = order[:need]
        for t in chosen:
            edges.append((k, int(t)))
            adjacent[k, t] = adjacent[t, k] = True
            rd[t] -= 1
        rd[k] = 0
        if trace:
            steps.append(TraceStep(k, tuple(int(t) for t in chosen),
                                   _remaining_hash(rd)))

    graph = Graph.from_edges(n, edges)
    return RealizationResult(graph=graph, target_degrees=d, stub_deficit=0,
                             skipped_hubs=(),
                             trace=RealizationTrace(n, steps) if trace else None)


def improved_hh(s: DegreesLike, oracle: LinkProbabilityOracle, *,
                trace: bool = False) -> RealizationResult:
    """Probability-guided realization.

    Hub selection matches :func:`havel_hakimi`; each hub then attaches to
    the not-yet-adjacent, positive-remaining-degree node with the highest
    oracle probability, repeatedly, until its degree is met.  A hub that
    runs out of eligible partners is skipped permanently (eligibility only
    shrinks over time) and its unmet stubs are reported as the deficit.

    The input must be graphic; sortedness is not required, so per-node
    target degrees aligned with an embedding row order work directly.
    """
    d = _as_degree_array(s)
    if not is_graphic(np.sort(d)[::-1]):
        raise NonGraphicSequenceError("input degree sequence is not graphic")
    n = len(d)
    rd = d.copy()
    adjacent = np.zeros((n, n), dtype=bool)
    stuck = np.zeros(n, dtype=bool)
    edges: list[tuple[int, int]] = []
    steps: list[TraceStep] = []
    skipped: list[int] = []
    ids = np.arange(n)

    while True:
        active = (rd > 0) & ~stuck
        if not active.any():
            break
        act = np.flatnonzero(active)
        k = int(act[np.lexsort((act, -rd[act]))[0]])
        eligible = (~adjacent[k]) & (rd > 0)
        eligible[k] = False
        cand = np.flatnonzero(eligible)
        if len(cand) == 0:
            stuck[k] = True
            skipped.append(k)
            continue
        p = np.asarray(oracle.prob_row(k, cand), dtype=np.float64)
        order = cand[np.lexsort((cand, -rd[cand], -p))]
        chosen = order[:int(rd[k])]
        for t in chosen:
            edges.append((k, int(t)))
            adjacent[k, t] = adjacent[t, k] = True
            rd[t] -= 1
            rd[k] -= 1
        if rd[k] > 0:
            stuck[k] = True
            skipped.append(k)
        if trace:
            steps.append(TraceStep(k, tuple(int(t) for t in chosen),
                                   _remaining_hash(rd)))

    graph = Graph.from_edges(n, edges)
    return RealizationResult(graph=graph, target_degrees=d,
                             stub_deficit=int(rd.sum()),
                             skipped_hubs=tuple(skipped),
                             trace=RealizationTrace(n, steps) if trace else None)


def initial_graph_from_predictor(embeddings: np.ndarray, predictor,
                                 target_edges: int) -> Graph:
    """Graph on the embedding rows keeping the top-scoring node pairs.

    Scores every pair with ``predictor.pair_probability`` and keeps the
    ``target_edges`` most probable as edges; score ties resolve in
    lexicographic pair order.  Fixing the edge budget to the original
    graph's edge count keeps the subsequent degree-rank labeling meaningful.
    """
    emb = np.asarray(embeddings, dtype=np.float64)
    n = len(emb)
    total_pairs = n * (n - 1) // 2
    if target_edges > total_pairs:
        raise ContractViolation(
            f"target_edges {target_edges} exceeds available pairs {total_pairs}")
    if target_edges == 0 or n < 2:
        return Graph.from_edges(n, [])

    us = np.empty(total_pairs, dtype=np.int64)
    vs = np.empty(total_pairs, dtype=np.int64)
    scores = np.empty(total_pairs, dtype=np.float64)
    pos = 0
    for u in range(n - 1):
        count = n - 1 - u
        us[pos:pos + count] = u
        vs[pos:pos + count] = np.arange(u + 1, n)
        scores[pos:pos + count] = predictor.pair_probability(
            np.broadcast_to(emb[u], (count, emb.shape[1])), emb[u + 1:])
        pos += count
    order = np.lexsort((vs, us, -scores))[:target_edges]
    return Graph.from_edges(n, np.column_stack([us[order], vs[order]]))


def assign_degree_sequence(initial: Graph, s: DegreeSequence
                           ) -> tuple[np.ndarray, np.ndarray]:
    """Transfer a degree sequence onto a fresh node set by degree rank.

    Nodes of ``initial`` are ranked by (degree desc, id asc); the rank-i
    node receives target degree ``s[i]`` and corresponds to the source node
    holding rank i in ``s`` (rank index itself when ``s`` carries no source
    order).  Returns (per-node target degrees, correspondence).
    """
    if initial.node_count != len(s):
        raise ContractViolation(
            f"node count {initial.node_count} != sequence length {len(s)}")
    n = initial.node_count
    deg = initial.degrees()
    order = np.lexsort((np.arange(n), -deg))
    targets = np.empty(n, dtype=np.int64)
    targets[order] = s.degrees
    corr = np.empty(n, dtype=np.int64)
    source = s.node_order if s.node_order is not None else np.arange(n)
    corr[order] = source
    return targets, corr
