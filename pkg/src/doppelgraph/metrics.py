"""Graph property statistics, distribution distances and property reports.

Nine global scalar properties plus three per-node distributions; the
distributions are compared between two graphs through a kernel two-sample
distance (MMD).  A :class:`PropertyReport` bundles everything for one graph,
optionally against a reference graph.

Definition notes (all load-bearing, validated by the acceptance suite):

* ``clustering_coefficient`` is triangles-per-claw, ``3·T / Σ_v C(d_v, 3)``,
  not the transitivity ratio ``3·T / wedges``.
* ``square_count`` counts 4-cliques, not 4-cycles.
* ``relative_edge_distribution_entropy`` is the entropy of the edge-endpoint
  distribution ``d_v / 2|E|`` normalized by ``log n``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import shortest_path

from .graph import Graph, connected_components

GLOBAL_METRICS = (
    "clustering_coefficient",
    "characteristic_path_length",
    "triangle_count",
    "square_count",
    "lcc_size",
    "powerlaw_exponent",
    "wedge_count",
    "relative_edge_distribution_entropy",
    "gini_coefficient",
)

MMD_METRICS = (
    "local_clustering_mmd",
    "degree_distribution_mmd",
    "local_square_clustering_mmd",
)


def wedge_count(g: Graph) -> int:
    """Number of two-hop paths: sum over nodes of C(d, 2)."""
    d = g.degrees().astype(np.int64)
    return int((d * (d - 1) // 2).sum())


def claw_count(g: Graph) -> int:
    """Number of 3-stars: sum over nodes of C(d, 3)."""
    d = g.degrees().astype(np.int64)
    return int((d * (d - 1) * (d - 2) // 6).sum())


def triangle_count(g: Graph) -> int:
    """Number of 3-cliques, each counted once."""
    if g.edge_count == 0:
        return 0
    a = g.adjacency()
    closed = (a @ a).multiply(a).sum()
    return int(round(closed / 6.0))


def _dense_bool_adjacency(g: Graph) -> np.ndarray:
    a = np.zeros((g.node_count, g.node_count), dtype=bool)
    src = np.repeat(np.arange(g.node_count), g.degrees())
    a[src, g.indices] = True
    return a


def square_count(g: Graph) -> int:
    """Number of 4-cliques, each counted once.

    For every edge (u, v), each edge among the common neighbors of u and v
    closes one 4-clique; summing over edges counts every 4-clique six times.
    """
    if g.edge_count < 6 or g.node_count < 4:
        return 0
    a = _dense_bool_adjacency(g)
    total = 0
    for u, v in g.edges():
        common = np.flatnonzero(a[u] & a[v])
        if len(common) >= 2:
            total += int(a[np.ix_(common, common)].sum()) // 2
    return total // 6


def global_clustering_coefficient(g: Graph) -> float:
    """Triangles per claw: 3·T / Σ_v C(d_v, 3); 0.0 when the graph has no claws."""
    claws = claw_count(g)
    if claws == 0:
        return 0.0
    return 3.0 * triangle_count(g) / claws


def lcc_size(g: Graph) -> int:
    """Node count of the largest connected component."""
    if g.node_count == 0:
        return 0
    _, labels = connected_components(g)
    return int(np.bincount(labels).max())


def characteristic_path_length(g: Graph) -> float:
    """Median over nodes of the mean shortest-path length to reachable nodes.

    Distances are computed within components; a node that reaches nothing
    contributes a mean of 0.  With an even node count the median is the
    average of the two middle values.
    """
    n = g.node_count
    if n <= 1:
        return 0.0
    dist = shortest_path(g.adjacency(), method="D", directed=False,
                         unweighted=True)
    np.fill_diagonal(dist, np.inf)
    reachable = np.isfinite(dist)
    counts = reachable.sum(axis=1)
    sums = np.where(reachable, dist, 0.0).sum(axis=1)
    means = np.divide(sums, counts, out=np.zeros(n), where=counts > 0)
    return float(np.median(means))


def powerlaw_exponent_of_degrees(degrees) -> float:
    """MLE scale exponent ``1 + n_+ / Σ log(d / d_min)`` of a degree multiset.

    Zero degrees are excluded from both the count and the sum; ``d_min`` is
    the smallest positive degree.  Returns ``inf`` when all positive degrees
    are equal (zero denominator).
    """
    d = np.asarray(degrees, dtype=np.float64)
    d = d[d > 0]
    if len(d) == 0:
        return math.inf
    denom = np.log(d / d.min()).sum()
    if denom <= 0.0:
        return math.inf
    return float(1.0 + len(d) / denom)


def powerlaw_exponent(g: Graph) -> float:
    """Maximum-likelihood scale exponent of the graph's degree distribution."""
    return powerlaw_exponent_of_degrees(g.degrees())


def relative_edge_distribution_entropy(g: Graph) -> float:
    """Entropy of the edge-endpoint distribution d_v/2|E|, normalized by log n.

    Equals 1 exactly for regular graphs.  Raises on edgeless graphs.
    """
    if g.edge_count == 0:
        raise ValueError("entropy undefined for an edgeless graph")
    d = g.degrees().astype(np.float64)
    p = d / (2.0 * g.edge_count)
    nz = p > 0
    h = -(p[nz] * np.log(p[nz])).sum()
    return float(h / math.log(g.node_count))


def gini_coefficient(g: Graph) -> float:
    """Inequality of the degree distribution; 0 for regular graphs.

    ``2·Σ_i i·d̂_i / (n·Σ_i d̂_i) − (n+1)/n`` with d̂ sorted ascending and
    1-based ranks.  Raises on edgeless graphs.
    """
    if g.edge_count == 0:
        raise ValueError("Gini coefficient undefined for an edgeless graph")
    d = np.sort(g.degrees().astype(np.float64))
    n = len(d)
    ranks = np.arange(1, n + 1, dtype=np.float64)
    return float(2.0 * (ranks * d).sum() / (n * d.sum()) - (n + 1) / n)


def degree_distribution(g: Graph) -> np.ndarray:
    """Per-node degrees as a real-valued distribution sample."""
    return g.degrees().astype(np.float64)


def local_clustering_distribution(g: Graph) -> np.ndarray:
    """Per-node triangle density among neighbor pairs; 0 where degree < 2."""
    n = g.node_count
    if g.edge_count == 0:
        return np.zeros(n)
    a = g.adjacency()
    tri2 = np.asarray((a @ a).multiply(a).sum(axis=1)).ravel()  # 2·triangles(v)
    d = g.degrees().astype(np.float64)
    pairs = d * (d - 1)
    return np.divide(tri2, pairs, out=np.zeros(n), where=pairs > 0)


def local_square_clustering_distribution(g: Graph) -> np.ndarray:
    """Per-node fraction of potential squares that actually close.

    For each pair of neighbors (u, w) of v: ``q`` common neighbors of u and w
    other than v close squares; the potential adds the open connections of u
    and w.  Nodes with degree < 2 get 0.
    """
    n = g.node_count
    out = np.zeros(n)
    if g.edge_count == 0 or n == 0:
        return out
    a = _dense_bool_adjacency(g)
    deg = g.degrees()
    for v in range(n):
        nb = g.neighbors(v)
        if len(nb) < 2:
            continue
        closed = 0
        potential = 0
        for i in range(len(nb)):
            u = nb[i]
            au = a[u]
            for w in nb[i + 1:]:
                q = int(np.count_nonzero(au & a[w])) - 1  # v itself always common
                degm = q + 1 + (1 if au[w] else 0)
                closed += q
                potential += q + (deg[u] - degm) + (deg[w] - degm)
        if potential > 0:
            out[v] = closed / potential
    return out


def _median_pairwise_distance(pooled: np.ndarray) -> float:
    """Median Euclidean distance over all i<j pairs of pooled rows."""
    n = len(pooled)
    if n < 2:
        return 0.0
    sq = (pooled * pooled).sum(axis=1)
    chunks = []
    step = max(1, int(2**22 // max(n, 1)))
    for start in range(0, n - 1, step):
        stop = min(start + step, n - 1)
        block = pooled[start:stop] @ pooled.T
        d2 = sq[start:stop, None] + sq[None, :] - 2.0 * block
        np.maximum(d2, 0.0, out=d2)
        for r in range(start, stop):
            chunks.append(np.sqrt(d2[r - start, r + 1:]))
    return float(np.median(np.concatenate(chunks)))


def _mean_gaussian_kernel(x: np.ndarray, y: np.ndarray, sigma: float) -> float:
    sx = (x * x).sum(axis=1)
    sy = (y * y).sum(axis=1)
    total = 0.0
    step = max(1, int(2**22 // max(len(y), 1)))
    for start in range(0, len(x), step):
        stop = min(start + step, len(x))
        d2 = sx[start:stop, None] + sy[None, :] - 2.0 * (x[start:stop] @ y.T)
        np.maximum(d2, 0.0, out=d2)
        total += np.exp(-d2 / (2.0 * sigma * sigma)).sum()
    return total / (len(x) * len(y))


def gaussian_mmd(x: np.ndarray, y: np.ndarray, bandwidth: Optional[float] = None,
                 min_bandwidth: float = 1e-8) -> float:
    """Squared maximum mean discrepancy with a Gaussian kernel (V-statistic).

    ``bandwidth`` defaults to the median pairwise distance of the pooled
    sample, floored at ``min_bandwidth``.  Accepts 1-D samples or
    row-matrices.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.ndim == 1:
        x = x[:, None]
    if y.ndim == 1:
        y = y[:, None]
    if len(x) == 0 or len(y) == 0:
        raise ValueError("MMD inputs must be nonempty")
    if x.shape[1] != y.shape[1]:
        raise ValueError(f"dimension mismatch: {x.shape[1]} vs {y.shape[1]}")
    if bandwidth is None:
        bandwidth = _median_pairwise_distance(np.vstack([x, y]))
    sigma = max(float(bandwidth), float(min_bandwidth), 1e-8)
    kxx = _mean_gaussian_kernel(x, x, sigma)
    kyy = _mean_gaussian_kernel(y, y, sigma)
    kxy = _mean_gaussian_kernel(x, y, sigma)
    return max(kxx + kyy - 2.0 * kxy, 0.0)


def mmd(a: np.ndarray, b: np.ndarray) -> float:
    """Squared MMD between two per-node statistic distributions."""
    return gaussian_mmd(np.asarray(a, dtype=np.float64).ravel(),
                        np.asarray(b, dtype=np.float64).ravel())


@dataclass
class PropertyReport:
    """Metric values for one graph, optionally compared against a reference."""

    metrics: dict[str, float]
    flags: dict[str, str] = field(default_factory=dict)
    graph_id: str = ""
    reference_id: Optional[str] = None
    seed: Optional[int] = None

    def to_json(self) -> str:
        doc: dict[str, object] = {"graph_id": self.graph_id,
                                  "reference_id": self.reference_id,
                                  "seed": self.seed}
        for name, value in self.metrics.items():
            doc[name] = value
        for name, reason in self.flags.items():
            doc[f"flag_{name}"] = reason
        return json.dumps(doc, indent=2, sort_keys=True)

    @staticmethod
    def from_json(text: str) -> "PropertyReport":
        doc = json.loads(text)
        metrics = {k: v for k, v in doc.items()
                   if k in GLOBAL_METRICS or k in MMD_METRICS}
        flags = {k[len("flag_"):]: v for k, v in doc.items() if k.startswith("flag_")}
        return PropertyReport(metrics=metrics, flags=flags,
                              graph_id=doc.get("graph_id", ""),
                              reference_id=doc.get("reference_id"),
                              seed=doc.get("seed"))

    def to_table(self, label: str = "") -> str:
        names = [n for n in (*GLOBAL_METRICS, *MMD_METRICS) if n in self.metrics]
        widths = [max(len(n), 12) for n in names]
        head = "  ".join(n.rjust(w) for n, w in zip(names, widths))
        row = "  ".join(f"{self.metrics[n]:.6g}".rjust(w) for n, w in zip(names, widths))
        prefix = f"{label or self.graph_id}\n" if (label or self.graph_id) else ""
        return f"{prefix}{head}\n{row}\n"


def property_report(g: Graph, reference: Optional[Graph] = None, *,
                    graph_id: str = "", reference_id: Optional[str] = None,
                    seed: Optional[int] = None) -> PropertyReport:
    """All nine global metrics, plus the three MMDs when a reference is given.

    Degenerate metrics are flagged, never raised, so a report always comes
    back complete.
    """
    values: dict[str, float] = {}
    flags: dict[str, str] = {}

    def compute(name, fn):
        try:
            v = float(fn(g))
        except ValueError as exc:
            values[name] = math.nan
            flags[name] = str(exc)
            return
        values[name] = v
        if math.isinf(v):
            flags[name] = "undefined for a regular degree distribution"

    compute("clustering_coefficient", global_clustering_coefficient)
    if claw_count(g) == 0:
        flags["clustering_coefficient"] = "graph has no claws"
    compute("characteristic_path_length", characteristic_path_length)
    compute("triangle_count", triangle_count)
    compute("square_count", square_count)
    compute("lcc_size", lcc_size)
    compute("powerlaw_exponent", powerlaw_exponent)
    compute("wedge_count", wedge_count)
    compute("relative_edge_distribution_entropy", relative_edge_distribution_entropy)
    compute("gini_coefficient", gini_coefficient)

    if reference is not None:
        pairs = {
            "local_clustering_mmd": local_clustering_distribution,
            "degree_distribution_mmd": degree_distribution,
            "local_square_clustering_mmd": local_square_clustering_distribution,
        }
        for name, fn in pairs.items():
            try:
                values[name] = mmd(fn(g), fn(reference))
            except ValueError as exc:
                values[name] = math.nan
                flags[name] = str(exc)

    return PropertyReport(metrics=values, flags=flags, graph_id=graph_id,
                          reference_id=reference_id, seed=seed)


def report_distance(report: PropertyReport, reference: PropertyReport) -> float:
    """Mean relative deviation between two reports' shared finite metrics.

    Used to rank repeated pipeline trials against the original graph's
    report; lower is closer.
    """
    deltas = []
    for name in GLOBAL_METRICS:
        a = report.metrics.get(name)
        b = reference.metrics.get(name)
        if a is None or b is None or not (math.isfinite(a) and math.isfinite(b)):
            continue
        scale = max(abs(a), abs(b))
        deltas.append(abs(a - b) / scale if scale > 0 else 0.0)
    for name in MMD_METRICS:
        a = report.metrics.get(name)
        if a is not None and math.isfinite(a):
            deltas.append(abs(a))
    if not deltas:
        return math.inf
    return float(np.mean(deltas))
