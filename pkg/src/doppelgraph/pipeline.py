"""End-to-end generator: one estimator orchestrating every learning stage.

``fit`` learns everything from the input graph (embeddings + link predictor,
then the embedding GAN); ``sample`` draws fresh node embeddings, builds the
initial top-probability graph, transfers the original degree sequence onto
the new nodes by degree rank, and realizes it with the probability-guided
greedy algorithm.  The returned sample carries the degree-rank
correspondence, which is also the bijection under which edge overlap is
reported.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError

from ._util import derive_seed
from .embedding import LinkPredictionEncoder, oracle_from
from .gan import EmbeddingGan
from .graph import (Graph, connected_components, degree_sequence,
                    edge_overlap, induced_subgraph)
from .metrics import PropertyReport, property_report
from .realization import (RealizationTrace, assign_degree_sequence,
                          improved_hh, initial_graph_from_predictor)


def _largest_component_with_nodes(g: Graph) -> tuple[Graph, np.ndarray]:
    if g.node_count == 0:
        return g, np.zeros(0, dtype=np.int64)
    _, labels = connected_components(g)
    sizes = np.bincount(labels)
    best = np.flatnonzero(sizes == sizes.max())
    if len(best) > 1:
        first = np.full(len(sizes), g.node_count, dtype=np.int64)
        np.minimum.at(first, labels, np.arange(g.node_count))
        best = best[np.argmin(first[best])]
    else:
        best = best[0]
    return induced_subgraph(g, np.flatnonzero(labels == best))


@dataclass
class DoppelgangerSample:
    """One generated graph plus the artifacts that produced it."""

    graph: Graph
    correspondence: np.ndarray
    stub_deficit: int
    skipped_hubs: tuple[int, ...]
    initial_graph: Graph
    embeddings: np.ndarray
    labels: Optional[np.ndarray]
    seed: int
    trace: Optional[RealizationTrace] = None


class DoppelgangerGraphGenerator(BaseEstimator):
    """Learns a single graph and samples structure-matching look-alikes.

    ``fit`` restricts the input to its largest connected component (kept as
    ``reference_graph_``) and trains the encoder and the GAN on it.  Each
    ``sample`` then produces a new graph over a fresh node set whose degree
    sequence equals the reference's whenever no realization hub got stuck
    (``stub_deficit`` reports any shortfall).
    """

    def __init__(self, embedding_dim: int = 128, hidden_dim: int = 128,
                 head_hidden_dim: int = 64, leak: float = 0.01,
                 learning_rate: float = 1e-3, cycles: int = 1,
                 rounds: int = 20, epochs_first: int = 5000,
                 epochs_later: int = 5000, negatives_per_round: int = 2000,
                 latent_dim: int = 16, penalty_weight: float = 10.0,
                 critic_steps: int = 5, gan_batch_size: int = 64,
                 gan_steps: int = 3000, gan_learning_rate: float = 1e-4,
                 trace: bool = False, seed: int = 0):
        self.embedding_dim = embedding_dim
        self.hidden_dim = hidden_dim
        self.head_hidden_dim = head_hidden_dim
        self.leak = leak
        self.learning_rate = learning_rate
        self.cycles = cycles
        self.rounds = rounds
        self.epochs_first = epochs_first
        self.epochs_later = epochs_later
        self.negatives_per_round = negatives_per_round
        self.latent_dim = latent_dim
        self.penalty_weight = penalty_weight
        self.critic_steps = critic_steps
        self.gan_batch_size = gan_batch_size
        self.gan_steps = gan_steps
        self.gan_learning_rate = gan_learning_rate
        self.trace = trace
        self.seed = seed

    @classmethod
    def smoke(cls, seed: int = 0, **overrides) -> "DoppelgangerGraphGenerator":
        """Reduced-effort preset for CI and quick experiments."""
        params = dict(embedding_dim=32, hidden_dim=32, head_hidden_dim=16,
                      rounds=4, epochs_first=400, epochs_later=200,
                      negatives_per_round=500, gan_steps=300, seed=seed)
        params.update(overrides)
        return cls(**params)

    def fit(self, graph: Graph, features: Optional[np.ndarray] = None,
            labels: Optional[np.ndarray] = None):
        if graph.edge_count == 0:
            raise ValueError("input graph must have at least one edge")
        lcc, nodes = _largest_component_with_nodes(graph)
        if features is not None:
            features = np.asarray(features, dtype=np.float64)[nodes]
        if labels is not None:
            labels = np.asarray(labels)[nodes]

        self.encoder_ = LinkPredictionEncoder(
            embedding_dim=self.embedding_dim, hidden_dim=self.hidden_dim,
            head_hidden_dim=self.head_hidden_dim, leak=self.leak,
            learning_rate=self.learning_rate, cycles=self.cycles,
            rounds=self.rounds, epochs_first=self.epochs_first,
            epochs_later=self.epochs_later,
            negatives_per_round=self.negatives_per_round,
            seed=derive_seed(self.seed, 1)).fit(lcc, features=features)
        self.gan_ = EmbeddingGan(
            latent_dim=self.latent_dim, penalty_weight=self.penalty_weight,
            critic_steps=self.critic_steps, batch_size=self.gan_batch_size,
            steps=self.gan_steps, learning_rate=self.gan_learning_rate,
            seed=derive_seed(self.seed, 2)).fit(self.encoder_.embedding_,
                                                labels=labels)
        self.reference_graph_ = lcc
        self.reference_nodes_ = nodes
        self.degree_sequence_ = degree_sequence(lcc)
        return self

    def _check_fitted(self):
        if not hasattr(self, "gan_"):
            raise NotFittedError("fit must be called first")

    def sample(self, seed: Optional[int] = None) -> DoppelgangerSample:
        self._check_fitted()
        sample_seed = self.seed if seed is None else seed
        ref = self.reference_graph_
        emb, labels = self.gan_.sample(ref.node_count,
                                       seed=derive_seed(sample_seed, 3))
        initial = initial_graph_from_predictor(emb, self.encoder_.predictor_,
                                               ref.edge_count)
        targets, corr = assign_degree_sequence(initial, self.degree_sequence_)
        oracle = oracle_from(self.encoder_.predictor_, emb)
        result = improved_hh(targets, oracle, trace=self.trace)
        return DoppelgangerSample(
            graph=result.graph, correspondence=corr,
            stub_deficit=result.stub_deficit,
            skipped_hubs=result.skipped_hubs, initial_graph=initial,
            embeddings=emb, labels=labels, seed=sample_seed,
            trace=result.trace)

    def evaluate(self, sample: DoppelgangerSample
                 ) -> tuple[PropertyReport, float]:
        """Property report against the reference, plus the edge overlap."""
        self._check_fitted()
        report = property_report(sample.graph, self.reference_graph_,
                                 graph_id="doppelganger",
                                 reference_id="reference, largest component",
                                 seed=sample.seed)
        overlap = edge_overlap(sample.graph, self.reference_graph_,
                               sample.correspondence)
        return report, overlap

    def fit_sample(self, graph: Graph, features=None, labels=None,
                   seed: Optional[int] = None) -> DoppelgangerSample:
        return self.fit(graph, features=features, labels=labels).sample(seed)
