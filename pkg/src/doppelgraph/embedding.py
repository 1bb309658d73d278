"""Node embeddings and a parametric link predictor learned from one graph.

The encoder is a two-layer neighborhood-mean aggregator (self weight +
neighbor weight + bias per layer, rectifier between layers, linear output).
It is trained full-batch with a binary cross-entropy link-prediction
objective on a training set that grows through a cycling negative-sampling
schedule: each cycle starts warm from the current parameters with all
positive edges plus equally many fresh random negatives, then every round
injects a further batch of never-seen negatives.

Everything is hand-differentiated; the gradients are checked against
central finite differences in the test suite.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.sparse as sp
from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError
from sklearn.metrics import average_precision_score, roc_auc_score

from ._mlp import glorot, leaky_relu, leaky_relu_grad, sigmoid, Adam
from ._util import arrays_from_json, arrays_to_json
from .graph import Graph
from .realization import MatrixOracle


class TrainingDivergedError(RuntimeError):
    """Raised when a training loss stops being finite."""


@dataclass
class CyclingSchedule:
    """Warm-started cycles of rounds with negatives injected per round."""

    cycles: int = 1
    rounds: int = 20
    epochs_first: int = 5000
    epochs_later: int = 5000
    negatives_per_round: int = 2000

    def __post_init__(self):
        for name in ("cycles", "rounds", "epochs_first", "epochs_later",
                     "negatives_per_round"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be a positive integer")


class LinkPredictor:
    """Symmetric pair scorer: sigmoid(w2·lrelu(W1(zu∘zv)+b1)+b2).

    Symmetry comes for free from the elementwise product of the two
    embeddings; outputs are strictly inside (0, 1).
    """

    def __init__(self, W1: np.ndarray, b1: np.ndarray, w2: np.ndarray,
                 b2, leak: float = 0.01):
        self.W1 = np.asarray(W1, dtype=np.float64)
        self.b1 = np.asarray(b1, dtype=np.float64)
        self.w2 = np.asarray(w2, dtype=np.float64).ravel()
        # 1-element array so optimizer updates land in place
        self.b2 = np.atleast_1d(np.asarray(b2, dtype=np.float64)).ravel()[:1]
        self.leak = float(leak)

    @staticmethod
    def initialize(dim: int, hidden: int, leak: float,
                   rng: np.random.Generator) -> "LinkPredictor":
        return LinkPredictor(glorot(rng, hidden, dim), np.zeros(hidden),
                             glorot(rng, 1, hidden).ravel(), 0.0, leak)

    def pair_logit(self, zu: np.ndarray, zv: np.ndarray) -> np.ndarray:
        e = np.asarray(zu, dtype=np.float64) * np.asarray(zv, dtype=np.float64)
        a = e @ self.W1.T + self.b1
        return leaky_relu(a, self.leak) @ self.w2 + self.b2[0]

    def pair_probability(self, zu: np.ndarray, zv: np.ndarray) -> np.ndarray:
        return sigmoid(self.pair_logit(zu, zv))

    def params(self) -> dict[str, np.ndarray]:
        return {"head_W1": self.W1, "head_b1": self.b1,
                "head_w2": self.w2, "head_b2": self.b2}

    def set_params_array(self, params: dict[str, np.ndarray]) -> None:
        self.W1 = params["head_W1"]
        self.b1 = params["head_b1"]
        self.w2 = params["head_w2"]
        self.b2 = params["head_b2"]

    def to_json(self) -> str:
        return arrays_to_json(self.params(), meta={"kind": "link_predictor",
                                                   "leak": self.leak})

    @staticmethod
    def from_json(text: str) -> "LinkPredictor":
        arrays, meta = arrays_from_json(text)
        return LinkPredictor(arrays["head_W1"], arrays["head_b1"],
                             arrays["head_w2"], arrays["head_b2"],
                             leak=float(meta.get("leak", 0.01)))


def predict_link(predictor: LinkPredictor, zu: np.ndarray, zv: np.ndarray):
    """Probability that the nodes behind two embeddings are linked."""
    zu = np.asarray(zu, dtype=np.float64)
    zv = np.asarray(zv, dtype=np.float64)
    scalar = zu.ndim == 1 and zv.ndim == 1
    zu2, zv2 = np.atleast_2d(zu), np.atleast_2d(zv)
    if zu2.shape[1] != predictor.W1.shape[1] or zv2.shape[1] != zu2.shape[1]:
        raise ValueError("embedding dimension does not match predictor")
    p = predictor.pair_probability(zu2, zv2)
    return float(p[0]) if scalar else p


class _Encoder:
    """Two aggregation layers over (features, row-normalized adjacency)."""

    def __init__(self, in_dim: int, hidden: int, out_dim: int,
                 rng: np.random.Generator):
        self.params = {
            "enc_Ws0": glorot(rng, hidden, in_dim),
            "enc_Wn0": glorot(rng, hidden, in_dim),
            "enc_b0": np.zeros(hidden),
            "enc_Ws1": glorot(rng, out_dim, hidden),
            "enc_Wn1": glorot(rng, out_dim, hidden),
            "enc_b1": np.zeros(out_dim),
        }

    def to_json(self) -> str:
        hidden, in_dim = self.params["enc_Ws0"].shape
        out_dim = self.params["enc_Ws1"].shape[0]
        return arrays_to_json(self.params, meta={
            "kind": "encoder", "in_dim": in_dim, "hidden_dim": hidden,
            "out_dim": out_dim})

    @staticmethod
    def from_json(text: str) -> "_Encoder":
        arrays, meta = arrays_from_json(text)
        enc = _Encoder(int(meta["in_dim"]), int(meta["hidden_dim"]),
                       int(meta["out_dim"]), np.random.default_rng(0))
        enc.params = arrays
        return enc

    def forward(self, x: Optional[np.ndarray], ax: Optional[np.ndarray],
                abar: sp.csr_matrix) -> tuple[np.ndarray, dict]:
        p = self.params
        if x is None:
            # identity features: X @ W.T collapses to W.T, Abar @ X to Abar
            pre0 = p["enc_Ws0"].T + abar @ p["enc_Wn0"].T + p["enc_b0"]
        else:
            pre0 = x @ p["enc_Ws0"].T + ax @ p["enc_Wn0"].T + p["enc_b0"]
        h0 = np.maximum(pre0, 0.0)
        ah0 = abar @ h0
        out = h0 @ p["enc_Ws1"].T + ah0 @ p["enc_Wn1"].T + p["enc_b1"]
        return out, {"pre0": pre0, "h0": h0, "ah0": ah0}

    def backward(self, cache: dict, dout: np.ndarray, x: Optional[np.ndarray],
                 ax: Optional[np.ndarray], abar_t: sp.csr_matrix
                 ) -> dict[str, np.ndarray]:
        p = self.params
        grads = {
            "enc_Ws1": dout.T @ cache["h0"],
            "enc_Wn1": dout.T @ cache["ah0"],
            "enc_b1": dout.sum(axis=0),
        }
        dh0 = dout @ p["enc_Ws1"] + abar_t @ (dout @ p["enc_Wn1"])
        dpre0 = dh0 * (cache["pre0"] > 0)
        if x is None:
            grads["enc_Ws0"] = dpre0.T
            grads["enc_Wn0"] = (abar_t @ dpre0).T
        else:
            grads["enc_Ws0"] = dpre0.T @ x
            grads["enc_Wn0"] = dpre0.T @ ax
        grads["enc_b0"] = dpre0.sum(axis=0)
        return grads


def _row_normalized_adjacency(g: Graph) -> sp.csr_matrix:
    a = g.adjacency()
    deg = np.maximum(g.degrees(), 1).astype(np.float64)
    return sp.diags(1.0 / deg) @ a


def _sample_unseen_pairs(rng: np.random.Generator, n: int, count: int,
                         banned: set[tuple[int, int]]) -> list[tuple[int, int]]:
    """Uniform i<j pairs outside ``banned``; stops early if pairs run out."""
    available = n * (n - 1) // 2 - len(banned)
    count = min(count, max(available, 0))
    out: list[tuple[int, int]] = []
    while len(out) < count:
        us = rng.integers(0, n, size=4 * (count - len(out)) + 8)
        vs = rng.integers(0, n, size=len(us))
        for u, v in zip(us, vs):
            if u == v:
                continue
            pair = (int(u), int(v)) if u < v else (int(v), int(u))
            if pair in banned:
                continue
            banned.add(pair)
            out.append(pair)
            if len(out) == count:
                break
    return out


class LinkPredictionEncoder(BaseEstimator):
    """Learns per-node embeddings and a link predictor from a single graph.

    Parameters mirror the training schedule: ``cycles`` warm-started passes
    of ``rounds`` rounds; the first round of each cycle runs
    ``epochs_first`` full-batch steps on all edges plus equally many random
    negatives, and every later round adds ``negatives_per_round`` unseen
    negatives and runs ``epochs_later`` steps.

    Fitted attributes: ``embedding_`` (n×dim), ``predictor_``,
    ``history_`` (per-round losses), ``n_nodes_``.
    """

    def __init__(self, embedding_dim: int = 128, hidden_dim: int = 128,
                 head_hidden_dim: int = 64, leak: float = 0.01,
                 learning_rate: float = 1e-3, cycles: int = 1,
                 rounds: int = 20, epochs_first: int = 5000,
                 epochs_later: int = 5000, negatives_per_round: int = 2000,
                 seed: int = 0):
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
        self.seed = seed

    def schedule(self) -> CyclingSchedule:
        return CyclingSchedule(self.cycles, self.rounds, self.epochs_first,
                               self.epochs_later, self.negatives_per_round)

    def _loss_and_grads(self, encoder: _Encoder, head: LinkPredictor,
                        x, ax, abar, abar_t, pairs: np.ndarray,
                        labels: np.ndarray, scatter_u: sp.csr_matrix,
                        scatter_v: sp.csr_matrix):
        emb, cache = encoder.forward(x, ax, abar)
        zu = emb[pairs[:, 0]]
        zv = emb[pairs[:, 1]]
        e = zu * zv
        pre = e @ head.W1.T + head.b1
        act = leaky_relu(pre, head.leak)
        logits = act @ head.w2 + head.b2[0]
        # stable BCE with logits
        loss = float(np.mean(np.logaddexp(0.0, logits) - labels * logits))
        batch = len(pairs)
        ds = (sigmoid(logits) - labels) / batch
        grads = {
            "head_w2": act.T @ ds,
            "head_b2": np.array([ds.sum()]),
        }
        dact = ds[:, None] * head.w2
        dpre = dact * leaky_relu_grad(pre, head.leak)
        grads["head_W1"] = dpre.T @ e
        grads["head_b1"] = dpre.sum(axis=0)
        de = dpre @ head.W1
        demb = scatter_u.T @ (de * zv) + scatter_v.T @ (de * zu)
        grads.update(encoder.backward(cache, demb, x, ax, abar_t))
        return loss, grads, emb

    def fit(self, graph: Graph, features: Optional[np.ndarray] = None):
        n = graph.node_count
        if graph.edge_count == 0:
            raise ValueError("cannot learn link prediction from an edgeless graph")
        rng = np.random.default_rng(self.seed)
        abar = _row_normalized_adjacency(graph)
        abar_t = sp.csr_matrix(abar.T)
        if features is not None:
            x = np.asarray(features, dtype=np.float64)
            if x.shape[0] != n:
                raise ValueError("feature row count must equal node count")
            ax = abar @ x
            in_dim = x.shape[1]
        else:
            x = ax = None
            in_dim = n
        encoder = _Encoder(in_dim, self.hidden_dim, self.embedding_dim, rng)
        head = LinkPredictor.initialize(self.embedding_dim,
                                        self.head_hidden_dim, self.leak, rng)
        params = dict(encoder.params)
        params.update(head.params())
        opt = Adam(params, lr=self.learning_rate)
        head.set_params_array(params)  # share the optimizer's arrays

        positives = graph.edges()
        pos_set = {(int(u), int(v)) for u, v in positives}
        schedule = self.schedule()
        history: list[dict] = []
        emb = None
        for cycle in range(schedule.cycles):
            banned = set(pos_set)
            negatives = _sample_unseen_pairs(rng, n, len(positives), banned)
            for rnd in range(schedule.rounds):
                if rnd > 0:
                    negatives = negatives + _sample_unseen_pairs(
                        rng, n, schedule.negatives_per_round, banned)
                pairs = np.vstack([positives,
                                   np.asarray(negatives, dtype=np.int64)])
                labels = np.zeros(len(pairs))
                labels[:len(positives)] = 1.0
                rows = np.arange(len(pairs))
                ones = np.ones(len(pairs))
                scatter_u = sp.csr_matrix((ones, (rows, pairs[:, 0])),
                                          shape=(len(pairs), n))
                scatter_v = sp.csr_matrix((ones, (rows, pairs[:, 1])),
                                          shape=(len(pairs), n))
                epochs = schedule.epochs_first if rnd == 0 else schedule.epochs_later
                loss = np.nan
                for _ in range(epochs):
                    loss, grads, emb = self._loss_and_grads(
                        encoder, head, x, ax, abar, abar_t, pairs, labels,
                        scatter_u, scatter_v)
                    if not np.isfinite(loss):
                        raise TrainingDivergedError(
                            f"non-finite loss in cycle {cycle} round {rnd}")
                    opt.step(grads)
                history.append({"cycle": cycle, "round": rnd, "loss": loss,
                                "training_pairs": len(pairs)})

        final_emb, _ = encoder.forward(x, ax, abar)
        self.embedding_ = final_emb
        self.predictor_ = head
        self.encoder_ = encoder
        self.history_ = history
        self.n_nodes_ = n
        return self

    def _check_fitted(self):
        if not hasattr(self, "embedding_"):
            raise NotFittedError("fit must be called first")

    def transform(self, node_ids=None) -> np.ndarray:
        """Embeddings for the requested nodes (all nodes by default)."""
        self._check_fitted()
        if node_ids is None:
            return self.embedding_
        return self.embedding_[np.asarray(node_ids, dtype=np.int64)]

    def oracle(self) -> MatrixOracle:
        self._check_fitted()
        return oracle_from(self.predictor_, self.embedding_)


def oracle_from(predictor: LinkPredictor, embeddings: np.ndarray) -> MatrixOracle:
    """Link-probability oracle over the rows of an embedding matrix.

    Precomputes the symmetric probability matrix so realization can query
    whole candidate rows cheaply.
    """
    emb = np.asarray(embeddings, dtype=np.float64)
    n, dim = emb.shape
    matrix = np.zeros((n, n))
    # block by element budget: the repeated row matrix is (rows*n, dim)
    step = max(1, int(2**24 // max(n * dim, 1)))
    for start in range(0, n, step):
        stop = min(start + step, n)
        rows = stop - start
        zu = np.repeat(emb[start:stop], n, axis=0)
        zv = np.tile(emb, (rows, 1))
        matrix[start:stop] = predictor.pair_probability(zu, zv).reshape(rows, n)
    matrix = 0.5 * (matrix + matrix.T)  # exact symmetry despite float roundoff
    np.fill_diagonal(matrix, 0.0)
    return MatrixOracle(matrix)


def evaluate_predictor(predictor: LinkPredictor, embeddings: np.ndarray,
                       graph: Graph, sample_negatives: Optional[int] = None,
                       seed: int = 0) -> dict[str, float]:
    """AP and AUC of the predictor over positive edges versus non-edges.

    Scores all non-edges when ``sample_negatives`` is None (fine up to a few
    thousand nodes), otherwise a uniform sample of that many non-edges.
    """
    emb = np.asarray(embeddings, dtype=np.float64)
    n = graph.node_count
    positives = graph.edges()
    if sample_negatives is None:
        u, v = np.triu_indices(n, k=1)
        mask = np.ones(len(u), dtype=bool)
        keys = u * n + v
        pos_keys = positives[:, 0] * n + positives[:, 1]
        mask[np.isin(keys, pos_keys)] = False
        neg = np.column_stack([u[mask], v[mask]])
    else:
        rng = np.random.default_rng(seed)
        banned = {(int(a), int(b)) for a, b in positives}
        neg = np.asarray(_sample_unseen_pairs(rng, n, sample_negatives, banned),
                         dtype=np.int64)
    pairs = np.vstack([positives, neg])
    labels = np.zeros(len(pairs))
    labels[:len(positives)] = 1.0
    scores = np.empty(len(pairs))
    step = 1 << 18
    for start in range(0, len(pairs), step):
        stop = min(start + step, len(pairs))
        chunk = pairs[start:stop]
        scores[start:stop] = predictor.pair_probability(emb[chunk[:, 0]],
                                                        emb[chunk[:, 1]])
    return {"auc": float(roc_auc_score(labels, scores)),
            "ap": float(average_precision_score(labels, scores))}


def write_embeddings_tsv(embeddings: np.ndarray, path) -> None:
    emb = np.asarray(embeddings, dtype=np.float64)
    with open(path, "w", encoding="utf-8") as fh:
        for i, row in enumerate(emb):
            fh.write(str(i) + "\t" + "\t".join(repr(float(x)) for x in row) + "\n")


def read_embeddings_tsv(path) -> np.ndarray:
    rows = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            parts = line.rstrip("\n").split("\t")
            rows.append((int(parts[0]), [float(x) for x in parts[1:]]))
    rows.sort(key=lambda r: r[0])
    return np.asarray([r[1] for r in rows], dtype=np.float64)
