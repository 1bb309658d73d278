import math

import numpy as np
import pytest
import scipy.sparse as sp
from sklearn.exceptions import NotFittedError

import doppelgraph as dg
from doppelgraph.embedding import (LinkPredictionEncoder, LinkPredictor,
                                   TrainingDivergedError, _Encoder,
                                   _row_normalized_adjacency,
                                   _sample_unseen_pairs, read_embeddings_tsv,
                                   write_embeddings_tsv)

from conftest import planted_partition, random_graph


class TestPredictLink:
    def test_zero_parameters_give_half(self):
        pred = LinkPredictor(np.zeros((4, 8)), np.zeros(4), np.zeros(4), 0.0)
        rng = np.random.default_rng(0)
        assert dg.predict_link(pred, rng.normal(size=8),
                               rng.normal(size=8)) == pytest.approx(0.5)

    def test_symmetric(self):
        rng = np.random.default_rng(1)
        pred = LinkPredictor.initialize(8, 4, 0.01, rng)
        for _ in range(10):
            a, b = rng.normal(size=8), rng.normal(size=8)
            assert dg.predict_link(pred, a, b) == pytest.approx(
                dg.predict_link(pred, b, a))

    def test_hand_computed_value(self):
        # one hidden unit looking at the first coordinate, pass-through output
        pred = LinkPredictor(np.array([[1.0, 0.0]]), np.zeros(1),
                             np.ones(1), 0.0)
        e1 = np.array([1.0, 0.0])
        expected = 1.0 / (1.0 + math.exp(-1.0))
        assert dg.predict_link(pred, e1, e1) == pytest.approx(expected, abs=1e-9)
        assert expected == pytest.approx(0.7311, abs=5e-5)

    def test_output_strictly_inside_unit_interval(self):
        rng = np.random.default_rng(2)
        pred = LinkPredictor.initialize(8, 4, 0.01, rng)
        probs = pred.pair_probability(rng.normal(size=(50, 8)),
                                      rng.normal(size=(50, 8)))
        assert np.all((probs > 0) & (probs < 1))

    def test_dimension_mismatch(self):
        pred = LinkPredictor.initialize(8, 4, 0.01, np.random.default_rng(3))
        with pytest.raises(ValueError):
            dg.predict_link(pred, np.zeros(5), np.zeros(5))

    def test_json_round_trip(self):
        pred = LinkPredictor.initialize(6, 3, 0.02, np.random.default_rng(4))
        again = LinkPredictor.from_json(pred.to_json())
        z = np.random.default_rng(5).normal(size=(4, 6))
        np.testing.assert_allclose(again.pair_probability(z, z[::-1]),
                                   pred.pair_probability(z, z[::-1]))
        assert again.leak == pred.leak


def full_loss_gradients(graph, features=None, seed=5):
    """Loss/gradient closure for finite-difference checking."""
    est = LinkPredictionEncoder(embedding_dim=8, hidden_dim=6,
                                head_hidden_dim=4, seed=seed)
    n = graph.node_count
    abar = _row_normalized_adjacency(graph)
    abar_t = sp.csr_matrix(abar.T)
    if features is not None:
        x = np.asarray(features, dtype=np.float64)
        ax = abar @ x
        in_dim = x.shape[1]
    else:
        x = ax = None
        in_dim = n
    enc = _Encoder(in_dim, 6, 8, np.random.default_rng(seed))
    head = LinkPredictor.initialize(8, 4, 0.01, np.random.default_rng(seed + 1))
    pos = graph.edges()[:8]
    rng = np.random.default_rng(seed + 2)
    neg = np.asarray(_sample_unseen_pairs(rng, n, len(pos),
                                          {(int(a), int(b)) for a, b in pos}))
    pairs = np.vstack([pos, neg])
    labels = np.zeros(len(pairs))
    labels[:len(pos)] = 1.0
    rows = np.arange(len(pairs))
    ones = np.ones(len(pairs))
    su = sp.csr_matrix((ones, (rows, pairs[:, 0])), shape=(len(pairs), n))
    sv = sp.csr_matrix((ones, (rows, pairs[:, 1])), shape=(len(pairs), n))
    params = dict(enc.params)
    params.update(head.params())

    def value_and_grads():
        return est._loss_and_grads(enc, head, x, ax, abar, abar_t, pairs,
                                   labels, su, sv)[:2]

    return params, value_and_grads


def finite_difference_worst_error(params, value_and_grads, samples=6,
                                  eps=1e-6, seed=0):
    rng = np.random.default_rng(seed)
    _, grads = value_and_grads()
    worst = 0.0
    for name, arr in params.items():
        flat = arr.reshape(-1)
        for k in rng.choice(arr.size, size=min(arr.size, samples),
                            replace=False):
            old = flat[k]
            flat[k] = old + eps
            up = value_and_grads()[0]
            flat[k] = old - eps
            down = value_and_grads()[0]
            flat[k] = old
            fd = (up - down) / (2 * eps)
            an = grads[name].reshape(-1)[k]
            gap = max(abs(fd - an) - 1e-7, 0.0)  # atol absorbs FD noise on zero grads
            worst = max(worst, gap / max(abs(fd), abs(an), 1e-7))
    return worst


class TestGradients:
    def test_identity_features(self):
        g = random_graph(12, 0.4, seed=3)
        params, fn = full_loss_gradients(g)
        assert finite_difference_worst_error(params, fn) <= 1e-4

    def test_explicit_features(self):
        g = random_graph(12, 0.4, seed=3)
        feats = np.random.default_rng(9).normal(size=(12, 5))
        params, fn = full_loss_gradients(g, features=feats)
        assert finite_difference_worst_error(params, fn) <= 1e-4


class TestNegativeSampling:
    def test_never_repeats_within_banned_set(self):
        rng = np.random.default_rng(0)
        banned = {(0, 1)}
        drawn = _sample_unseen_pairs(rng, 20, 50, banned)
        assert len(drawn) == len(set(drawn)) == 50
        assert (0, 1) not in drawn
        assert all(u < v for u, v in drawn)

    def test_exhaustion_stops_early(self):
        rng = np.random.default_rng(1)
        drawn = _sample_unseen_pairs(rng, 4, 100, set())
        assert len(drawn) == 6  # C(4,2)

    def test_training_set_grows_by_k(self):
        g, _ = planted_partition([10, 10], 0.8, 0.1, seed=2)
        est = LinkPredictionEncoder(embedding_dim=8, hidden_dim=8,
                                    head_hidden_dim=4, rounds=3,
                                    epochs_first=2, epochs_later=2,
                                    negatives_per_round=5, seed=3).fit(g)
        sizes = [h["training_pairs"] for h in est.history_]
        assert sizes[0] == 2 * g.edge_count
        assert sizes[1] == sizes[0] + 5
        assert sizes[2] == sizes[1] + 5

    def test_round_one_is_balanced(self):
        g = random_graph(15, 0.3, seed=4)
        est = LinkPredictionEncoder(embedding_dim=4, hidden_dim=4,
                                    head_hidden_dim=2, cycles=1, rounds=1,
                                    epochs_first=1, epochs_later=1,
                                    seed=5).fit(g)
        assert est.history_[0]["training_pairs"] == 2 * g.edge_count


class TestTraining:
    def test_learnability_loss_floor(self):
        g, _ = planted_partition([25, 25], 0.7, 0.08, seed=6)
        est = LinkPredictionEncoder(embedding_dim=16, hidden_dim=16,
                                    head_hidden_dim=8, rounds=1,
                                    epochs_first=400, seed=7).fit(g)
        assert est.history_[-1]["loss"] <= math.log(2) + 0.05

    def test_dense_clusters_rank_intra_over_inter(self):
        # two dense clusters plus one bridge; cluster structure must push
        # within-cluster pair probabilities above cross-cluster ones
        g, block = planted_partition([12, 12], 0.85, 0.0, seed=8)
        edges = list(g.edge_set()) + [(0, 12)]
        g = dg.Graph.from_edges(24, edges)
        est = LinkPredictionEncoder(embedding_dim=16, hidden_dim=16,
                                    head_hidden_dim=8, rounds=2,
                                    epochs_first=200, epochs_later=100,
                                    negatives_per_round=40, seed=9).fit(g)
        probs = est.oracle().matrix
        edge_set = g.edge_set()
        intra, inter = [], []
        for u in range(24):
            for v in range(u + 1, 24):
                if (u, v) in edge_set:
                    continue
                (intra if block[u] == block[v] else inter).append(probs[u, v])
        assert np.mean(intra) > np.mean(inter)

    def test_deterministic_embeddings(self):
        g = random_graph(20, 0.3, seed=10)
        kwargs = dict(embedding_dim=8, hidden_dim=8, head_hidden_dim=4,
                      rounds=2, epochs_first=20, epochs_later=10,
                      negatives_per_round=10, seed=11)
        a = LinkPredictionEncoder(**kwargs).fit(g)
        b = LinkPredictionEncoder(**kwargs).fit(g)
        assert np.array_equal(a.embedding_, b.embedding_)

    @pytest.mark.filterwarnings("ignore::RuntimeWarning")
    def test_divergence_aborts(self):
        # a step size past float range overflows the forward pass to inf
        g = random_graph(15, 0.4, seed=12)
        with pytest.raises(TrainingDivergedError):
            LinkPredictionEncoder(embedding_dim=8, hidden_dim=8,
                                  head_hidden_dim=4, rounds=1,
                                  epochs_first=20, learning_rate=1e160,
                                  seed=13).fit(g)

    def test_edgeless_graph_rejected(self):
        with pytest.raises(ValueError):
            LinkPredictionEncoder(seed=0).fit(dg.Graph.from_edges(5, []))

    def test_not_fitted_error(self):
        est = LinkPredictionEncoder()
        with pytest.raises(NotFittedError):
            est.transform()

    def test_get_params_round_trip(self):
        est = LinkPredictionEncoder(rounds=7, seed=42)
        clone = LinkPredictionEncoder(**est.get_params())
        assert clone.rounds == 7 and clone.seed == 42


class TestEvaluatePredictor:
    class _Perfect:
        def __init__(self, edge_set, n):
            self.edges, self.n = edge_set, n

        def pair_probability(self, zu, zv):
            out = []
            for a, b in zip(zu[:, 0].astype(int), zv[:, 0].astype(int)):
                lo, hi = min(a, b), max(a, b)
                out.append(0.9 if (lo, hi) in self.edges else 0.1)
            return np.asarray(out)

    @staticmethod
    def _id_embedding(n):
        return np.arange(n, dtype=np.float64)[:, None]

    def test_perfect_scores(self):
        g = random_graph(12, 0.3, seed=14)
        pred = self._Perfect(g.edge_set(), 12)
        scores = dg.evaluate_predictor(pred, self._id_embedding(12), g)
        assert scores["auc"] == pytest.approx(1.0)
        assert scores["ap"] == pytest.approx(1.0)

    def test_constant_predictor_is_half_auc(self):
        g = random_graph(40, 0.2, seed=15)
        pred = LinkPredictor(np.zeros((2, 1)), np.zeros(2), np.zeros(2), 0.0)
        scores = dg.evaluate_predictor(pred, self._id_embedding(40), g)
        assert scores["auc"] == pytest.approx(0.5, abs=1e-9)

    def test_reversed_scores_flip_auc(self):
        g = random_graph(20, 0.25, seed=16)
        emb = np.random.default_rng(17).normal(size=(20, 6))
        pred = LinkPredictor.initialize(6, 3, 0.01, np.random.default_rng(18))

        class Reversed:
            def pair_probability(self, zu, zv):
                return 1.0 - pred.pair_probability(zu, zv)

        auc = dg.evaluate_predictor(pred, emb, g)["auc"]
        rev = dg.evaluate_predictor(Reversed(), emb, g)["auc"]
        assert rev == pytest.approx(1.0 - auc, abs=1e-9)

    def test_sampled_negatives(self):
        g = random_graph(30, 0.2, seed=19)
        pred = self._Perfect(g.edge_set(), 30)
        scores = dg.evaluate_predictor(pred, self._id_embedding(30), g,
                                       sample_negatives=50, seed=20)
        assert scores["auc"] == pytest.approx(1.0)


class TestOracle:
    def test_matches_pointwise_prediction(self):
        rng = np.random.default_rng(21)
        emb = rng.normal(size=(10, 6))
        pred = LinkPredictor.initialize(6, 3, 0.01, rng)
        oracle = dg.oracle_from(pred, emb)
        for _ in range(10):
            i, j = rng.integers(0, 10, size=2)
            if i == j:
                continue
            assert oracle.prob(int(i), int(j)) == pytest.approx(
                dg.predict_link(pred, emb[i], emb[j]), abs=1e-12)

    def test_symmetric_matrix(self):
        rng = np.random.default_rng(22)
        emb = rng.normal(size=(12, 4))
        pred = LinkPredictor.initialize(4, 2, 0.01, rng)
        m = dg.oracle_from(pred, emb).matrix
        assert np.array_equal(m, m.T)

    def test_zero_parameter_predictor_is_constant_half(self):
        pred = LinkPredictor(np.zeros((3, 4)), np.zeros(3), np.zeros(3), 0.0)
        oracle = dg.oracle_from(pred, np.random.default_rng(23).normal(size=(6, 4)))
        off_diagonal = oracle.matrix[~np.eye(6, dtype=bool)]
        np.testing.assert_allclose(off_diagonal, 0.5)


class TestSerialization:
    def test_embeddings_tsv_round_trip(self, tmp_path):
        emb = np.random.default_rng(24).normal(size=(7, 5))
        path = tmp_path / "emb.tsv"
        write_embeddings_tsv(emb, path)
        np.testing.assert_array_equal(read_embeddings_tsv(path), emb)

    def test_encoder_json_round_trip(self):
        g = random_graph(10, 0.4, seed=25)
        est = LinkPredictionEncoder(embedding_dim=6, hidden_dim=5,
                                    head_hidden_dim=3, rounds=1,
                                    epochs_first=5, seed=26).fit(g)
        again = _Encoder.from_json(est.encoder_.to_json())
        abar = _row_normalized_adjacency(g)
        a, _ = est.encoder_.forward(None, None, abar)
        b, _ = again.forward(None, None, abar)
        np.testing.assert_array_equal(a, b)
