"""Acceptance suite: one test per exit criterion, each printing a verdict.

Run with ``pytest tests/test_acceptance.py -s`` to see the per-criterion
PASS lines.  Criteria that need the real datasets skip with instructions
when the data files are absent (see the README's data section); criterion 8
additionally requires DOPPELGRAPH_FULL_ACCEPTANCE=1 because the full
training schedule runs for tens of minutes.
"""

import math
import os
from itertools import combinations_with_replacement

import numpy as np
import pytest

import doppelgraph as dg
from doppelgraph import derive_seed
from doppelgraph.gan import distance_cdf_ks
from doppelgraph.realization import ConstantOracle

from conftest import (DATASETS, brute_squares, brute_triangles, brute_wedges,
                      dataset_graph, planted_partition, random_graph,
                      random_symmetric_oracle)
from test_embedding import finite_difference_worst_error, full_loss_gradients
from test_gan import critic_fixture, worst_rel_error


def _verdict(number: int, name: str, detail: str = "") -> None:
    suffix = f" — {detail}" if detail else ""
    print(f"\nACCEPTANCE {number} ({name}): PASS{suffix}")


# targets: metric -> (mean, sd, display scale); tolerance is
# 3 * max(sd, half display ulp), the half-ulp covering sds rounded to 0.00
TABLE_ER = {
    "edge_overlap": (4.03e-3, 0.73e-3, 1e-3),
    "clustering_coefficient": (1.53e-3, 0.16e-3, 1e-3),
    "characteristic_path_length": (3.89, 0.02, 1.0),
    "triangle_count": (86.4, 9.4, 10.0),
    "square_count": (0.0, 0.0, 1.0),
    "lcc_size": (2000.0, 0.0, 1e3),
    "powerlaw_exponent": (1.50, 0.0, 1.0),
    "wedge_count": (6.38e4, 0.14e4, 1e4),
    "relative_edge_distribution_entropy": (0.992, 0.0, 1e-1),
    "gini_coefficient": (0.196, 0.004, 1e-1),
}

TABLE_BA = {
    "edge_overlap": (1.81e-2, 0.14e-2, 1e-2),
    "clustering_coefficient": (7.38e-4, 0.73e-4, 1e-4),
    "characteristic_path_length": (3.41, 0.02, 1.0),
    "triangle_count": (689.0, 53.0, 100.0),
    "square_count": (34.4, 11.8, 10.0),
    "lcc_size": (2000.0, 0.0, 1e3),
    "powerlaw_exponent": (3.13, 0.12, 1.0),
    "wedge_count": (1.45e5, 0.06e5, 1e5),
    "relative_edge_distribution_entropy": (0.958, 0.001, 1e-1),
    "gini_coefficient": (0.364, 0.002, 1e-1),
}

GLOBAL_FOR_TABLE = [m for m in TABLE_ER if m != "edge_overlap"]


def _trial_metrics(g: dg.Graph) -> dict[str, float]:
    return {
        "clustering_coefficient": dg.global_clustering_coefficient(g),
        "characteristic_path_length": dg.characteristic_path_length(g),
        "triangle_count": dg.triangle_count(g),
        "square_count": dg.square_count(g),
        "lcc_size": dg.lcc_size(g),
        "powerlaw_exponent": dg.powerlaw_exponent(g),
        "wedge_count": dg.wedge_count(g),
        "relative_edge_distribution_entropy":
            dg.relative_edge_distribution_entropy(g),
        "gini_coefficient": dg.gini_coefficient(g),
    }


def _random_graph_statistics(make, base_seed: int, trials: int):
    sums = {m: 0.0 for m in (*GLOBAL_FOR_TABLE, "edge_overlap")}
    for t in range(trials):
        g = make(derive_seed(base_seed, 2 * t))
        partner = make(derive_seed(base_seed, 2 * t + 1))
        values = _trial_metrics(g)
        values["edge_overlap"] = dg.edge_overlap(
            g, partner, dg.identity_correspondence(g.node_count))
        for m, v in values.items():
            sums[m] += v
    return {m: v / trials for m, v in sums.items()}


def _assert_table_row(means, table, label):
    for metric, (target, sd, scale) in table.items():
        tolerance = 3.0 * max(sd, 0.005 * scale)
        assert abs(means[metric] - target) <= tolerance, (
            f"{label} {metric}: mean {means[metric]:.6g} vs "
            f"{target:.6g} ± {tolerance:.3g}")


def test_criterion_1_random_graph_tables():
    trials = 100
    er_means = _random_graph_statistics(
        lambda s: dg.er_graph(2000, 0.004, s), base_seed=101, trials=trials)
    _assert_table_row(er_means, TABLE_ER, "ER")
    ba_means = _random_graph_statistics(
        lambda s: dg.ba_graph(2000, 4, s), base_seed=202, trials=trials)
    _assert_table_row(ba_means, TABLE_BA, "BA")
    _verdict(1, "random-graph property tables",
             f"{trials} trials/model; ER overlap {er_means['edge_overlap']:.2e}, "
             f"BA overlap {ba_means['edge_overlap']:.2e}")


def _degree_metrics(g: dg.Graph) -> tuple:
    return (dg.wedge_count(g), dg.powerlaw_exponent(g),
            dg.relative_edge_distribution_entropy(g), dg.gini_coefficient(g))


def _random_graphic_source(t: int) -> dg.Graph:
    rng = np.random.default_rng(derive_seed(1234, t))
    n = int(rng.integers(5, 200))
    kind = t % 3
    if kind == 0:
        return dg.er_graph(n, float(rng.uniform(0.02, 0.3)),
                           derive_seed(1234, 1000 + t))
    if kind == 1:
        m = int(rng.integers(1, min(6, n)))
        return dg.ba_graph(n, m, derive_seed(1234, 2000 + t))
    base = dg.er_graph(n, 0.1, derive_seed(1234, 3000 + t))
    return dg.chung_lu(base.degrees(), derive_seed(1234, 4000 + t))


def _assert_degree_identity(realized: dg.Graph, source: dg.Graph):
    got = _degree_metrics(realized)
    want = _degree_metrics(source)
    assert got[0] == want[0]
    for a, b in zip(got[1:], want[1:]):
        if math.isinf(b):
            assert math.isinf(a)
        else:
            assert a == pytest.approx(b, rel=1e-12)
    assert dg.mmd(dg.degree_distribution(realized),
                  dg.degree_distribution(source)) <= 1e-12


def _identity_suite_sources():
    sources = [("random", _random_graphic_source(t)) for t in range(200)]
    for name in DATASETS:
        if DATASETS[name]["edges"].exists():
            sources.append((name, dataset_graph(name)))
    return sources


def test_criterion_2_degree_based_identity():
    sources = _identity_suite_sources()
    datasets_used = [n for n, _ in sources if n != "random"]
    zero_deficit = 0
    guided_runs = 0
    for idx, (_, g) in enumerate(sources):
        if g.edge_count == 0:
            continue
        s = dg.degree_sequence(g)
        classic = dg.havel_hakimi(s).graph
        _assert_degree_identity(classic, g)

        neutral = dg.improved_hh(s, ConstantOracle(0.5))
        assert neutral.stub_deficit == 0
        _assert_degree_identity(neutral.graph, g)

        guided = dg.improved_hh(s, random_symmetric_oracle(
            len(s), derive_seed(777, idx)))
        guided_runs += 1
        if guided.stub_deficit == 0:
            zero_deficit += 1
            _assert_degree_identity(guided.graph, g)
    # random oracles may strand a few stubs (the identity only holds with
    # no skips); the bulk of runs must realize fully
    assert zero_deficit / guided_runs >= 0.8
    _verdict(2, "degree-based metric identity",
             f"200 random sequences + datasets {datasets_used or 'none'}; "
             f"guided zero-deficit rate {zero_deficit / guided_runs:.2f}")


def test_criterion_3_gap_forces_clique():
    checked = 0
    for i in range(50):
        k = 3 + i % 6
        extra = 1 + (i // 6) % 4
        pad = i // 24
        seq = [k - 1 + extra] * k + [1] * (k * extra) + [0] * pad
        assert seq[k - 1] - seq[k] >= k - 1
        res = dg.havel_hakimi(seq)
        edges = res.graph.edge_set()
        for a in range(k):
            for b in range(a + 1, k):
                assert (a, b) in edges, f"missing clique edge in case {i}"
        checked += 1
    _verdict(3, "degree-gap clique law", f"{checked} constructed sequences")


def test_criterion_4_count_oracles():
    rng = np.random.default_rng(4242)
    for _ in range(200):
        n = int(rng.integers(4, 13))
        g = random_graph(n, float(rng.uniform(0.1, 0.9)),
                         seed=int(rng.integers(2**31)))
        assert dg.triangle_count(g) == brute_triangles(g)
        assert dg.square_count(g) == brute_squares(g)
        assert dg.wedge_count(g) == brute_wedges(g)
    detail = "200 graphs vs enumeration"
    if DATASETS["cora_ml"]["edges"].exists():
        cora = dataset_graph("cora_ml")
        assert cora.node_count == 2810 and cora.edge_count == 6783
        assert dg.triangle_count(cora) == 2810
        assert dg.square_count(cora) == 517
        detail += "; cora-ml 2810 triangles / 517 squares reproduced"
    else:
        detail += "; cora-ml leg skipped (dataset absent)"
    _verdict(4, "count oracles", detail)


def test_criterion_5_graphicality_cross_check():
    checked = 0
    for n in range(1, 9):
        for combo in combinations_with_replacement(range(n), n):
            seq = list(reversed(combo))
            expected = dg.is_graphic(seq)
            try:
                dg.havel_hakimi(seq)
                realized = True
            except dg.NonGraphicSequenceError:
                realized = False
            assert expected == realized, seq
            checked += 1
    rng = np.random.default_rng(555)
    for _ in range(1000):
        n = int(rng.integers(1, 51))
        seq = sorted(rng.integers(0, n, size=n).tolist(), reverse=True)
        expected = dg.is_graphic(seq)
        try:
            dg.havel_hakimi(seq)
            realized = True
        except dg.NonGraphicSequenceError:
            realized = False
        assert expected == realized, seq
        checked += 1
    _verdict(5, "graphicality test matches realization",
             f"{checked} sequences (exhaustive length<=8 plus random)")


def test_criterion_6_gradient_checks():
    g = random_graph(12, 0.4, seed=3)
    params, fn = full_loss_gradients(g)
    encoder_err = finite_difference_worst_error(params, fn)
    assert encoder_err <= 1e-4

    critic, gen, real, fake, xhat, z = critic_fixture()
    from doppelgraph.gan import (critic_loss_grads, critic_loss_value,
                                 generator_loss_grads)
    _, cgrads = critic_loss_grads(critic, real, fake, xhat, 10.0)
    critic_err = worst_rel_error(
        critic.params, cgrads,
        lambda: critic_loss_value(critic, real, fake, xhat, 10.0))
    assert critic_err <= 1e-4

    _, ggrads = generator_loss_grads(gen, critic, z)

    def gen_loss():
        fake2, _ = gen.forward(z)
        y, _ = critic.forward(fake2)
        return float(-y.mean())

    gen_err = worst_rel_error(gen.params, ggrads, gen_loss)
    assert gen_err <= 1e-4
    _verdict(6, "finite-difference gradient checks",
             f"worst tolerance-adjusted rel errors: encoder {encoder_err:.1e}, "
             f"critic {critic_err:.1e}, generator {gen_err:.1e} (<= 1e-4)")


@pytest.mark.skipif(not DATASETS["cora_ml"]["edges"].exists(),
                    reason="cora-ml dataset not present; see README data section")
def test_criterion_7_doppelganger_quality_smoke():
    cora = dataset_graph("cora_ml")
    full = os.environ.get("DOPPELGRAPH_FULL_ACCEPTANCE") == "1"
    overlaps = []
    triangles = []
    squares = []
    exact_matches = 0
    runs = 5
    for t in range(runs):
        if full:
            gen = dg.DoppelgangerGraphGenerator(seed=derive_seed(7000, t))
        else:
            gen = dg.DoppelgangerGraphGenerator.smoke(seed=derive_seed(7000, t))
        gen.fit(cora)
        sample = gen.sample()
        report, overlap = gen.evaluate(sample)
        overlaps.append(overlap)
        triangles.append(report.metrics["triangle_count"])
        squares.append(report.metrics["square_count"])
        if sample.stub_deficit == 0:
            _assert_degree_identity(sample.graph, cora)
            exact_matches += 1
    if full:
        assert 2500 <= np.mean(triangles) <= 3700
        assert 800 <= np.mean(squares) <= 5000
        assert np.mean(overlaps) <= 0.01
        assert exact_matches == runs
    else:
        assert np.mean(overlaps) <= 0.05
        assert exact_matches >= 1
    _verdict(7, "doppelganger quality",
             f"mode={'full' if full else 'smoke'}; mean overlap "
             f"{np.mean(overlaps):.4f}, triangles {np.mean(triangles):.0f}, "
             f"squares {np.mean(squares):.0f}")


@pytest.mark.skipif(not DATASETS["cora_ml"]["edges"].exists(),
                    reason="cora-ml dataset not present; see README data section")
@pytest.mark.skipif(os.environ.get("DOPPELGRAPH_FULL_ACCEPTANCE") != "1",
                    reason="full training schedule (tens of minutes); set "
                           "DOPPELGRAPH_FULL_ACCEPTANCE=1")
def test_criterion_8_link_predictor_floor():
    cora = dataset_graph("cora_ml")
    est = dg.LinkPredictionEncoder(seed=0).fit(cora)
    scores = dg.evaluate_predictor(est.predictor_, est.embedding_, cora)
    assert scores["auc"] >= 0.90
    _verdict(8, "link predictor floor",
             f"all-pair AUC {scores['auc']:.4f}, AP {scores['ap']:.4f}")


def test_criterion_9_gan_sanity():
    # point-mass convergence under the scale-floored kernel bandwidth
    point = np.tile(np.linspace(-1.0, 2.0, 8), (200, 1))
    gan = dg.EmbeddingGan(steps=4000, diag_every=1000, seed=3).fit(point)
    generated, _ = gan.sample(200, seed=9)
    point_mmd = dg.embedding_mmd(point, generated)
    assert point_mmd < 0.05

    # distance-CDF closeness on a learned embedding cloud
    g, _ = planted_partition([40, 40], 0.3, 0.03, seed=2)
    enc = dg.LinkPredictionEncoder(embedding_dim=16, hidden_dim=16,
                                   head_hidden_dim=8, rounds=3,
                                   epochs_first=300, epochs_later=150,
                                   negatives_per_round=200, seed=4).fit(g)
    gan2 = dg.EmbeddingGan(steps=3000, diag_every=500, seed=6).fit(enc.embedding_)
    gen_rows, _ = gan2.sample(len(enc.embedding_), seed=12)
    ks = distance_cdf_ks(enc.embedding_, gen_rows)
    assert ks <= 0.1

    detail = f"point-mass MMD {point_mmd:.4f}; embedding-cloud KS {ks:.4f}"
    if DATASETS["cora_ml"]["edges"].exists() \
            and os.environ.get("DOPPELGRAPH_FULL_ACCEPTANCE") == "1":
        cora = dataset_graph("cora_ml")
        est = dg.LinkPredictionEncoder(seed=0).fit(cora)
        gan3 = dg.EmbeddingGan(seed=1).fit(est.embedding_)
        rows, _ = gan3.sample(cora.node_count, seed=2)
        cora_ks = distance_cdf_ks(est.embedding_, rows)
        assert cora_ks <= 0.1
        detail += f"; cora KS {cora_ks:.4f}"
    else:
        detail += "; cora leg skipped"
    _verdict(9, "embedding GAN sanity", detail)


def test_criterion_10_stage_determinism(tmp_path):
    from doppelgraph import cli
    graph_path = tmp_path / "input.edges"
    dg.write_edge_list(dg.er_graph(30, 0.15, seed=50), graph_path)
    config = tmp_path / "tiny.json"
    config.write_text("""{
        "embedding": {"embedding_dim": 8, "hidden_dim": 8,
                      "head_hidden_dim": 4, "rounds": 2,
                      "epochs_first": 60, "epochs_later": 30,
                      "negatives_per_round": 20},
        "gan": {"steps": 60, "diag_every": 30}
    }""")
    digests = []
    for run in ("x", "y"):
        wd = tmp_path / run
        code = cli.main(["generate", "--graph", str(graph_path), "--smoke",
                         "--config", str(config), "--workdir", str(wd),
                         "--seed", "17"])
        assert code == 0
        stage_files = sorted(p.name for p in wd.iterdir()
                             if p.name != "manifest.json")
        digests.append({name: (wd / name).read_bytes() for name in stage_files})
    assert digests[0] == digests[1]
    _verdict(10, "stage determinism",
             f"{len(digests[0])} artifacts byte-identical across reruns")
