"""Command-line front end: every module as a subcommand plus the full pipeline.

Exit codes: 0 success, 2 configuration/usage error, 3 stage failure,
4 non-graphic input.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Optional

import numpy as np

from . import __version__
from ._util import derive_seed
from .baselines import ba_graph, chung_lu, conf_model, er_graph
from .embedding import (LinkPredictionEncoder, LinkPredictor,
                        evaluate_predictor, oracle_from, read_embeddings_tsv,
                        write_embeddings_tsv)
from .gan import EmbeddingGan, load_generator, sample_embeddings
from .graph import (DegreeSequence, degree_sequence, edge_overlap,
                    identity_correspondence, largest_connected_component,
                    read_edge_list, write_edge_list)
from .metrics import (GLOBAL_METRICS, MMD_METRICS, PropertyReport,
                      property_report, report_distance)
from .realization import (NonGraphicSequenceError, assign_degree_sequence,
                          havel_hakimi, improved_hh,
                          initial_graph_from_predictor)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_STAGE = 3
EXIT_NON_GRAPHIC = 4


class ConfigError(ValueError):
    pass


def _sha256(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _json_digest(obj) -> str:
    return hashlib.sha256(json.dumps(obj, sort_keys=True).encode()).hexdigest()


class Manifest:
    """Stage ledger: config snapshot, per-stage digests and durations.

    A stage is skipped on rerun when its recorded config digest and input
    digests match and all recorded outputs still exist with their digests.
    """

    def __init__(self, path: Path, config: dict):
        self.path = path
        self.doc = {"version": __version__, "config": config, "stages": {}}
        if path.exists():
            try:
                previous = json.loads(path.read_text())
                if previous.get("config") == config:
                    self.doc = previous
            except json.JSONDecodeError:
                pass

    def save(self) -> None:
        self.path.write_text(json.dumps(self.doc, indent=2, sort_keys=True) + "\n")

    def run_stage(self, name: str, inputs: list[Path], outputs: list[Path],
                  stage_config: dict, fn) -> None:
        entry = self.doc["stages"].get(name)
        in_digests = {str(p): _sha256(p) for p in inputs}
        cfg_digest = _json_digest(stage_config)
        if (entry and entry.get("status") == "done"
                and entry.get("config_digest") == cfg_digest
                and entry.get("inputs") == in_digests
                and all(Path(p).exists() for p in entry.get("outputs", {}))
                and all(_sha256(Path(p)) == d
                        for p, d in entry.get("outputs", {}).items())):
            print(f"[{name}] up to date, skipping", file=sys.stderr)
            return
        started = time.time()
        try:
            fn()
        except Exception:
            self.doc["stages"][name] = {"status": "failed",
                                        "config_digest": cfg_digest,
                                        "inputs": in_digests}
            self.save()
            raise
        self.doc["stages"][name] = {
            "status": "done",
            "config_digest": cfg_digest,
            "inputs": in_digests,
            "outputs": {str(p): _sha256(p) for p in outputs},
            "duration_s": round(time.time() - started, 3),
        }
        self.save()


def _read_labels_tsv(path) -> np.ndarray:
    rows = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            a, b = line.split()
            rows.append((int(a), int(b)))
    rows.sort()
    return np.asarray([b for _, b in rows], dtype=np.int64)


def _write_labels_tsv(labels, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for i, lab in enumerate(labels):
            fh.write(f"{i}\t{int(lab)}\n")


def _read_degrees(path) -> DegreeSequence:
    values = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.split("#")[0]
            values.extend(int(tok) for tok in line.split())
    return DegreeSequence.from_values(values)


def _write_correspondence(corr, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for new_id, orig in enumerate(corr):
            fh.write(f"{new_id}\t{int(orig)}\n")


def _read_correspondence(path) -> np.ndarray:
    pairs = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            a, b = line.split()
            pairs.append((int(a), int(b)))
    pairs.sort()
    return np.asarray([b for _, b in pairs], dtype=np.int64)


DEFAULT_CONFIG = {
    "embedding": {"embedding_dim": 128, "hidden_dim": 128,
                  "head_hidden_dim": 64, "leak": 0.01, "learning_rate": 1e-3,
                  "cycles": 1, "rounds": 20, "epochs_first": 5000,
                  "epochs_later": 5000, "negatives_per_round": 2000},
    "gan": {"latent_dim": 16, "penalty_weight": 10.0, "critic_steps": 5,
            "batch_size": 64, "steps": 3000, "learning_rate": 1e-4,
            "beta1": 0.5, "beta2": 0.9, "diag_every": 100},
    "realization": {"trace": False},
}

SMOKE_CONFIG = {
    "embedding": {"embedding_dim": 32, "hidden_dim": 32, "head_hidden_dim": 16,
                  "leak": 0.01, "learning_rate": 1e-3, "cycles": 1,
                  "rounds": 4, "epochs_first": 400, "epochs_later": 200,
                  "negatives_per_round": 500},
    "gan": {"latent_dim": 16, "penalty_weight": 10.0, "critic_steps": 5,
            "batch_size": 64, "steps": 300, "learning_rate": 1e-4,
            "beta1": 0.5, "beta2": 0.9, "diag_every": 100},
    "realization": {"trace": False},
}


def _merge_config(base: dict, override: dict) -> dict:
    merged = json.loads(json.dumps(base))
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = _merge_config(merged[key], value)
        else:
            merged[key] = value
    return merged


def _load_config(args) -> dict:
    config = SMOKE_CONFIG if getattr(args, "smoke", False) else DEFAULT_CONFIG
    config = json.loads(json.dumps(config))
    if args.config:
        path = Path(args.config)
        if not path.exists():
            raise ConfigError(f"config file not found: {path}")
        try:
            config = _merge_config(config, json.loads(path.read_text()))
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from exc
    for key in ("graph", "features", "labels"):
        value = config.get(key)
        if value and not Path(value).exists():
            raise ConfigError(f"configured {key} path not found: {value}")
    return config


def _emit_report(report: PropertyReport, fmt: str, output: Optional[str]) -> None:
    text = report.to_json() + "\n" if fmt == "json" else report.to_table()
    if output:
        Path(output).write_text(text)
    else:
        print(text, end="")


# ---------------------------------------------------------------------------
# subcommands


def cmd_ingest(args) -> int:
    g = read_edge_list(args.input)
    if args.lcc:
        g = largest_connected_component(g)
    write_edge_list(g, args.output)
    print(f"wrote {g.node_count} nodes, {g.edge_count} edges to {args.output}")
    return EXIT_OK


def cmd_metrics(args) -> int:
    reference = read_edge_list(args.reference) if args.reference else None
    reports = []
    for path in args.graphs:
        g = read_edge_list(path)
        reports.append(property_report(g, reference, graph_id=str(path),
                                       reference_id=args.reference,
                                       seed=args.seed))
    if len(reports) == 1:
        _emit_report(reports[0], args.format, args.output)
        return EXIT_OK
    # several graphs: aggregate mean(sd) per metric
    names = [n for n in (*GLOBAL_METRICS, *MMD_METRICS)
             if n in reports[0].metrics]
    agg = {}
    for name in names:
        vals = np.asarray([r.metrics[name] for r in reports], dtype=np.float64)
        finite = vals[np.isfinite(vals)]
        agg[name] = {"mean": float(finite.mean()) if len(finite) else float("nan"),
                     "sd": float(finite.std(ddof=0)) if len(finite) else float("nan"),
                     "count": int(len(finite))}
    if args.format == "json":
        text = json.dumps(agg, indent=2, sort_keys=True) + "\n"
    else:
        width = max(len(n) for n in names) + 2
        lines = [f"{'metric'.ljust(width)}{'mean':>14}{'sd':>14}{'n':>6}"]
        for name in names:
            e = agg[name]
            lines.append(f"{name.ljust(width)}{e['mean']:>14.6g}{e['sd']:>14.6g}"
                         f"{e['count']:>6d}")
        text = "\n".join(lines) + "\n"
    if args.output:
        Path(args.output).write_text(text)
    else:
        print(text, end="")
    return EXIT_OK


def cmd_compare(args) -> int:
    original = read_edge_list(args.original)
    generated = read_edge_list(args.generated)
    if args.correspondence:
        corr = _read_correspondence(args.correspondence)
    elif original.node_count == generated.node_count:
        corr = identity_correspondence(original.node_count)
    else:
        print("error: node sets differ; --correspondence is required",
              file=sys.stderr)
        return EXIT_CONFIG
    rep_orig = property_report(original, graph_id=str(args.original))
    rep_gen = property_report(generated, original, graph_id=str(args.generated),
                              reference_id=str(args.original))
    overlap = edge_overlap(generated, original, corr)
    doc = {"edge_overlap": overlap,
           "original": json.loads(rep_orig.to_json()),
           "generated": json.loads(rep_gen.to_json())}
    if args.format == "json":
        text = json.dumps(doc, indent=2, sort_keys=True) + "\n"
    else:
        width = max(len(n) for n in GLOBAL_METRICS) + 2
        lines = [f"edge overlap: {overlap:.6g}",
                 f"{'metric'.ljust(width)}{'original':>14}{'generated':>14}"]
        for name in GLOBAL_METRICS:
            a = rep_orig.metrics.get(name, float('nan'))
            b = rep_gen.metrics.get(name, float('nan'))
            lines.append(f"{name.ljust(width)}{a:>14.6g}{b:>14.6g}")
        for name in MMD_METRICS:
            if name in rep_gen.metrics:
                lines.append(f"{name.ljust(width)}{'':>14}"
                             f"{rep_gen.metrics[name]:>14.6g}")
        text = "\n".join(lines) + "\n"
    if args.output:
        Path(args.output).write_text(text)
    else:
        print(text, end="")
    return EXIT_OK


def _degrees_from_args(args) -> DegreeSequence:
    if args.degrees:
        return _read_degrees(args.degrees)
    if not args.graph:
        raise ConfigError("either --degrees or --graph is required")
    return degree_sequence(read_edge_list(args.graph))


def _required_workdir(args) -> Path:
    if not args.workdir:
        raise ConfigError("--workdir is required")
    path = Path(args.workdir)
    path.mkdir(parents=True, exist_ok=True)
    return path


def cmd_hh(args) -> int:
    s = _degrees_from_args(args)
    result = havel_hakimi(s, trace=bool(args.trace))
    write_edge_list(result.graph, args.output)
    if args.trace:
        Path(args.trace).write_text(result.trace.to_text())
    print(f"realized {result.graph.node_count} nodes, "
          f"{result.graph.edge_count} edges")
    return EXIT_OK


def cmd_improved_hh(args) -> int:
    s = _degrees_from_args(args)
    emb = read_embeddings_tsv(args.embeddings)
    predictor = LinkPredictor.from_json(Path(args.predictor).read_text())
    if len(emb) != len(s):
        print(f"error: {len(emb)} embeddings vs {len(s)} degrees",
              file=sys.stderr)
        return EXIT_CONFIG
    oracle = oracle_from(predictor, emb)
    result = improved_hh(s, oracle, trace=bool(args.trace))
    write_edge_list(result.graph, args.output)
    if args.trace:
        Path(args.trace).write_text(result.trace.to_text())
    print(f"realized {result.graph.edge_count} edges, "
          f"stub deficit {result.stub_deficit}, "
          f"skipped hubs {len(result.skipped_hubs)}")
    return EXIT_OK


def cmd_baseline(args) -> int:
    seeds = [derive_seed(args.seed, t) for t in range(args.repeat)] \
        if args.repeat > 1 else [args.seed]
    outputs = []
    for t, seed in enumerate(seeds):
        if args.model == "er":
            g = er_graph(args.nodes, args.p, seed)
        elif args.model == "ba":
            g = ba_graph(args.nodes, args.m, seed)
        elif args.model == "chung-lu":
            g = chung_lu(_degrees_from_args(args), seed)
        else:  # conf
            g0 = read_edge_list(args.graph)
            g = conf_model(g0, args.overlap, max_retries=args.max_retries,
                           seed=seed)
        if len(seeds) == 1:
            path = Path(args.output)
        else:
            path = Path(args.output)
            path.mkdir(parents=True, exist_ok=True)
            path = path / f"trial_{t:04d}.edges"
        write_edge_list(g, path)
        outputs.append(str(path))
    print("\n".join(outputs))
    return EXIT_OK


def _embedding_estimator(config: dict, seed: int) -> LinkPredictionEncoder:
    return LinkPredictionEncoder(seed=seed, **config["embedding"])


def cmd_train_embed(args) -> int:
    config = _load_config(args)
    workdir = _required_workdir(args)
    g = largest_connected_component(read_edge_list(args.graph))
    features = read_embeddings_tsv(args.features) if args.features else None
    est = _embedding_estimator(config, args.seed).fit(g, features=features)
    write_embeddings_tsv(est.embedding_, workdir / "embeddings.tsv")
    (workdir / "predictor.json").write_text(est.predictor_.to_json())
    (workdir / "encoder.json").write_text(est.encoder_.to_json())
    if args.evaluate:
        scores = evaluate_predictor(est.predictor_, est.embedding_, g,
                                    sample_negatives=(None if g.node_count <= 3000
                                                      else 200000),
                                    seed=args.seed)
        (workdir / "predictor_eval.json").write_text(
            json.dumps(scores, indent=2, sort_keys=True) + "\n")
        print(f"AUC {scores['auc']:.4f}  AP {scores['ap']:.4f}")
    print(f"embeddings and predictor written to {workdir}")
    return EXIT_OK


def cmd_train_gan(args) -> int:
    config = _load_config(args)
    workdir = _required_workdir(args)
    emb = read_embeddings_tsv(args.embeddings)
    labels = _read_labels_tsv(args.labels) if args.labels else None
    gan = EmbeddingGan(seed=args.seed, **config["gan"]).fit(emb, labels=labels)
    (workdir / "generator.json").write_text(gan.generator_json())
    (workdir / "critic.json").write_text(gan.critic_json())
    (workdir / "gan_training.csv").write_text(gan.diagnostics_csv())
    generated, _ = gan.sample(len(emb), seed=derive_seed(args.seed, 99))
    (workdir / "gan_distance_cdf.csv").write_text(gan.distance_cdf_csv(generated))
    print(f"generator written to {workdir}")
    return EXIT_OK


def cmd_sample(args) -> int:
    generator, classes, _ = load_generator(Path(args.generator).read_text())
    emb, labels = sample_embeddings(generator, args.count, args.seed, classes)
    write_embeddings_tsv(emb, args.output)
    if labels is not None:
        _write_labels_tsv(labels, str(args.output) + ".labels")
    print(f"sampled {args.count} embeddings to {args.output}")
    return EXIT_OK


def _run_generate_once(config: dict, workdir: Path, seed: int) -> dict:
    workdir.mkdir(parents=True, exist_ok=True)
    manifest = Manifest(workdir / "manifest.json",
                        _merge_config(config, {"seed": seed}))

    graph_path = Path(config["graph"])
    input_path = workdir / "input.edges"

    def stage_ingest():
        g = largest_connected_component(read_edge_list(graph_path))
        write_edge_list(g, input_path)

    manifest.run_stage("ingest", [graph_path], [input_path], {}, stage_ingest)

    emb_path = workdir / "embeddings.tsv"
    pred_path = workdir / "predictor.json"
    enc_path = workdir / "encoder.json"

    def stage_embed():
        g = read_edge_list(input_path)
        features = None
        if config.get("features"):
            features = read_embeddings_tsv(config["features"])
        est = _embedding_estimator(config, derive_seed(seed, 1)).fit(
            g, features=features)
        write_embeddings_tsv(est.embedding_, emb_path)
        pred_path.write_text(est.predictor_.to_json())
        enc_path.write_text(est.encoder_.to_json())

    manifest.run_stage("train-embed", [input_path],
                       [emb_path, pred_path, enc_path],
                       config["embedding"], stage_embed)

    gen_path = workdir / "generator.json"
    diag_path = workdir / "gan_training.csv"

    def stage_gan():
        emb = read_embeddings_tsv(emb_path)
        labels = None
        if config.get("labels"):
            labels = _read_labels_tsv(config["labels"])
        gan = EmbeddingGan(seed=derive_seed(seed, 2), **config["gan"]).fit(
            emb, labels=labels)
        gen_path.write_text(gan.generator_json())
        diag_path.write_text(gan.diagnostics_csv())

    manifest.run_stage("train-gan", [emb_path], [gen_path, diag_path],
                       config["gan"], stage_gan)

    sampled_path = workdir / "sampled_embeddings.tsv"

    def stage_sample():
        g = read_edge_list(input_path)
        generator, classes, _ = load_generator(gen_path.read_text())
        emb, labels = sample_embeddings(generator, g.node_count,
                                        derive_seed(seed, 3), classes)
        write_embeddings_tsv(emb, sampled_path)
        if labels is not None:
            _write_labels_tsv(labels, workdir / "sampled_labels.tsv")

    manifest.run_stage("sample", [input_path, gen_path], [sampled_path], {},
                       stage_sample)

    doppel_path = workdir / "doppelganger.edges"
    corr_path = workdir / "correspondence.tsv"
    initial_path = workdir / "initial.edges"
    realize_outputs = [doppel_path, corr_path, initial_path]
    trace_path = workdir / "trace.txt"
    if config["realization"].get("trace"):
        realize_outputs.append(trace_path)

    def stage_realize():
        g = read_edge_list(input_path)
        emb = read_embeddings_tsv(sampled_path)
        predictor = LinkPredictor.from_json(pred_path.read_text())
        initial = initial_graph_from_predictor(emb, predictor, g.edge_count)
        write_edge_list(initial, initial_path)
        targets, corr = assign_degree_sequence(initial, degree_sequence(g))
        oracle = oracle_from(predictor, emb)
        result = improved_hh(targets, oracle,
                             trace=bool(config["realization"].get("trace")))
        write_edge_list(result.graph, doppel_path)
        _write_correspondence(corr, corr_path)
        if config["realization"].get("trace"):
            trace_path.write_text(result.trace.to_text())
        (workdir / "realization.json").write_text(json.dumps(
            {"stub_deficit": result.stub_deficit,
             "skipped_hubs": list(result.skipped_hubs)}, sort_keys=True) + "\n")

    manifest.run_stage("realize", [input_path, sampled_path, pred_path],
                       realize_outputs + [workdir / "realization.json"],
                       config["realization"], stage_realize)

    report_path = workdir / "report.json"
    compare_path = workdir / "comparison.json"

    def stage_report():
        g = read_edge_list(input_path)
        d = read_edge_list(doppel_path)
        corr = _read_correspondence(corr_path)
        report = property_report(d, g, graph_id="doppelganger",
                                 reference_id=str(graph_path), seed=seed)
        report_path.write_text(report.to_json() + "\n")
        ref_report = property_report(g, graph_id=str(graph_path))
        doc = {"edge_overlap": edge_overlap(d, g, corr),
               "distance": report_distance(report, ref_report),
               "reference": json.loads(ref_report.to_json()),
               "doppelganger": json.loads(report.to_json())}
        compare_path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")

    manifest.run_stage("report", [input_path, doppel_path, corr_path],
                       [report_path, compare_path], {}, stage_report)
    return json.loads(compare_path.read_text())


def cmd_generate(args) -> int:
    config = _load_config(args)
    if args.graph:
        config["graph"] = args.graph
    if args.features:
        config["features"] = args.features
    if args.labels:
        config["labels"] = args.labels
    if not config.get("graph"):
        raise ConfigError("an input graph is required (--graph or config)")
    if not Path(config["graph"]).exists():
        raise ConfigError(f"graph file not found: {config['graph']}")
    workdir = Path(args.workdir or config.get("workdir") or "doppelgraph-run")

    if args.repeat > 1:
        trials = [(t, derive_seed(args.seed, t), workdir / f"trial_{t:04d}")
                  for t in range(args.repeat)]
        if args.workers > 1:
            with ProcessPoolExecutor(max_workers=args.workers) as pool:
                docs = list(pool.map(_run_generate_once,
                                     [config] * len(trials),
                                     [d for _, _, d in trials],
                                     [s for _, s, _ in trials]))
        else:
            docs = [_run_generate_once(config, d, s) for _, s, d in trials]
        ranking = [{"trial": t, "workdir": str(d), "seed": s,
                    "edge_overlap": doc["edge_overlap"],
                    "distance": doc["distance"]}
                   for (t, s, d), doc in zip(trials, docs)]
        ranking.sort(key=lambda r: r["distance"])
        (workdir / "ranking.json").write_text(
            json.dumps(ranking, indent=2, sort_keys=True) + "\n")
        best = ranking[0]
        print(f"best trial {best['trial']} (distance {best['distance']:.4g}, "
              f"overlap {best['edge_overlap']:.4g}); ranking in "
              f"{workdir / 'ranking.json'}")
    else:
        doc = _run_generate_once(config, workdir, args.seed)
        print(f"doppelganger written to {workdir}; edge overlap "
              f"{doc['edge_overlap']:.4g}, report distance {doc['distance']:.4g}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="doppelgraph",
        description="Generate degree-preserving look-alike graphs and "
                    "measure how close they come.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, output_default=None):
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--config", help="JSON config file")
        p.add_argument("--workdir", help="directory for stage artifacts")
        p.add_argument("--repeat", type=int, default=1, metavar="N",
                       help="independent seeded trials")
        p.add_argument("--workers", type=int, default=1, metavar="W",
                       help="worker processes for --repeat sweeps")
        p.add_argument("--format", choices=("json", "table"), default="table")
        if output_default is not None:
            p.add_argument("--output", default=output_default)

    p = sub.add_parser("ingest", help="canonicalize an edge list")
    p.add_argument("input")
    p.add_argument("--output", required=True)
    p.add_argument("--lcc", action="store_true",
                   help="keep only the largest connected component")
    p.set_defaults(fn=cmd_ingest)

    p = sub.add_parser("metrics", help="property report for graph file(s)")
    p.add_argument("graphs", nargs="+")
    p.add_argument("--reference", help="graph for distribution MMDs")
    common(p, output_default=None)
    p.add_argument("--output")
    p.set_defaults(fn=cmd_metrics)

    p = sub.add_parser("compare", help="side-by-side reports plus edge overlap")
    p.add_argument("original")
    p.add_argument("generated")
    p.add_argument("--correspondence", help="TSV new_id -> original_id")
    common(p)
    p.add_argument("--output")
    p.set_defaults(fn=cmd_compare)

    p = sub.add_parser("hh", help="classic greedy realization")
    p.add_argument("--degrees", help="text file of integers")
    p.add_argument("--graph", help="use this graph's degree sequence")
    p.add_argument("--output", required=True)
    p.add_argument("--trace", help="write per-iteration trace here")
    common(p)
    p.set_defaults(fn=cmd_hh)

    p = sub.add_parser("improved-hh", help="probability-guided realization")
    p.add_argument("--degrees")
    p.add_argument("--graph")
    p.add_argument("--embeddings", required=True)
    p.add_argument("--predictor", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--trace")
    common(p)
    p.set_defaults(fn=cmd_improved_hh)

    p = sub.add_parser("baseline", help="classical random-graph generators")
    p.add_argument("model", choices=("er", "ba", "chung-lu", "conf"))
    p.add_argument("--nodes", type=int)
    p.add_argument("--p", type=float, help="edge probability (er)")
    p.add_argument("--m", type=int, help="edges per arrival (ba)")
    p.add_argument("--graph", help="source graph (chung-lu degrees, conf)")
    p.add_argument("--degrees", help="degree file (chung-lu)")
    p.add_argument("--overlap", type=float, default=0.424,
                   help="kept-edge fraction (conf)")
    p.add_argument("--max-retries", type=int, default=10000)
    p.add_argument("--output", required=True,
                   help="edge-list path, or directory with --repeat")
    common(p)
    p.set_defaults(fn=cmd_baseline)

    p = sub.add_parser("train-embed", help="learn embeddings + link predictor")
    p.add_argument("--graph", required=True)
    p.add_argument("--features", help="TSV node features")
    p.add_argument("--evaluate", action="store_true",
                   help="also report link-prediction AUC/AP")
    p.add_argument("--smoke", action="store_true", help="reduced-effort preset")
    common(p)
    p.set_defaults(fn=cmd_train_embed)

    p = sub.add_parser("train-gan", help="learn the embedding distribution")
    p.add_argument("--embeddings", required=True)
    p.add_argument("--labels", help="TSV node labels to model jointly")
    p.add_argument("--smoke", action="store_true")
    common(p)
    p.set_defaults(fn=cmd_train_gan)

    p = sub.add_parser("sample", help="draw embeddings from a generator")
    p.add_argument("--generator", required=True)
    p.add_argument("--count", type=int, required=True)
    p.add_argument("--output", required=True)
    common(p)
    p.set_defaults(fn=cmd_sample)

    p = sub.add_parser("generate", help="full input-to-doppelganger pipeline")
    p.add_argument("--graph")
    p.add_argument("--features")
    p.add_argument("--labels")
    p.add_argument("--smoke", action="store_true")
    common(p)
    p.set_defaults(fn=cmd_generate)

    return parser


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NonGraphicSequenceError as exc:
        print(f"non-graphic input: {exc}", file=sys.stderr)
        return EXIT_NON_GRAPHIC
    except Exception as exc:
        print(f"stage failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_STAGE


if __name__ == "__main__":
    sys.exit(main())
