"""Command-line driver: ingest, train, extract, mine, bench, synth, pipeline.

Logs go to stderr; data only ever goes to files under the output
directory.  Every run writes a MANIFEST.json with the resolved config
hash, seed, versions, and stage timings; two runs with equal hashes
produce equal rule outputs.  Exit codes: 0 ok, 1 internal error, 2 bad
input or config.
"""

from __future__ import annotations

import argparse
import json
import logging
import platform
import sys
import time
from pathlib import Path

import numpy as np

import semrules
from semrules.autoencoder import ModelError, load_model, save_model, train
from semrules.baselines import BaselineError, fp_growth, hho_mine
from semrules.benchmark import (
    SynthesisError,
    dataset_to_csv,
    generate,
    graph_to_json,
    run_quality_comparison,
    run_runtime_scaling,
    run_threshold_sweep,
    schema_to_json,
    synth_schema,
    _aggregate_rules,
)
from semrules.config import ConfigError, RunConfig, build_run_config, config_hash, config_to_dict, load_config
from semrules.extraction import ExtractionError, attach_metrics, extract_rules
from semrules.graph import GraphError, load_binding, load_graph, load_schema, validate_graph
from semrules.ingest import IngestError, load_kinds, parse_timeseries
from semrules.pipeline import build_transactions
from semrules.rules import UndefinedMetric, rules_to_jsonl
from semrules.transactions import TransactionError

log = logging.getLogger("semrules")

USER_ERRORS = (
    ConfigError,
    GraphError,
    IngestError,
    TransactionError,
    ExtractionError,
    BaselineError,
    SynthesisError,
    ModelError,
    UndefinedMetric,
    FileNotFoundError,
)


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        stream=sys.stderr,
        level=logging.DEBUG if getattr(args, "verbose", False) else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
        force=True,
    )
    try:
        return args.handler(args)
    except USER_ERRORS as exc:
        log.error("%s", exc)
        return 2
    except Exception:  # noqa: BLE001 - last-resort boundary
        log.exception("internal error")
        return 1


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="semrules", description=__doc__)
    parser.add_argument("--version", action="version", version=f"semrules {semrules.__version__}")

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="TOML config file; CLI flags override its values")
    common.add_argument("--seed", type=int, default=None, help="global seed override")
    common.add_argument("--output-dir", default=None, help="artifact directory (default: out)")
    common.add_argument("--bins", type=int, default=None, help="equal-frequency bin count per source")
    common.add_argument("--neighbor-depth", type=int, default=None, help="graph context hops per source")
    common.add_argument("--threshold", type=float, default=None, help="similarity threshold override")
    common.add_argument("--max-antecedents", type=int, default=None)
    common.add_argument("--threads", type=int, default=1, help="worker cap (mining runs single-threaded for reproducibility)")
    common.add_argument("--timeout-secs", type=float, default=None, help="bench: mark slower runs as censored")
    common.add_argument("--verbose", action="store_true")

    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("synth", parents=[common], help="write a synthetic dataset (CSV + graph/schema/binding JSON)")
    sp.set_defaults(handler=cmd_synth)

    sp = sub.add_parser("ingest", parents=[common], help="discretize, enrich, and dump one-hot transactions")
    sp.set_defaults(handler=cmd_ingest)

    sp = sub.add_parser("train", parents=[common], help="train the autoencoder and save the model JSON")
    sp.set_defaults(handler=cmd_train)

    sp = sub.add_parser("extract", parents=[common], help="probe a trained model and write rules JSONL")
    sp.add_argument("--model", default=None, help="model JSON path (default: <output-dir>/model.json)")
    sp.set_defaults(handler=cmd_extract)

    sp = sub.add_parser("mine-fp", parents=[common], help="mine rules with FP-Growth")
    sp.add_argument("--min-support", type=float, default=None)
    sp.add_argument("--min-confidence", type=float, default=None)
    sp.set_defaults(handler=cmd_mine_fp)

    sp = sub.add_parser("mine-hho", parents=[common], help="mine rules with Harris-hawks search")
    sp.add_argument("--population", type=int, default=None)
    sp.add_argument("--iterations", type=int, default=None)
    sp.set_defaults(handler=cmd_mine_hho)

    sp = sub.add_parser("pipeline", parents=[common], help="end to end: ingest, train, extract, metrics")
    sp.set_defaults(handler=cmd_pipeline)

    sp = sub.add_parser("bench", parents=[common], help="run a benchmark experiment and write reports + figures")
    sp.add_argument("--experiment", choices=("runtime", "quality", "threshold"), default=None)
    sp.add_argument("--thresholds", type=float, nargs="+", default=None)
    sp.add_argument("--source-counts", type=int, nargs="+", default=None)
    sp.add_argument("--repetitions", type=int, default=None)
    sp.add_argument("--seeds", type=int, nargs="+", default=None)
    sp.add_argument("--no-figures", action="store_true", help="skip PNG rendering")
    sp.set_defaults(handler=cmd_bench)

    return parser


def _resolve_config(args) -> RunConfig:
    raw = load_config(args.config) if args.config else {}
    overrides = {
        "seed": args.seed,
        "output_dir": args.output_dir,
        "bins": args.bins,
        "neighbor_depth": args.neighbor_depth,
        "similarity_threshold": args.threshold,
        "max_antecedents": args.max_antecedents,
    }
    cfg = build_run_config(raw, overrides)
    if args.threads > 1:
        log.warning("--threads=%d requested; mining stays single-threaded for reproducibility", args.threads)
    return cfg


def _outdir(cfg: RunConfig) -> Path:
    path = Path(cfg.output_dir)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _write_manifest(
    outdir: Path,
    cfg: RunConfig,
    stages: list[tuple[str, float]],
    artifacts: list[str],
    failed_stage: str | None = None,
) -> None:
    manifest = {
        "config_hash": config_hash(cfg),
        "seed": cfg.seed,
        "versions": {
            "semrules": semrules.__version__,
            "python": platform.python_version(),
            "numpy": np.__version__,
        },
        "stages": [{"name": name, "seconds": seconds} for name, seconds in stages],
        "artifacts": sorted(artifacts),
        "failed_stage": failed_stage,
        "config": config_to_dict(cfg),
    }
    (outdir / "MANIFEST.json").write_text(json.dumps(manifest, indent=2, sort_keys=True, default=str))


class _Stages:
    """Stage runner: records timings and remembers which stage failed."""

    def __init__(self) -> None:
        self.timings: list[tuple[str, float]] = []
        self.failed: str | None = None

    def run(self, name: str, fn):
        self.failed = name
        start = time.perf_counter()
        result = fn()
        self.timings.append((name, time.perf_counter() - start))
        log.info("stage %-18s %.3fs", name, self.timings[-1][1])
        self.failed = None
        return result


def _load_inputs(cfg: RunConfig):
    """Dataset, graph, binding from either the synth spec or the data paths."""
    if cfg.synth is not None:
        return generate(cfg.synth) + ({},)
    paths = cfg.data
    kinds, per_source_bins = ({}, {})
    if paths.kinds:
        kinds, per_source_bins = load_kinds(paths.kinds)
    ts_path = Path(paths.timeseries)
    if not ts_path.exists():
        raise FileNotFoundError(f"no such file: {ts_path}")
    with open(ts_path, newline="") as fh:
        dataset = parse_timeseries(fh, kinds)
    graph = load_graph(paths.graph)
    if paths.schema:
        report = validate_graph(graph, load_schema(paths.schema))
        if not report.conforms:
            log.warning(
                "graph does not conform to schema: %d label / %d property violations",
                len(report.label_violations),
                len(report.property_violations),
            )
    binding = load_binding(paths.binding)
    return dataset, graph, binding, per_source_bins


def _build(cfg: RunConfig, stages: _Stages):
    dataset, graph, binding, per_source_bins = stages.run("load", lambda: _load_inputs(cfg))
    transactions, schemes, timings = stages.run(
        "build_transactions",
        lambda: build_transactions(
            dataset,
            graph,
            binding,
            bins=cfg.bins,
            bins_per_source=per_source_bins,
            neighbor_depth=cfg.neighbor_depth,
        ),
    )
    for name, seconds in timings:
        log.debug("  substage %-14s %.3fs", name, seconds)
    return dataset, graph, binding, transactions, schemes


# --- command handlers -------------------------------------------------------


def cmd_synth(args) -> int:
    cfg = _resolve_config(args)
    if cfg.synth is None:
        raise ConfigError("synth command needs a [synth] spec (or no [data] section)")
    outdir = _outdir(cfg)
    stages = _Stages()
    artifacts: list[str] = []
    dataset, graph, binding = stages.run("generate", lambda: generate(cfg.synth))

    dataset_to_csv(dataset, outdir / "timeseries.csv")
    (outdir / "graph.json").write_text(json.dumps(graph_to_json(graph), indent=2, sort_keys=True))
    (outdir / "schema.json").write_text(json.dumps(schema_to_json(synth_schema()), indent=2, sort_keys=True))
    (outdir / "binding.json").write_text(json.dumps(dict(sorted(binding.source_to_node.items())), indent=2))
    (outdir / "kinds.json").write_text(
        json.dumps({s: {"kind": "numerical"} for s in sorted(dataset.sources)}, indent=2)
    )
    artifacts += ["timeseries.csv", "graph.json", "schema.json", "binding.json", "kinds.json"]
    _write_manifest(outdir, cfg, stages.timings, artifacts)
    log.info("synthetic dataset written to %s", outdir)
    return 0


def cmd_ingest(args) -> int:
    cfg = _resolve_config(args)
    outdir = _outdir(cfg)
    stages = _Stages()
    try:
        _, _, _, transactions, _ = _build(cfg, stages)
        transactions.to_csv(outdir / "transactions.csv")
    except Exception:
        _write_manifest(outdir, cfg, stages.timings, [], failed_stage=stages.failed)
        raise
    _write_manifest(outdir, cfg, stages.timings, ["transactions.csv"])
    log.info("%d transactions, %d neurons -> %s", len(transactions), transactions.registry.width, outdir)
    return 0


def cmd_train(args) -> int:
    cfg = _resolve_config(args)
    outdir = _outdir(cfg)
    stages = _Stages()
    try:
        _, _, _, transactions, _ = _build(cfg, stages)
        model = stages.run("train", lambda: train(transactions, cfg.train))
        save_model(model, outdir / "model.json")
        transactions.to_csv(outdir / "transactions.csv")
    except Exception:
        _write_manifest(outdir, cfg, stages.timings, [], failed_stage=stages.failed)
        raise
    _write_manifest(outdir, cfg, stages.timings, ["model.json", "transactions.csv"])
    log.info("final epoch loss %.6f -> %s", model.loss_trace[-1], outdir / "model.json")
    return 0


def cmd_extract(args) -> int:
    cfg = _resolve_config(args)
    outdir = _outdir(cfg)
    stages = _Stages()
    try:
        _, _, _, transactions, _ = _build(cfg, stages)
        model_path = Path(args.model) if args.model else outdir / "model.json"
        model = stages.run("load_model", lambda: load_model(model_path, transactions.registry))
        rules = stages.run(
            "extract",
            lambda: attach_metrics(
                extract_rules(model, transactions, cfg.similarity_threshold, cfg.max_antecedents),
                transactions,
            ),
        )
        (outdir / "rules.jsonl").write_text(rules_to_jsonl(rules))
    except Exception:
        _write_manifest(outdir, cfg, stages.timings, [], failed_stage=stages.failed)
        raise
    _write_manifest(outdir, cfg, stages.timings, ["rules.jsonl"])
    log.info("%d rules -> %s", len(rules), outdir / "rules.jsonl")
    return 0


def _mine_common(args, miner_name: str) -> int:
    cfg = _resolve_config(args)
    outdir = _outdir(cfg)
    stages = _Stages()
    try:
        _, _, _, transactions, _ = _build(cfg, stages)
        if miner_name == "fp_growth":
            min_support = args.min_support if args.min_support is not None else cfg.fp_min_support
            min_confidence = args.min_confidence if args.min_confidence is not None else cfg.fp_min_confidence
            rules = stages.run("mine_fp", lambda: fp_growth(transactions, min_support, min_confidence))
            stats = {"algorithm": "fp_growth", "min_support": min_support, "min_confidence": min_confidence}
        else:
            population = args.population if args.population is not None else cfg.hho_population
            iterations = args.iterations if args.iterations is not None else cfg.hho_iterations
            run = stages.run("mine_hho", lambda: hho_mine(transactions, population, iterations, seed=cfg.seed))
            rules = run.rules
            stats = {
                "algorithm": "hho",
                "population": population,
                "iterations": run.iterations,
                "evaluations": run.evaluations,
                "wall_time_s": run.wall_time_s,
                "best_fitness": run.best_fitness,
            }
        (outdir / "rules.jsonl").write_text(rules_to_jsonl(rules))
        stats["rule_count"] = len(rules)
        (outdir / "mine_stats.json").write_text(json.dumps(stats, indent=2, sort_keys=True))
    except Exception:
        _write_manifest(outdir, cfg, stages.timings, [], failed_stage=stages.failed)
        raise
    _write_manifest(outdir, cfg, stages.timings, ["rules.jsonl", "mine_stats.json"])
    log.info("%d rules -> %s", len(rules), outdir / "rules.jsonl")
    return 0


def cmd_mine_fp(args) -> int:
    return _mine_common(args, "fp_growth")


def cmd_mine_hho(args) -> int:
    return _mine_common(args, "hho")


def cmd_pipeline(args) -> int:
    cfg = _resolve_config(args)
    outdir = _outdir(cfg)
    stages = _Stages()
    artifacts: list[str] = []
    try:
        _, _, _, transactions, _ = _build(cfg, stages)
        transactions.to_csv(outdir / "transactions.csv")
        artifacts.append("transactions.csv")
        model = stages.run("train", lambda: train(transactions, cfg.train))
        save_model(model, outdir / "model.json")
        artifacts.append("model.json")
        rules = stages.run(
            "extract",
            lambda: attach_metrics(
                extract_rules(model, transactions, cfg.similarity_threshold, cfg.max_antecedents),
                transactions,
            ),
        )
        (outdir / "rules.jsonl").write_text(rules_to_jsonl(rules))
        artifacts.append("rules.jsonl")
        summary = _aggregate_rules(rules)
        summary["final_epoch_loss"] = model.loss_trace[-1]
        (outdir / "metrics_summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True))
        artifacts.append("metrics_summary.json")
    except Exception:
        _write_manifest(outdir, cfg, stages.timings, artifacts, failed_stage=stages.failed)
        raise
    _write_manifest(outdir, cfg, stages.timings, artifacts)
    log.info("pipeline done: %d rules -> %s", len(rules), outdir)
    return 0


def cmd_bench(args) -> int:
    cfg = _resolve_config(args)
    if cfg.synth is None:
        raise ConfigError("bench runs on a [synth] spec; real-data benching is not supported")
    outdir = _outdir(cfg)
    bench = dict(cfg.bench)
    experiment = args.experiment or bench.get("experiment", "quality")
    stages = _Stages()
    artifacts: list[str] = []
    try:
        if experiment == "runtime":
            source_counts = args.source_counts or bench.get("source_counts") or [2, 4, cfg.synth.sources]
            repetitions = args.repetitions or bench.get("repetitions", 3)
            report = stages.run(
                "bench_runtime",
                lambda: run_runtime_scaling(
                    cfg.synth,
                    source_counts,
                    repetitions,
                    train_config=cfg.train,
                    similarity_threshold=bench.get("runtime_threshold", 0.5),
                    fp_min_supports=bench.get("fp_min_supports", [0.4, 0.3, 0.2]),
                    fp_min_confidence=cfg.fp_min_confidence,
                    neighbor_depth=cfg.neighbor_depth,
                    timeout_secs=args.timeout_secs,
                    seed=cfg.seed,
                ),
            )
        elif experiment == "quality":
            seeds = args.seeds or bench.get("seeds") or list(range(cfg.seed, cfg.seed + 10))
            report = stages.run(
                "bench_quality",
                lambda: run_quality_comparison(
                    cfg.synth,
                    seeds,
                    train_config=cfg.train,
                    similarity_threshold=cfg.similarity_threshold,
                    max_antecedents=cfg.max_antecedents,
                    fp_min_support=cfg.fp_min_support,
                    fp_min_confidence=cfg.fp_min_confidence,
                    neighbor_depth=cfg.neighbor_depth,
                ),
            )
        elif experiment == "threshold":
            thresholds = args.thresholds or bench.get("thresholds") or [0.9, 0.8, 0.7, 0.6, 0.5]
            report = stages.run(
                "bench_threshold",
                lambda: run_threshold_sweep(
                    cfg.synth,
                    thresholds,
                    train_config=cfg.train,
                    max_antecedents=cfg.max_antecedents,
                    neighbor_depth=cfg.neighbor_depth,
                    seed=cfg.seed,
                ),
            )
        else:
            raise ConfigError(f"unknown experiment {experiment!r}")

        base = f"report_{report.title}"
        report.to_csv(outdir / f"{base}.csv")
        report.to_json(outdir / f"{base}.json")
        artifacts += [f"{base}.csv", f"{base}.json"]
        if not args.no_figures:
            from semrules.plots import render_report_figures

            for path in stages.run("figures", lambda: render_report_figures(report, outdir)):
                artifacts.append(path.name)
    except Exception:
        _write_manifest(outdir, cfg, stages.timings, artifacts, failed_stage=stages.failed)
        raise
    _write_manifest(outdir, cfg, stages.timings, artifacts)
    log.info("bench %s done: %d rows -> %s", experiment, len(report.rows), outdir)
    return 0


if __name__ == "__main__":
    sys.exit(main())
