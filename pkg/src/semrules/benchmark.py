"""Synthetic data with planted rules and the experiment harness.

The generator stands in for real deployments: it emits a time series
whose equal-frequency discretization reproduces a planned level grid
exactly (values are exact ties per level), so planted rules hit their
target confidence and support.  The experiments reproduce trend shapes
(monotone timings, overlap floors) on this synthetic data rather than
anyone's absolute wall-clock numbers, and their report headers say so.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
import statistics
import time
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Sequence

import numpy as np

from semrules.autoencoder import TrainConfig, train
from semrules.baselines import fp_growth, hho_mine
from semrules.extraction import attach_metrics, extract_rules
from semrules.graph import Binding, PropertyGraph, Schema
from semrules.ingest import BinScheme, Record, TimeSeriesDataset, discretize, fit_schemes
from semrules.pipeline import build_transactions, subset_sources
from semrules.rules import Item, Rule, measurement, rule_overlap

REPORT_NOTE = (
    "Synthetic desk-scale benchmark: trend shapes and orderings are meaningful, "
    "absolute timings and metric values are not."
)


class SynthesisError(ValueError):
    """Raised for infeasible or conflicting synthetic specifications."""


@dataclass(frozen=True)
class PlantedRule:
    """A rule to embed: (source, level) antecedents implying one (source, level)."""

    antecedents: tuple[tuple[str, int], ...]
    consequent: tuple[str, int]
    confidence: float = 1.0
    support: float = 0.3


@dataclass(frozen=True)
class SynthSpec:
    sources: int = 6
    nodes: int = 10
    template: str = "chain"  # chain | star | grid
    transactions: int = 2000
    bins: int = 5
    planted: tuple[PlantedRule, ...] = ()
    noise_rate: float = 1.0  # probability a non-planted cell is drawn uniformly (else level 0)
    seed: int = 0


def source_ids(spec: SynthSpec) -> list[str]:
    return [f"s{i + 1}" for i in range(spec.sources)]


def _validate_spec(spec: SynthSpec) -> None:
    if spec.sources < 1 or spec.nodes < spec.sources:
        raise SynthesisError(f"need nodes >= sources >= 1, got {spec.nodes} nodes, {spec.sources} sources")
    if spec.bins < 2:
        raise SynthesisError(f"need at least 2 bins, got {spec.bins}")
    if spec.transactions < 1:
        raise SynthesisError("need at least one transaction")
    if not 0.0 <= spec.noise_rate <= 1.0:
        raise SynthesisError(f"noise rate must be in [0, 1], got {spec.noise_rate}")
    if spec.template not in ("chain", "star", "grid"):
        raise SynthesisError(f"unknown graph template {spec.template!r}")
    ids = set(source_ids(spec))
    used: set[str] = set()
    for rule in spec.planted:
        if not rule.antecedents:
            raise SynthesisError("planted rule needs at least one antecedent")
        if not 0.0 < rule.confidence <= 1.0:
            raise SynthesisError(f"planted confidence must be in (0, 1], got {rule.confidence}")
        if not 0.0 < rule.support <= rule.confidence:
            raise SynthesisError(
                f"planted support must be in (0, confidence], got {rule.support} vs {rule.confidence}"
            )
        if rule.support * spec.transactions < 10:
            raise SynthesisError("planted support times transaction count must be >= 10")
        cells = [*rule.antecedents, rule.consequent]
        rule_sources = [s for s, _ in cells]
        if len(set(rule_sources)) != len(rule_sources):
            raise SynthesisError("planted rule reuses a source")
        for source, level in cells:
            if source not in ids:
                raise SynthesisError(f"planted rule references unknown source {source!r}")
            if not 0 <= level < spec.bins:
                raise SynthesisError(f"planted level {level} outside [0, {spec.bins})")
        overlap = used & set(rule_sources)
        if overlap:
            raise SynthesisError(f"conflicting planted rules share source(s) {sorted(overlap)}")
        used |= set(rule_sources)


def _clean_level_counts(n: int, k: int, level: int, fixed_count: int) -> list[int]:
    """Per-level counts making ``level`` exactly one equal-frequency bin.

    Nearest-rank cuts fall at ranks ceil(j*n/k); the layout pins a cut
    on the level's lower boundary and guarantees one inside the level
    (or makes it the top bin), so the fitted bin for ``level`` contains
    no other level.  Other levels may merge among themselves, which is
    harmless.
    """
    ranks = [-(-j * n // k) for j in range(1, k)]
    r1 = ranks[0]
    if fixed_count < r1:
        raise SynthesisError(
            f"infeasible: planted level needs {fixed_count}/{n} rows, below one bin's share (~{r1})"
        )
    counts = [0] * k
    counts[level] = fixed_count
    if level == 0:
        below = 0
    elif level == k - 1:
        below = n - fixed_count
        if below > 0:
            anchors = [r for r in ranks if r <= below]
            if not anchors:
                raise SynthesisError(
                    f"infeasible: {below} rows below the top planted level cannot span a quantile rank"
                )
            anchor = anchors[-1]
            if level == 1:
                counts[0] = below
            else:
                counts[level - 1] = below - anchor + 1
                _spread(counts, 0, level - 1, anchor - 1)
    else:
        candidates = [m for m in range(1, level + 1) if ranks[m - 1] + fixed_count <= n]
        if not candidates:
            raise SynthesisError(
                f"infeasible: planted level {level} with {fixed_count}/{n} rows leaves no room below"
            )
        below = ranks[candidates[-1] - 1]
        _spread(counts, 0, level, below)
        if counts[level - 1] == 0:
            _spread(counts, 0, level, 0)
            counts[level - 1] = below
    above = n - below - fixed_count
    if level < k - 1:
        _spread(counts, level + 1, k, above)
    elif above:
        raise SynthesisError("internal: top-level layout left rows unassigned")  # pragma: no cover
    return counts


def _spread(counts: list[int], start: int, end: int, total: int) -> None:
    width = end - start
    if width <= 0:
        if total:
            raise SynthesisError("internal: no levels left to absorb remaining rows")
        return
    base, rem = divmod(total, width)
    for i in range(start, end):
        counts[i] = base + (1 if i - start < rem else 0)


def _assign_source_levels(
    n: int,
    k: int,
    level: int,
    fixed_rows: np.ndarray,
    rng: np.random.Generator,
) -> np.ndarray:
    counts = _clean_level_counts(n, k, level, len(fixed_rows))
    pool = np.repeat(
        np.array([lv for lv in range(k) if lv != level], dtype=np.int64),
        np.array([counts[lv] for lv in range(k) if lv != level], dtype=np.int64),
    )
    rng.shuffle(pool)
    out = np.empty(n, dtype=np.int64)
    out[fixed_rows] = level
    mask = np.ones(n, dtype=bool)
    mask[fixed_rows] = False
    out[mask] = pool
    return out


def generate(spec: SynthSpec) -> tuple[TimeSeriesDataset, PropertyGraph, Binding]:
    """Sample a dataset, graph, and binding realizing the spec.

    After the standard pipeline with ``spec.bins``, each planted rule's
    empirical confidence and support land within ±0.05 of target (exact
    at confidence 1.0 up to count rounding); this is re-verified here
    through the real discretization machinery.  Planted sources get
    level layouts constructed so their planted level survives
    equal-frequency binning as exactly one bin; non-planted cells are
    drawn independently.
    """
    _validate_spec(spec)
    rng = np.random.default_rng(spec.seed)
    n, k = spec.transactions, spec.bins
    sources = source_ids(spec)
    col_of = {s: j for j, s in enumerate(sources)}

    levels = np.zeros((n, spec.sources), dtype=np.int64)
    for j in range(spec.sources):
        if spec.noise_rate >= 1.0:
            levels[:, j] = rng.integers(0, k, n)
        else:
            uniform = rng.random(n) < spec.noise_rate
            draws = rng.integers(0, k, n)
            levels[uniform, j] = draws[uniform]

    for rule in spec.planted:
        n_x = round(n * rule.support / rule.confidence)
        n_xy = round(rule.confidence * n_x)
        active = rng.choice(n, size=n_x, replace=False)
        satisfied = active[:n_xy]
        for source, level in rule.antecedents:
            levels[:, col_of[source]] = _assign_source_levels(n, k, level, active, rng)
        cons_source, cons_level = rule.consequent
        levels[:, col_of[cons_source]] = _assign_source_levels(n, k, cons_level, satisfied, rng)

    records = tuple(
        Record(source=sources[j], timestamp=str(t), value=float(levels[t, j]))
        for t in range(n)
        for j in range(spec.sources)
    )
    dataset = TimeSeriesDataset(records=records, sources=frozenset(sources))
    graph = _make_graph(spec, rng)
    binding = Binding(source_to_node={s: f"n{i + 1}" for i, s in enumerate(sources)})
    _verify_planted(spec, dataset)
    return dataset, graph, binding


def _make_graph(spec: SynthSpec, rng: np.random.Generator) -> PropertyGraph:
    node_ids = [f"n{i + 1}" for i in range(spec.nodes)]
    pairs: list[tuple[str, str]] = []
    if spec.template == "chain":
        pairs = [(node_ids[i], node_ids[i + 1]) for i in range(spec.nodes - 1)]
    elif spec.template == "star":
        pairs = [(node_ids[0], node_ids[i]) for i in range(1, spec.nodes)]
    else:  # grid
        side = math.ceil(math.sqrt(spec.nodes))
        for i in range(spec.nodes):
            row, col = divmod(i, side)
            if col + 1 < side and i + 1 < spec.nodes:
                pairs.append((node_ids[i], node_ids[i + 1]))
            if i + side < spec.nodes:
                pairs.append((node_ids[i], node_ids[i + side]))

    edges = {f"e{i + 1}": pair for i, pair in enumerate(pairs)}
    labels: dict[str, frozenset[str]] = {}
    props: dict[str, dict[str, str | float]] = {}
    materials = ("steel", "pvc", "iron")
    for i, node in enumerate(node_ids):
        labels[node] = frozenset({"Pipe" if i % 2 == 0 else "Junction"})
        props[node] = {
            "length": float(round(rng.uniform(10.0, 200.0), 2)),
            "material": materials[int(rng.integers(0, len(materials)))],
        }
    for edge in edges:
        labels[edge] = frozenset({"connected_to"})
    return PropertyGraph(
        nodes=frozenset(node_ids),
        edges=frozenset(edges),
        edge_endpoints=edges,
        labels=labels,
        prop_values=props,
    )


def synth_schema() -> Schema:
    """Schema matching the synthetic graph templates."""
    return Schema(
        classes=frozenset({"Pipe", "Junction"}),
        relations=frozenset({"connected_to"}),
        properties=frozenset({"length", "material"}),
        relation_signature={"connected_to": ("Pipe", "Junction")},
        property_owner={
            "Pipe": frozenset({"length", "material"}),
            "Junction": frozenset({"length", "material"}),
        },
        property_kinds={"length": "numerical", "material": "categorical"},
    )


def _verify_planted(spec: SynthSpec, dataset: TimeSeriesDataset) -> None:
    if not spec.planted:
        return
    schemes = fit_schemes(dataset, bins=spec.bins)
    discretized = discretize(dataset, schemes)
    rows: dict[str, dict[str, str]] = {}
    for record in discretized.records:
        rows.setdefault(record.timestamp, {})[record.source] = record.value
    n = len(rows)
    for rule in spec.planted:
        want_x = {source: schemes[source].label_for_value(float(level)) for source, level in rule.antecedents}
        cons_source, cons_level = rule.consequent
        want_y = schemes[cons_source].label_for_value(float(cons_level))
        n_x = n_xy = 0
        for row in rows.values():
            if all(row.get(s) == v for s, v in want_x.items()):
                n_x += 1
                n_xy += row.get(cons_source) == want_y
        conf = n_xy / n_x if n_x else 0.0
        supp = n_xy / n
        if abs(conf - rule.confidence) > 0.05 or abs(supp - rule.support) > 0.05:
            raise SynthesisError(
                f"infeasible spec: planted rule realized confidence {conf:.3f} / support {supp:.3f}, "
                f"targets {rule.confidence} / {rule.support}"
            )


def planted_rule_as_rule(rule: PlantedRule, schemes: dict[str, BinScheme]) -> Rule:
    """Express a planted rule in the pipeline's bin-label vocabulary."""
    return Rule(
        antecedents=tuple(
            Item(feature=measurement(source), value=schemes[source].label_for_value(float(level)))
            for source, level in rule.antecedents
        ),
        consequent=Item(
            feature=measurement(rule.consequent[0]),
            value=schemes[rule.consequent[0]].label_for_value(float(rule.consequent[1])),
        ),
    )


def dataset_to_csv(dataset: TimeSeriesDataset, target: str | Path) -> None:
    with open(target, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["source_id", "timestamp", "value"])
        for record in dataset.records:
            value = f"{record.value:.17g}" if isinstance(record.value, float) else record.value
            writer.writerow([record.source, record.timestamp, value])


def graph_to_json(graph: PropertyGraph) -> dict:
    return {
        "nodes": [
            {
                "id": node,
                "labels": sorted(graph.labels_of(node)),
                "properties": dict(sorted(graph.node_properties(node).items())),
            }
            for node in sorted(graph.nodes)
        ],
        "edges": [
            {
                "id": edge,
                "from": graph.edge_endpoints[edge][0],
                "to": graph.edge_endpoints[edge][1],
                "labels": sorted(graph.labels_of(edge)),
                "properties": dict(sorted(graph.prop_values.get(edge, {}).items())),
            }
            for edge in sorted(graph.edges)
        ],
    }


def schema_to_json(schema: Schema) -> dict:
    return {
        "classes": sorted(schema.classes),
        "relations": [
            {"name": name, "from": pair[0], "to": pair[1]}
            for name, pair in sorted(schema.relation_signature.items())
        ],
        "properties": [
            {"owner": owner, "name": name, "kind": schema.property_kinds.get(name, "categorical")}
            for owner in sorted(schema.property_owner)
            for name in sorted(schema.property_owner[owner])
        ],
    }


# --- experiment reports -----------------------------------------------------


@dataclass
class ExperimentReport:
    title: str
    header: dict
    columns: list[str]
    rows: list[dict] = field(default_factory=list)

    def to_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=self.columns, restval="")
            writer.writeheader()
            for row in self.rows:
                writer.writerow({k: _plain(v) for k, v in row.items() if k in self.columns})

    def to_json(self, path: str | Path) -> None:
        payload = {
            "title": self.title,
            "header": self.header,
            "columns": self.columns,
            "rows": [{k: _plain(v) for k, v in row.items()} for row in self.rows],
        }
        Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True))


def _plain(value):
    if isinstance(value, (np.floating, np.integer)):
        return value.item()
    return value


def _hash_payload(payload: dict) -> str:
    return hashlib.sha256(json.dumps(payload, sort_keys=True, default=str).encode()).hexdigest()


def _spec_summary(spec: SynthSpec) -> dict:
    return {
        "sources": spec.sources,
        "transactions": spec.transactions,
        "bins": spec.bins,
        "planted_rules": len(spec.planted),
        "template": spec.template,
        "seed": spec.seed,
    }


def _aggregate_rules(rules: Sequence[Rule]) -> dict:
    """Metric means over metric-defined rules, with the excluded count stated."""
    out: dict = {"rule_count": len(rules)}
    metrics = [r.metrics for r in rules if r.metrics is not None]
    for name in ("support", "confidence", "lift", "leverage", "zhangs_metric"):
        values = [getattr(m, name) for m in metrics if getattr(m, name) is not None]
        out[f"mean_{name}"] = statistics.fmean(values) if values else None
    out["undefined_excluded"] = sum(
        1 for m in metrics if m.lift is None or m.zhangs_metric is None
    )
    return out


def _timed(fn):
    start = time.perf_counter()
    result = fn()
    return result, time.perf_counter() - start


def _mean_std(values: Sequence[float]) -> tuple[float | None, float | None]:
    if not values:
        return None, None
    mean = statistics.fmean(values)
    std = statistics.pstdev(values) if len(values) > 1 else 0.0
    return mean, std


# --- experiments ------------------------------------------------------------


def run_runtime_scaling(
    spec: SynthSpec,
    source_counts: Sequence[int],
    repetitions: int = 3,
    *,
    algorithms: Sequence[str] = ("ae", "fp_growth"),
    train_config: TrainConfig | None = None,
    similarity_threshold: float = 0.5,
    ae_antecedent_counts: Sequence[int] = (1, 2, 3),
    fp_min_supports: Sequence[float] = (0.4, 0.3, 0.2),
    fp_scan_min_support: float = 0.25,
    fp_min_confidence: float = 0.8,
    hho_population: int = 30,
    hho_iterations: int = 200,
    neighbor_depth: int = 1,
    timeout_secs: float | None = None,
    seed: int = 0,
) -> ExperimentReport:
    """Mining wall time vs source count, antecedent cap, and support threshold.

    Only the rule-learning call is timed; data generation, enrichment,
    encoding, and model training stay outside every measured span.  Runs
    exceeding ``timeout_secs`` are recorded as censored, not failures.
    """
    if max(source_counts) > spec.sources:
        raise SynthesisError("source_counts exceed the sources the spec generates")
    train_config = train_config or TrainConfig(seed=seed)
    rng = np.random.default_rng(seed)
    dataset, graph, binding = generate(spec)
    all_sources = sorted(dataset.sources)

    report = ExperimentReport(
        title="runtime_scaling",
        header={
            "note": REPORT_NOTE,
            "dataset": _spec_summary(spec),
            "seed": seed,
            "repetitions": repetitions,
            "config_hash": _hash_payload(
                {
                    "spec": _spec_summary(spec),
                    "source_counts": list(source_counts),
                    "repetitions": repetitions,
                    "algorithms": list(algorithms),
                    "threshold": similarity_threshold,
                    "fp_min_supports": list(fp_min_supports),
                    "seed": seed,
                }
            ),
        },
        columns=[
            "section",
            "algorithm",
            "source_count",
            "max_antecedents",
            "min_support",
            "repetitions",
            "mean_seconds",
            "std_seconds",
            "mean_rules",
            "censored",
        ],
    )

    def record_row(section: str, algorithm: str, times, rule_counts, censored, **extra) -> None:
        mean, std = _mean_std(times)
        row = {
            "section": section,
            "algorithm": algorithm,
            "repetitions": repetitions,
            "mean_seconds": mean,
            "std_seconds": std,
            "mean_rules": statistics.fmean(rule_counts) if rule_counts else None,
            "censored": censored,
            **extra,
        }
        report.rows.append(row)

    for count in source_counts:
        collected: dict[str, tuple[list, list, int]] = {a: ([], [], 0) for a in algorithms}
        for rep in range(repetitions):
            subset = sorted(rng.choice(all_sources, size=count, replace=False).tolist())
            sub_binding = Binding({s: binding.source_to_node[s] for s in subset})
            transactions, _, _ = build_transactions(
                subset_sources(dataset, subset),
                graph,
                sub_binding,
                bins=spec.bins,
                neighbor_depth=neighbor_depth,
            )
            for algorithm in algorithms:
                if algorithm == "ae":
                    model = train(transactions, replace(train_config, seed=seed + rep))
                    rules, elapsed = _timed(
                        lambda: extract_rules(model, transactions, similarity_threshold, 1)
                    )
                elif algorithm == "fp_growth":
                    rules, elapsed = _timed(
                        lambda: fp_growth(transactions, fp_scan_min_support, fp_min_confidence)
                    )
                elif algorithm == "hho":
                    run, elapsed = _timed(
                        lambda: hho_mine(transactions, hho_population, hho_iterations, seed=seed + rep)
                    )
                    rules = run.rules
                else:
                    raise SynthesisError(f"unknown algorithm {algorithm!r}")
                times, counts_list, censored = collected[algorithm]
                if timeout_secs is not None and elapsed > timeout_secs:
                    collected[algorithm] = (times, counts_list, censored + 1)
                else:
                    times.append(elapsed)
                    counts_list.append(len(rules))
        for algorithm in algorithms:
            times, counts_list, censored = collected[algorithm]
            record_row("sources", algorithm, times, counts_list, censored, source_count=count)

    # Antecedent-cap sweep on the full dataset, one model, extraction timed only.
    transactions, _, _ = build_transactions(
        dataset, graph, binding, bins=spec.bins, neighbor_depth=neighbor_depth
    )
    if "ae" in algorithms:
        model = train(transactions, train_config)
        for cap in ae_antecedent_counts:
            times, counts_list, censored = [], [], 0
            for _ in range(repetitions):
                rules, elapsed = _timed(
                    lambda: extract_rules(model, transactions, similarity_threshold, cap)
                )
                if timeout_secs is not None and elapsed > timeout_secs:
                    censored += 1
                else:
                    times.append(elapsed)
                    counts_list.append(len(rules))
            record_row("antecedents", "ae", times, counts_list, censored, max_antecedents=cap)

    if "fp_growth" in algorithms:
        for min_support in fp_min_supports:
            times, counts_list, censored = [], [], 0
            for _ in range(repetitions):
                rules, elapsed = _timed(lambda: fp_growth(transactions, min_support, fp_min_confidence))
                if timeout_secs is not None and elapsed > timeout_secs:
                    censored += 1
                else:
                    times.append(elapsed)
                    counts_list.append(len(rules))
            record_row("min_support", "fp_growth", times, counts_list, censored, min_support=min_support)

    return report


def run_quality_comparison(
    spec: SynthSpec,
    seeds: Sequence[int],
    *,
    train_config: TrainConfig | None = None,
    similarity_threshold: float = 0.8,
    max_antecedents: int = 1,
    fp_min_support: float = 0.2,
    fp_min_confidence: float = 0.8,
    neighbor_depth: int = 1,
) -> ExperimentReport:
    """Extractor vs FP-Growth: per-seed metric averages plus rule overlap.

    Overlap is the fraction of FP-Growth's rules (the reference) that the
    extractor also emits, matched exactly on antecedent set + consequent.
    """
    base_train = train_config or TrainConfig()
    columns = [
        "section",
        "seed",
        "algorithm",
        "rule_count",
        "mean_support",
        "mean_confidence",
        "mean_lift",
        "mean_leverage",
        "mean_zhangs_metric",
        "undefined_excluded",
        "overlap_vs_reference",
        "wall_seconds",
    ]
    report = ExperimentReport(
        title="quality_comparison",
        header={
            "note": REPORT_NOTE,
            "dataset": _spec_summary(spec),
            "seeds": list(seeds),
            "reference": {"algorithm": "fp_growth", "min_support": fp_min_support, "min_confidence": fp_min_confidence},
            "candidate": {
                "algorithm": "ae",
                "similarity_threshold": similarity_threshold,
                "max_antecedents": max_antecedents,
            },
            "config_hash": _hash_payload(
                {
                    "spec": _spec_summary(spec),
                    "seeds": list(seeds),
                    "threshold": similarity_threshold,
                    "max_antecedents": max_antecedents,
                    "fp_min_support": fp_min_support,
                    "fp_min_confidence": fp_min_confidence,
                }
            ),
        },
        columns=columns,
    )

    per_algo: dict[str, list[dict]] = {"ae": [], "fp_growth": []}
    overlaps: list[float] = []
    for seed in seeds:
        dataset, graph, binding = generate(replace(spec, seed=seed))
        transactions, _, _ = build_transactions(
            dataset, graph, binding, bins=spec.bins, neighbor_depth=neighbor_depth
        )
        model = train(transactions, replace(base_train, seed=seed))
        ae_rules, ae_time = _timed(
            lambda: attach_metrics(
                extract_rules(model, transactions, similarity_threshold, max_antecedents), transactions
            )
        )
        fp_rules, fp_time = _timed(lambda: fp_growth(transactions, fp_min_support, fp_min_confidence))
        overlap = rule_overlap(fp_rules, ae_rules) if fp_rules else None
        if overlap is not None:
            overlaps.append(overlap)
        for algorithm, rules, elapsed, this_overlap in (
            ("ae", ae_rules, ae_time, overlap),
            ("fp_growth", fp_rules, fp_time, None),
        ):
            aggregate = _aggregate_rules(rules)
            per_algo[algorithm].append(aggregate)
            report.rows.append(
                {
                    "section": "seed",
                    "seed": seed,
                    "algorithm": algorithm,
                    "overlap_vs_reference": this_overlap,
                    "wall_seconds": elapsed,
                    **aggregate,
                }
            )

    for algorithm, aggregates in per_algo.items():
        summary: dict = {"section": "mean", "algorithm": algorithm, "seed": None}
        for column in (
            "rule_count",
            "mean_support",
            "mean_confidence",
            "mean_lift",
            "mean_leverage",
            "mean_zhangs_metric",
            "undefined_excluded",
        ):
            values = [a[column] for a in aggregates if a.get(column) is not None]
            summary[column] = statistics.fmean(values) if values else None
        if algorithm == "ae":
            summary["overlap_vs_reference"] = statistics.fmean(overlaps) if overlaps else None
        report.rows.append(summary)
    return report


def run_threshold_sweep(
    spec: SynthSpec,
    thresholds: Sequence[float],
    *,
    train_config: TrainConfig | None = None,
    max_antecedents: int = 1,
    neighbor_depth: int = 1,
    seed: int = 0,
) -> ExperimentReport:
    """Rule counts and metric averages per similarity threshold on one model."""
    base_train = train_config or TrainConfig(seed=seed)
    dataset, graph, binding = generate(replace(spec, seed=seed))
    transactions, _, _ = build_transactions(
        dataset, graph, binding, bins=spec.bins, neighbor_depth=neighbor_depth
    )
    model = train(transactions, base_train)

    report = ExperimentReport(
        title="threshold_sweep",
        header={
            "note": REPORT_NOTE,
            "dataset": _spec_summary(spec),
            "seed": seed,
            "max_antecedents": max_antecedents,
            "config_hash": _hash_payload(
                {
                    "spec": _spec_summary(spec),
                    "thresholds": list(thresholds),
                    "max_antecedents": max_antecedents,
                    "seed": seed,
                }
            ),
        },
        columns=[
            "threshold",
            "rule_count",
            "mean_support",
            "mean_confidence",
            "mean_lift",
            "mean_leverage",
            "mean_zhangs_metric",
            "undefined_excluded",
        ],
    )
    for threshold in thresholds:
        rules = attach_metrics(
            extract_rules(model, transactions, threshold, max_antecedents), transactions
        )
        report.rows.append({"threshold": threshold, **_aggregate_rules(rules)})
    return report
