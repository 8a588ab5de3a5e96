"""Semantically enriched transactions and one-hot encoding.

Enrichment joins all sources on exact timestamps (one transaction per
timestamp seen by every source) and attaches, per source, the bound
node's label and property values plus neighbor context up to a
configurable depth.  Encoding keeps a full feature-to-neuron registry
so every neuron can be traced back to a (feature, class value) pair.
"""

from __future__ import annotations

import csv
import hashlib
import json
from dataclasses import dataclass
from pathlib import Path
from typing import IO, Mapping, Sequence

import numpy as np

from semrules.graph import Binding, PropertyGraph, neighbors
from semrules.ingest import DiscretizedDataset, fit_equal_frequency_bins
from semrules import rules as rule_model
from semrules.rules import Feature


class TransactionError(ValueError):
    """Raised for incomplete transactions or registry misuse."""


@dataclass(frozen=True)
class FeatureGroup:
    """One feature with its ordered class values and neuron range [start, end)."""

    feature: Feature
    classes: tuple[str, ...]
    start: int
    end: int

    def index_of(self, value: str) -> int:
        try:
            return self.start + self.classes.index(value)
        except ValueError:
            raise TransactionError(f"unseen class {value!r} for feature {self.feature.key()}") from None


class FeatureRegistry:
    """Bijection between (feature group, class value) and neuron index.

    Groups occupy contiguous, disjoint ranges covering [0, width); every
    group carries at least two class values (presence flags count
    "present"/"absent" as their two classes).
    """

    def __init__(self, groups: Sequence[tuple[Feature, Sequence[str]]]):
        built: list[FeatureGroup] = []
        offset = 0
        seen: set[Feature] = set()
        for feature, classes in groups:
            if feature in seen:
                raise TransactionError(f"duplicate feature {feature.key()}")
            seen.add(feature)
            classes = tuple(classes)
            if len(classes) < 2:
                raise TransactionError(
                    f"feature {feature.key()} has {len(classes)} class value(s); groups need >= 2"
                )
            if len(set(classes)) != len(classes):
                raise TransactionError(f"duplicate class values for feature {feature.key()}")
            built.append(FeatureGroup(feature, classes, offset, offset + len(classes)))
            offset += len(classes)
        self.groups: tuple[FeatureGroup, ...] = tuple(built)
        self.width: int = offset
        self._by_feature = {g.feature: g for g in self.groups}

    def __len__(self) -> int:
        return len(self.groups)

    def group_for(self, feature: Feature) -> FeatureGroup:
        try:
            return self._by_feature[feature]
        except KeyError:
            raise TransactionError(f"unknown feature {feature.key()}") from None

    def index_of(self, feature: Feature, value: str) -> int:
        return self.group_for(feature).index_of(value)

    def group_of_index(self, index: int) -> tuple[FeatureGroup, str]:
        if not 0 <= index < self.width:
            raise TransactionError(f"neuron index {index} outside [0, {self.width})")
        for group in self.groups:
            if group.start <= index < group.end:
                return group, group.classes[index - group.start]
        raise TransactionError(f"neuron index {index} not covered")  # pragma: no cover

    def slices(self) -> tuple[slice, ...]:
        return tuple(slice(g.start, g.end) for g in self.groups)

    def encode_row(self, assignment: Mapping[Feature, str]) -> np.ndarray:
        row = np.zeros(self.width, dtype=np.float64)
        for group in self.groups:
            value = assignment.get(group.feature)
            if value is None:
                raise TransactionError(f"transaction missing feature {group.feature.key()}")
            row[group.index_of(value)] = 1.0
        return row

    def decode_row(self, row: np.ndarray) -> dict[Feature, str]:
        out: dict[Feature, str] = {}
        for group in self.groups:
            local = int(np.argmax(row[group.start : group.end]))
            out[group.feature] = group.classes[local]
        return out

    def content_hash(self) -> str:
        payload = [
            {"kind": g.feature.kind, "ids": list(g.feature.ids), "classes": list(g.classes)}
            for g in self.groups
        ]
        blob = json.dumps(payload, sort_keys=True, ensure_ascii=False).encode()
        return hashlib.sha256(blob).hexdigest()

    def item(self, feature: Feature, value: str) -> rule_model.Item:
        self.group_for(feature).index_of(value)  # validates membership
        return rule_model.Item(feature=feature, value=value)


@dataclass
class TransactionSet:
    """One-hot matrix plus the retained categorical rows for exact counting."""

    registry: FeatureRegistry
    matrix: np.ndarray
    categorical: tuple[dict[Feature, str], ...]

    def __post_init__(self) -> None:
        if self.matrix.ndim != 2 or self.matrix.shape[1] != self.registry.width:
            raise TransactionError(
                f"matrix width {self.matrix.shape} does not match registry width {self.registry.width}"
            )
        if self.matrix.shape[0] != len(self.categorical):
            raise TransactionError("matrix rows and categorical rows disagree")

    def __len__(self) -> int:
        return self.matrix.shape[0]

    def unique_categorical(self) -> list[dict[Feature, str]]:
        """Distinct categorical rows in first-appearance order."""
        seen: set[tuple[str, ...]] = set()
        out: list[dict[Feature, str]] = []
        for row in self.categorical:
            key = tuple(row[g.feature] for g in self.registry.groups)
            if key not in seen:
                seen.add(key)
                out.append(row)
        return out

    def to_csv(self, target: str | Path | IO[str]) -> None:
        """Dump the one-hot matrix with ``feature::class`` column headers."""
        header = [f"{g.feature.key()}::{c}" for g in self.registry.groups for c in g.classes]

        def write(fh: IO[str]) -> None:
            writer = csv.writer(fh)
            writer.writerow(header)
            for row in self.matrix:
                writer.writerow([f"{v:.17g}" for v in row])

        if isinstance(target, (str, Path)):
            with open(target, "w", newline="") as fh:
                write(fh)
        else:
            write(target)


def enrich(
    discretized: DiscretizedDataset,
    graph: PropertyGraph,
    binding: Binding,
    neighbor_depth: int = 1,
    graph_bins: int = 5,
) -> list[dict[Feature, str]]:
    """Build categorical transactions from discretized data plus graph context.

    One transaction per timestamp at which every source has a value;
    timestamps missing any source are dropped.  Numerical graph
    properties are discretized with the same equal-frequency machinery
    (one scheme per property name over all node values).
    """
    sources = sorted(discretized.sources)
    binding.check(graph, discretized.sources)

    prop_schemes = _fit_graph_property_schemes(graph, graph_bins)
    context: dict[str, dict[Feature, str]] = {
        source: _source_context(graph, binding.source_to_node[source], neighbor_depth, prop_schemes)
        for source in sources
    }

    by_timestamp: dict[str, dict[str, str]] = {}
    order: list[str] = []
    for record in discretized.records:
        slot = by_timestamp.get(record.timestamp)
        if slot is None:
            slot = by_timestamp[record.timestamp] = {}
            order.append(record.timestamp)
        slot.setdefault(record.source, record.value)  # first occurrence wins

    transactions: list[dict[Feature, str]] = []
    for timestamp in order:
        row = by_timestamp[timestamp]
        if len(row) < len(sources):
            continue
        transaction: dict[Feature, str] = {}
        for source in sources:
            transaction[rule_model.measurement(source)] = row[source]
            transaction.update(context[source])
        transactions.append(transaction)
    return transactions


def _fit_graph_property_schemes(graph: PropertyGraph, graph_bins: int):
    values_by_prop: dict[str, list[float]] = {}
    for node in graph.nodes:
        for prop, value in graph.node_properties(node).items():
            if isinstance(value, float):
                values_by_prop.setdefault(prop, []).append(value)
    return {prop: fit_equal_frequency_bins(vals, graph_bins) for prop, vals in values_by_prop.items()}


def _label_class(graph: PropertyGraph, item_id: str) -> str | None:
    labels = graph.labels_of(item_id)
    return "&".join(sorted(labels)) if labels else None


def _source_context(
    graph: PropertyGraph,
    node: str,
    neighbor_depth: int,
    prop_schemes,
) -> dict[Feature, str]:
    context: dict[Feature, str] = {}
    node_class = _label_class(graph, node)
    if node_class is not None:
        context[rule_model.node_label(node)] = node_class

    def prop_class(prop: str, value: str | float) -> str:
        if isinstance(value, float):
            return prop_schemes[prop].label_for_value(value)
        return value

    for prop, value in sorted(graph.node_properties(node).items()):
        context[rule_model.node_property(node, prop)] = prop_class(prop, value)

    if neighbor_depth >= 1:
        for nb, edge in sorted(neighbors(graph, node, neighbor_depth)):
            nb_class = _label_class(graph, nb)
            if nb_class is not None:
                context[rule_model.node_label(nb)] = nb_class
            edge_class = _label_class(graph, edge)
            if edge_class is not None:
                context[rule_model.edge_label(edge)] = edge_class
            context[rule_model.edge_presence(node, nb)] = "present"
            for prop, value in sorted(graph.node_properties(nb).items()):
                context[rule_model.neighbor_property(node, nb, prop)] = prop_class(prop, value)
    return context


def encode_one_hot(
    cat_transactions: Sequence[Mapping[Feature, str]],
    registry: FeatureRegistry | None = None,
) -> TransactionSet:
    """One-hot encode complete categorical transactions.

    Without an explicit registry, one is built from the observed data:
    features sorted by descriptor, class values sorted lexicographically,
    and constant features (a single observed class) dropped since they
    cannot form informative rules and would break width-1 softmax groups.
    With an explicit registry, unseen class values raise.
    """
    if not cat_transactions:
        raise TransactionError("no transactions to encode")
    if registry is None:
        observed: dict[Feature, set[str]] = {}
        expected = set(cat_transactions[0])
        for i, transaction in enumerate(cat_transactions):
            if set(transaction) != expected:
                raise TransactionError(f"transaction {i} does not assign the same feature set as transaction 0")
            for feature, value in transaction.items():
                observed.setdefault(feature, set()).add(value)
        groups = [
            (feature, tuple(sorted(classes)))
            for feature, classes in sorted(observed.items(), key=lambda kv: kv[0])
            if len(classes) >= 2
        ]
        if not groups:
            raise TransactionError("all features are constant; nothing to encode")
        registry = FeatureRegistry(groups)

    matrix = np.zeros((len(cat_transactions), registry.width), dtype=np.float64)
    kept: list[dict[Feature, str]] = []
    for i, transaction in enumerate(cat_transactions):
        for group in registry.groups:
            value = transaction.get(group.feature)
            if value is None:
                raise TransactionError(f"transaction {i} missing feature {group.feature.key()}")
            matrix[i, group.index_of(value)] = 1.0
        kept.append({g.feature: transaction[g.feature] for g in registry.groups})
    return TransactionSet(registry=registry, matrix=matrix, categorical=tuple(kept))


def gaussian_noise(width: int, noise_factor: float, rng: np.random.Generator) -> np.ndarray:
    """Additive corruption noise: noise_factor times a standard Gaussian."""
    return noise_factor * rng.standard_normal(width)


def corrupt(row: np.ndarray, noise_factor: float, rng: np.random.Generator) -> np.ndarray:
    """Return a noisy copy of the row, clamped to [0, 1]; the input is untouched."""
    if noise_factor < 0:
        raise TransactionError(f"noise factor must be >= 0, got {noise_factor}")
    return np.clip(row + gaussian_noise(row.shape[-1], noise_factor, rng), 0.0, 1.0)
