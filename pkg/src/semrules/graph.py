"""Property graph, ontology/data schema, and source-to-node binding.

The graph is a snapshot: immutable after construction and safe to read
from any number of workers.  Edges are stored directed (``from``/``to``)
but traversed undirected by :func:`neighbors`.
"""

from __future__ import annotations

import json
import math
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping


class GraphError(ValueError):
    """Raised for structurally invalid graphs, schemas, or bindings."""


@dataclass(frozen=True)
class Schema:
    """Ontology/data schema: classes, relations, and their properties.

    ``relation_signature`` maps a relation name to its (from-class,
    to-class) pair; ``property_owner`` maps a class or relation name to
    the property names it carries; ``property_kinds`` declares each
    property as "categorical" or "numerical".
    """

    classes: frozenset[str]
    relations: frozenset[str]
    properties: frozenset[str]
    relation_signature: Mapping[str, tuple[str, str]] = field(default_factory=dict)
    property_owner: Mapping[str, frozenset[str]] = field(default_factory=dict)
    property_kinds: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self) -> None:
        for rel, (src, dst) in self.relation_signature.items():
            if rel not in self.relations:
                raise GraphError(f"relation signature for unknown relation {rel!r}")
            if src not in self.classes or dst not in self.classes:
                raise GraphError(f"relation {rel!r} references unknown class(es) ({src!r}, {dst!r})")
        vocabulary = self.classes | self.relations
        for owner, props in self.property_owner.items():
            if owner not in vocabulary:
                raise GraphError(f"property owner {owner!r} is neither a class nor a relation")
            unknown = set(props) - set(self.properties)
            if unknown:
                raise GraphError(f"owner {owner!r} lists unknown properties {sorted(unknown)}")
        for prop, kind in self.property_kinds.items():
            if kind not in ("categorical", "numerical"):
                raise GraphError(f"property {prop!r} has invalid kind {kind!r}")


@dataclass(frozen=True)
class PropertyGraph:
    """Labelled property graph over string IDs.

    Property values are either categorical (str) or numerical (finite
    float); a property name must keep one kind across the whole graph.
    """

    nodes: frozenset[str]
    edges: frozenset[str]
    edge_endpoints: Mapping[str, tuple[str, str]]
    labels: Mapping[str, frozenset[str]]
    prop_values: Mapping[str, Mapping[str, str | float]]

    def __post_init__(self) -> None:
        if self.nodes & self.edges:
            raise GraphError(f"IDs shared between nodes and edges: {sorted(self.nodes & self.edges)}")
        missing = self.edges - set(self.edge_endpoints)
        if missing:
            raise GraphError(f"edges without endpoints: {sorted(missing)}")
        for edge, (a, b) in self.edge_endpoints.items():
            if edge not in self.edges:
                raise GraphError(f"endpoints given for unknown edge {edge!r}")
            if a not in self.nodes or b not in self.nodes:
                raise GraphError(f"edge {edge!r} endpoints ({a!r}, {b!r}) not in node set")
        known = self.nodes | self.edges
        for owner in self.labels:
            if owner not in known:
                raise GraphError(f"labels attached to unknown ID {owner!r}")
        kinds: dict[str, str] = {}
        for owner, props in self.prop_values.items():
            if owner not in known:
                raise GraphError(f"properties attached to unknown ID {owner!r}")
            for prop, value in props.items():
                kind = _value_kind(owner, prop, value)
                if kinds.setdefault(prop, kind) != kind:
                    raise GraphError(f"property {prop!r} mixes categorical and numerical values")

    def property_kinds(self) -> dict[str, str]:
        """Observed kind ("categorical"/"numerical") per property name."""
        kinds: dict[str, str] = {}
        for owner, props in self.prop_values.items():
            for prop, value in props.items():
                kinds[prop] = _value_kind(owner, prop, value)
        return kinds

    def node_properties(self, node: str) -> Mapping[str, str | float]:
        return self.prop_values.get(node, {})

    def labels_of(self, item_id: str) -> frozenset[str]:
        return self.labels.get(item_id, frozenset())


def _value_kind(owner: str, prop: str, value: str | float) -> str:
    if isinstance(value, bool):
        raise GraphError(f"boolean value for {owner!r}.{prop}; use a categorical string")
    if isinstance(value, str):
        return "categorical"
    if isinstance(value, (int, float)):
        if not math.isfinite(value):
            raise GraphError(f"non-finite value for {owner!r}.{prop}")
        return "numerical"
    raise GraphError(f"unsupported value type {type(value).__name__} for {owner!r}.{prop}")


@dataclass(frozen=True)
class Binding:
    """Total map from time series source IDs to graph node IDs."""

    source_to_node: Mapping[str, str]

    def check(self, graph: PropertyGraph, sources: frozenset[str] | set[str]) -> None:
        """Raise if a source is unbound or bound to a missing node."""
        for source in sorted(sources):
            node = self.source_to_node.get(source)
            if node is None:
                raise GraphError(f"source {source!r} missing from binding")
            if node not in graph.nodes:
                raise GraphError(f"source {source!r} bound to unknown node {node!r}")


@dataclass
class ValidationReport:
    """Schema-conformance findings; empty means the graph conforms."""

    label_violations: list[tuple[str, str]] = field(default_factory=list)
    property_violations: list[tuple[str, str]] = field(default_factory=list)

    @property
    def conforms(self) -> bool:
        return not self.label_violations and not self.property_violations


def validate_graph(graph: PropertyGraph, schema: Schema) -> ValidationReport:
    """Report every label outside the schema vocabulary and every unknown property.

    Violations are report entries, never exceptions; an empty report is
    equivalent to conformance.
    """
    vocabulary = schema.classes | schema.relations
    report = ValidationReport()
    for owner in sorted(graph.labels):
        for label in sorted(graph.labels[owner]):
            if label not in vocabulary:
                report.label_violations.append((owner, label))
    for owner in sorted(graph.prop_values):
        for prop in sorted(graph.prop_values[owner]):
            if prop not in schema.properties:
                report.property_violations.append((owner, prop))
    return report


def neighbors(graph: PropertyGraph, node: str, depth: int) -> set[tuple[str, str]]:
    """Nodes reachable within ``depth`` undirected hops, excluding the start.

    Each reached node is paired with the first edge on a shortest path
    from ``node``; ties are broken by sorted edge/node order, so the
    result is deterministic.
    """
    if node not in graph.nodes:
        raise GraphError(f"unknown node {node!r}")
    if depth < 1:
        raise GraphError(f"depth must be >= 1, got {depth}")

    adjacency: dict[str, list[tuple[str, str]]] = {}
    for edge in sorted(graph.edges):
        a, b = graph.edge_endpoints[edge]
        adjacency.setdefault(a, []).append((b, edge))
        adjacency.setdefault(b, []).append((a, edge))
    for entries in adjacency.values():
        entries.sort()

    reached: dict[str, str] = {}
    visited = {node}
    queue: deque[tuple[str, str, int]] = deque()
    for nb, edge in adjacency.get(node, []):
        if nb not in visited:
            visited.add(nb)
            reached[nb] = edge
            queue.append((nb, edge, 1))
    while queue:
        current, root_edge, dist = queue.popleft()
        if dist >= depth:
            continue
        for nb, _edge in adjacency.get(current, []):
            if nb not in visited:
                visited.add(nb)
                reached[nb] = root_edge
                queue.append((nb, root_edge, dist + 1))
    return {(nb, edge) for nb, edge in reached.items()}


# --- JSON file formats ----------------------------------------------------
#
# Graph:   {"nodes": [{"id", "labels": [], "properties": {}}],
#           "edges": [{"id", "from", "to", "labels": [], "properties": {}}]}
# Schema:  {"classes": [], "relations": [{"name", "from", "to"}],
#           "properties": [{"owner", "name", "kind"}]}
# Binding: {"<source id>": "<node id>", ...}


def load_graph(path: str | Path) -> PropertyGraph:
    data = _load_json(path)
    nodes: set[str] = set()
    edges: set[str] = set()
    endpoints: dict[str, tuple[str, str]] = {}
    labels: dict[str, frozenset[str]] = {}
    props: dict[str, dict[str, str | float]] = {}
    for entry in data.get("nodes", []):
        node_id = str(entry["id"])
        nodes.add(node_id)
        if entry.get("labels"):
            labels[node_id] = frozenset(str(x) for x in entry["labels"])
        if entry.get("properties"):
            props[node_id] = {str(k): _coerce_value(v) for k, v in entry["properties"].items()}
    for entry in data.get("edges", []):
        edge_id = str(entry["id"])
        edges.add(edge_id)
        endpoints[edge_id] = (str(entry["from"]), str(entry["to"]))
        if entry.get("labels"):
            labels[edge_id] = frozenset(str(x) for x in entry["labels"])
        if entry.get("properties"):
            props[edge_id] = {str(k): _coerce_value(v) for k, v in entry["properties"].items()}
    return PropertyGraph(
        nodes=frozenset(nodes),
        edges=frozenset(edges),
        edge_endpoints=endpoints,
        labels=labels,
        prop_values=props,
    )


def load_schema(path: str | Path) -> Schema:
    data = _load_json(path)
    classes = frozenset(str(c) for c in data.get("classes", []))
    relations: set[str] = set()
    signature: dict[str, tuple[str, str]] = {}
    for entry in data.get("relations", []):
        name = str(entry["name"])
        relations.add(name)
        signature[name] = (str(entry["from"]), str(entry["to"]))
    properties: set[str] = set()
    owners: dict[str, set[str]] = {}
    kinds: dict[str, str] = {}
    for entry in data.get("properties", []):
        name = str(entry["name"])
        properties.add(name)
        owners.setdefault(str(entry["owner"]), set()).add(name)
        kinds[name] = str(entry.get("kind", "categorical"))
    return Schema(
        classes=classes,
        relations=frozenset(relations),
        properties=frozenset(properties),
        relation_signature=signature,
        property_owner={k: frozenset(v) for k, v in owners.items()},
        property_kinds=kinds,
    )


def load_binding(path: str | Path) -> Binding:
    data = _load_json(path)
    if not isinstance(data, dict):
        raise GraphError(f"binding file {path} must be a JSON object")
    return Binding(source_to_node={str(k): str(v) for k, v in data.items()})


def _load_json(path: str | Path):
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"no such file: {path}")
    try:
        return json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise GraphError(f"invalid JSON in {path}: {exc}") from exc


def _coerce_value(value) -> str | float:
    if isinstance(value, bool):
        raise GraphError(f"boolean property value {value!r}; use a categorical string")
    if isinstance(value, (int, float)):
        return float(value)
    if isinstance(value, str):
        return value
    raise GraphError(f"unsupported property value type {type(value).__name__}")
