import numpy as np
import pytest

from semrules.graph import PropertyGraph, Schema
from semrules.rules import plain_item
from semrules.transactions import FeatureRegistry


@pytest.fixture
def two_group_registry() -> FeatureRegistry:
    """The 5-neuron layout used throughout: f1 with {a,b}, f2 with {c,d,e}."""
    return FeatureRegistry([(plain_item("f1"), ("a", "b")), (plain_item("f2"), ("c", "d", "e"))])


@pytest.fixture
def chain_graph() -> PropertyGraph:
    """a - b - c chain with labels and one numerical property on b."""
    return PropertyGraph(
        nodes=frozenset({"a", "b", "c"}),
        edges=frozenset({"e_ab", "e_bc"}),
        edge_endpoints={"e_ab": ("a", "b"), "e_bc": ("b", "c")},
        labels={"a": frozenset({"Pipe"}), "b": frozenset({"Junction"}), "c": frozenset({"Pipe"})},
        prop_values={"b": {"elevation": 12.5}},
    )


@pytest.fixture
def water_schema() -> Schema:
    return Schema(
        classes=frozenset({"Pipe", "Junction"}),
        relations=frozenset({"connected_to"}),
        properties=frozenset({"elevation", "length"}),
        relation_signature={"connected_to": ("Pipe", "Junction")},
        property_owner={"Junction": frozenset({"elevation"}), "Pipe": frozenset({"length"})},
        property_kinds={"elevation": "numerical", "length": "numerical"},
    )


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240817)
