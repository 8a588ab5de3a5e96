import io
import math

import numpy as np
import pytest

from semrules.graph import Binding, GraphError, PropertyGraph
from semrules.ingest import DiscretizedDataset, Record
from semrules.rules import (
    edge_label,
    edge_presence,
    measurement,
    node_label,
    node_property,
    neighbor_property,
    plain_item,
)
from semrules.transactions import (
    FeatureRegistry,
    TransactionError,
    corrupt,
    encode_one_hot,
    enrich,
    gaussian_noise,
)


def discretized(rows):
    records = tuple(Record(s, t, v) for s, t, v in rows)
    return DiscretizedDataset(records=records, sources=frozenset(r.source for r in records))


def bare_node_graph():
    return PropertyGraph(
        nodes=frozenset({"n1"}),
        edges=frozenset(),
        edge_endpoints={},
        labels={},
        prop_values={},
    )


def labeled_pipe_graph():
    return PropertyGraph(
        nodes=frozenset({"n1"}),
        edges=frozenset(),
        edge_endpoints={},
        labels={"n1": frozenset({"Pipe"})},
        prop_values={"n1": {"length": 42.0}},
    )


def two_node_graph():
    return PropertyGraph(
        nodes=frozenset({"n1", "n2"}),
        edges=frozenset({"e1"}),
        edge_endpoints={"e1": ("n1", "n2")},
        labels={"n1": frozenset({"Pipe"}), "n2": frozenset({"Junction"}), "e1": frozenset({"connected_to"})},
        prop_values={"n1": {"length": 40.0}, "n2": {"elevation": 7.0}},
    )


class TestEnrich:
    def test_bare_node_depth_zero_measurement_only(self):
        rows = discretized([("s1", "0", "lo"), ("s1", "1", "hi")])
        out = enrich(rows, bare_node_graph(), Binding({"s1": "n1"}), neighbor_depth=0)
        assert out == [{measurement("s1"): "lo"}, {measurement("s1"): "hi"}]

    def test_labeled_node_with_property_depth_zero(self):
        rows = discretized([("s1", "0", "lo")])
        out = enrich(rows, labeled_pipe_graph(), Binding({"s1": "n1"}), neighbor_depth=0)
        assert len(out) == 1
        t = out[0]
        assert t[measurement("s1")] == "lo"
        assert t[node_label("n1")] == "Pipe"
        # single node in the graph: its length forms one single-value bin
        assert t[node_property("n1", "length")].startswith("(")

    def test_two_sources_depth_one_carry_neighbor_context(self):
        # expected feature set enumerated by hand on the 2-node graph
        rows = discretized([("s1", "0", "a"), ("s2", "0", "b")])
        out = enrich(rows, two_node_graph(), Binding({"s1": "n1", "s2": "n2"}), neighbor_depth=1)
        assert len(out) == 1
        t = out[0]
        expected_features = {
            measurement("s1"),
            measurement("s2"),
            node_label("n1"),
            node_label("n2"),
            node_property("n1", "length"),
            node_property("n2", "elevation"),
            edge_label("e1"),
            edge_presence("n1", "n2"),
            edge_presence("n2", "n1"),
            neighbor_property("n1", "n2", "elevation"),
            neighbor_property("n2", "n1", "length"),
        }
        assert set(t) == expected_features
        assert t[edge_presence("n1", "n2")] == "present"
        assert t[node_label("n2")] == "Junction"

    def test_timestamps_missing_a_source_are_dropped(self):
        rows = discretized([("s1", "0", "a"), ("s2", "0", "b"), ("s1", "1", "a")])
        out = enrich(rows, two_node_graph(), Binding({"s1": "n1", "s2": "n2"}), neighbor_depth=0)
        assert len(out) == 1

    def test_missing_binding_names_source(self):
        rows = discretized([("s1", "0", "a"), ("s2", "0", "b")])
        with pytest.raises(GraphError, match="'s2' missing"):
            enrich(rows, two_node_graph(), Binding({"s1": "n1"}), neighbor_depth=0)

    def test_deterministic(self):
        rows = discretized([("s1", "0", "a"), ("s2", "0", "b")])
        binding = Binding({"s1": "n1", "s2": "n2"})
        assert enrich(rows, two_node_graph(), binding, 1) == enrich(rows, two_node_graph(), binding, 1)


class TestRegistry:
    def test_ranges_are_contiguous_and_cover_width(self, two_group_registry):
        spans = [(g.start, g.end) for g in two_group_registry.groups]
        assert spans == [(0, 2), (2, 5)]
        assert two_group_registry.width == 5

    def test_bijection_roundtrip(self, two_group_registry):
        for idx in range(two_group_registry.width):
            group, value = two_group_registry.group_of_index(idx)
            assert two_group_registry.index_of(group.feature, value) == idx

    def test_single_class_group_rejected(self):
        with pytest.raises(TransactionError, match=">= 2"):
            FeatureRegistry([(plain_item("f"), ("only",))])

    def test_duplicate_feature_rejected(self):
        with pytest.raises(TransactionError, match="duplicate feature"):
            FeatureRegistry([(plain_item("f"), ("a", "b")), (plain_item("f"), ("c", "d"))])

    def test_content_hash_tracks_layout(self, two_group_registry):
        same = FeatureRegistry([(plain_item("f1"), ("a", "b")), (plain_item("f2"), ("c", "d", "e"))])
        other = FeatureRegistry([(plain_item("f1"), ("a", "b")), (plain_item("f2"), ("c", "d", "x"))])
        assert two_group_registry.content_hash() == same.content_hash()
        assert two_group_registry.content_hash() != other.content_hash()


class TestEncode:
    def test_single_group_definition(self):
        registry = FeatureRegistry([(plain_item("f"), ("a", "b"))])
        ts = encode_one_hot([{plain_item("f"): "a"}], registry)
        assert ts.matrix.tolist() == [[1.0, 0.0]]

    def test_five_wide_two_group_layout(self, two_group_registry):
        # groups of 2 and 3 one-hot encode {a, c} as [1,0,1,0,0]
        ts = encode_one_hot([{plain_item("f1"): "a", plain_item("f2"): "c"}], two_group_registry)
        assert ts.matrix.tolist() == [[1.0, 0.0, 1.0, 0.0, 0.0]]

    def test_roundtrip_decode(self, two_group_registry, rng):
        for _ in range(50):
            t = {
                plain_item("f1"): ("a", "b")[rng.integers(0, 2)],
                plain_item("f2"): ("c", "d", "e")[rng.integers(0, 3)],
            }
            ts = encode_one_hot([t], two_group_registry)
            assert two_group_registry.decode_row(ts.matrix[0]) == t

    def test_group_sums_are_one(self, two_group_registry, rng):
        rows = [
            {
                plain_item("f1"): ("a", "b")[rng.integers(0, 2)],
                plain_item("f2"): ("c", "d", "e")[rng.integers(0, 3)],
            }
            for _ in range(40)
        ]
        ts = encode_one_hot(rows, two_group_registry)
        for sl in two_group_registry.slices():
            assert np.all(ts.matrix[:, sl].sum(axis=1) == 1.0)

    def test_constant_features_dropped_when_registry_inferred(self):
        rows = [
            {plain_item("f1"): "a", plain_item("const"): "same"},
            {plain_item("f1"): "b", plain_item("const"): "same"},
        ]
        ts = encode_one_hot(rows)
        assert [g.feature for g in ts.registry.groups] == [plain_item("f1")]
        assert all(plain_item("const") not in row for row in ts.categorical)

    def test_unseen_class_raises(self, two_group_registry):
        with pytest.raises(TransactionError, match="unseen class"):
            encode_one_hot([{plain_item("f1"): "zz", plain_item("f2"): "c"}], two_group_registry)

    def test_incomplete_row_raises(self, two_group_registry):
        with pytest.raises(TransactionError, match="missing feature"):
            encode_one_hot([{plain_item("f1"): "a"}], two_group_registry)

    def test_csv_dump_headers_and_rows(self, two_group_registry, tmp_path):
        ts = encode_one_hot([{plain_item("f1"): "b", plain_item("f2"): "d"}], two_group_registry)
        buf = io.StringIO()
        ts.to_csv(buf)
        lines = buf.getvalue().strip().splitlines()
        assert lines[0] == "f1::a,f1::b,f2::c,f2::d,f2::e"
        assert lines[1] == "0,1,0,1,0"

    def test_unique_categorical_preserves_first_appearance(self, two_group_registry):
        r1 = {plain_item("f1"): "a", plain_item("f2"): "c"}
        r2 = {plain_item("f1"): "b", plain_item("f2"): "d"}
        ts = encode_one_hot([r1, r2, r1, r1], two_group_registry)
        assert ts.unique_categorical() == [r1, r2]


class TestCorrupt:
    def test_zero_noise_is_identity(self, rng):
        row = np.array([1.0, 0.0, 0.0, 1.0])
        assert np.array_equal(corrupt(row, 0.0, rng), row)

    def test_output_clamped_to_unit_interval(self, rng):
        row = np.array([1.0, 0.0] * 50)
        for _ in range(20):
            noisy = corrupt(row, 2.0, rng)
            assert noisy.min() >= 0.0 and noisy.max() <= 1.0

    def test_input_untouched(self, rng):
        row = np.array([1.0, 0.0])
        _ = corrupt(row, 0.7, rng)
        assert row.tolist() == [1.0, 0.0]

    def test_negative_noise_factor_rejected(self, rng):
        with pytest.raises(TransactionError, match=">= 0"):
            corrupt(np.array([1.0, 0.0]), -0.1, rng)

    def test_mean_absolute_noise_matches_folded_gaussian(self, rng):
        # Monte-Carlo oracle: E|N(0, 0.5^2)| = 0.5 * sqrt(2/pi) ~= 0.3989422804
        draws = gaussian_noise(1_000_000, 0.5, rng)
        assert abs(float(np.abs(draws).mean()) - 0.5 * math.sqrt(2 / math.pi)) < 2e-3

    def test_corrupt_formula_matches_reference(self):
        # same seed drives an independently coded clip(x + f*g) reference
        row = np.array([1.0, 0.0, 0.0])
        got = corrupt(row, 0.5, np.random.default_rng(11))
        ref_noise = 0.5 * np.random.default_rng(11).standard_normal(3)
        assert np.array_equal(got, np.clip(row + ref_noise, 0.0, 1.0))
