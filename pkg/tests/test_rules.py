import math

import pytest

from semrules.rules import (
    Item,
    Rule,
    RuleError,
    UndefinedMetric,
    compute_metrics,
    confidence,
    leverage,
    lift,
    measurement,
    node_property,
    plain_item,
    render_rule,
    rule_overlap,
    rule_to_dict,
    support,
    zhangs_metric,
)


def item(name, value="1"):
    return Item(feature=plain_item(name), value=value)


def rule(ants, cons):
    return Rule(antecedents=tuple(item(a) for a in ants), consequent=item(cons))


def tx(*names):
    return {plain_item(n): "1" for n in names}


class TestRuleStructure:
    def test_needs_antecedent(self):
        with pytest.raises(RuleError, match="at least one antecedent"):
            Rule(antecedents=(), consequent=item("y"))

    def test_consequent_not_in_antecedents(self):
        with pytest.raises(RuleError, match="appears in antecedents"):
            Rule(antecedents=(item("x"),), consequent=item("x", "2"))

    def test_key_ignores_antecedent_order(self):
        r1 = rule(["a", "b"], "y")
        r2 = rule(["b", "a"], "y")
        assert r1.key() == r2.key()


class TestSupport:
    def test_half_coverage(self):
        # enumerate the 4 rows by hand: X∪Y holds in rows 0 and 1 only
        D = [tx("x", "y"), tx("x", "y"), tx("x"), tx()]
        assert support(rule(["x"], "y"), D) == 0.5

    def test_full_coverage(self):
        D = [tx("x", "y")] * 3
        assert support(rule(["x"], "y"), D) == 1.0

    def test_zero_coverage(self):
        D = [tx("x"), tx("y")]
        assert support(rule(["x"], "y"), D) == 0.0

    def test_empty_dataset_raises(self):
        with pytest.raises(UndefinedMetric, match="empty"):
            support(rule(["x"], "y"), [])


class TestConfidence:
    def test_three_of_four(self):
        # hand count on a 6-row toy set: X in 4 rows, X∪Y in 3
        D = [tx("x", "y"), tx("x", "y"), tx("x", "y"), tx("x"), tx("y"), tx()]
        assert confidence(rule(["x"], "y"), D) == 0.75

    def test_always_together(self):
        D = [tx("x", "y"), tx("x", "y"), tx()]
        assert confidence(rule(["x"], "y"), D) == 1.0

    def test_zero_denominator_raises(self):
        D = [tx("y"), tx()]
        with pytest.raises(UndefinedMetric, match="antecedent never occurs"):
            confidence(rule(["x"], "y"), D)


class TestLift:
    def test_independence_gives_one(self):
        # full product distribution of two independent binary items
        D = [tx("x", "y"), tx("x"), tx("y"), tx()]
        assert lift(rule(["x"], "y"), D) == 1.0

    def test_coupled_gives_two(self):
        # hand-built 4-row set: Y only with X, conf 1, support(Y) = 0.5
        D = [tx("x", "y"), tx("x", "y"), tx(), tx()]
        assert lift(rule(["x"], "y"), D) == 2.0

    def test_never_together_gives_zero(self):
        D = [tx("x"), tx("x"), tx("y"), tx("y")]
        assert lift(rule(["x"], "y"), D) == 0.0

    def test_absent_consequent_raises(self):
        D = [tx("x"), tx()]
        with pytest.raises(UndefinedMetric, match="consequent never occurs"):
            lift(rule(["x"], "y"), D)


class TestLeverage:
    def test_independent_is_zero(self):
        D = [tx("x", "y"), tx("x"), tx("y"), tx()]
        assert leverage(rule(["x"], "y"), D) == 0.0

    def test_perfectly_coupled_is_quarter(self):
        # 2-row construction with both marginals 0.5
        D = [tx("x", "y"), tx()]
        assert leverage(rule(["x"], "y"), D) == 0.25

    def test_mutually_exclusive_is_minus_quarter(self):
        D = [tx("x"), tx("y")]
        assert leverage(rule(["x"], "y"), D) == -0.25


class TestZhangsMetric:
    def test_equal_confidences_give_zero(self):
        D = [tx("x", "y"), tx("x"), tx("y"), tx()]
        assert zhangs_metric(rule(["x"], "y"), D) == 0.0

    def test_pure_association_is_one(self):
        D = [tx("x", "y"), tx("x", "y"), tx(), tx()]
        assert zhangs_metric(rule(["x"], "y"), D) == 1.0

    def test_pure_dissociation_is_minus_one(self):
        D = [tx("x"), tx("x"), tx("y"), tx("y")]
        assert zhangs_metric(rule(["x"], "y"), D) == -1.0

    def test_antecedent_everywhere_raises(self):
        D = [tx("x", "y"), tx("x")]
        with pytest.raises(UndefinedMetric, match="complement is empty"):
            zhangs_metric(rule(["x"], "y"), D)


class TestRecountOracle:
    def test_metrics_match_naive_recount(self, rng):
        # independent oracle: literal per-definition loops, no shared counting
        names = ["a", "b", "c", "d", "e"]
        for _ in range(100):
            n = int(rng.integers(2, 60))
            D = [
                {plain_item(x): str(rng.integers(0, 2)) for x in names}
                for _ in range(n)
            ]
            ants = rng.choice(names[:4], size=int(rng.integers(1, 3)), replace=False).tolist()
            r = Rule(
                antecedents=tuple(Item(plain_item(a), str(rng.integers(0, 2))) for a in ants),
                consequent=Item(plain_item("e"), str(rng.integers(0, 2))),
            )
            holds_x = [all(t[i.feature] == i.value for i in r.antecedents) for t in D]
            holds_y = [t[r.consequent.feature] == r.consequent.value for t in D]
            n_x = sum(holds_x)
            n_y = sum(holds_y)
            n_xy = sum(x and y for x, y in zip(holds_x, holds_y))

            m = compute_metrics(r, D)
            if n_x == 0:
                assert m is None
                continue
            assert m.support == n_xy / n
            assert m.confidence == n_xy / n_x
            if n_y == 0:
                assert m.lift is None
            else:
                assert math.isclose(m.lift, (n_xy / n_x) / (n_y / n), rel_tol=0, abs_tol=1e-12)
            assert math.isclose(m.leverage, n_xy / n - (n_x / n) * (n_y / n), abs_tol=1e-12)
            if n_x == n:
                assert m.zhangs_metric is None
            else:
                conf, conf_not = n_xy / n_x, (n_y - n_xy) / (n - n_x)
                if max(conf, conf_not) == 0:
                    assert m.zhangs_metric is None
                else:
                    expected = (conf - conf_not) / max(conf, conf_not)
                    assert math.isclose(m.zhangs_metric, expected, abs_tol=1e-12)

    def test_invariant_confidence_at_least_support(self, rng):
        names = ["a", "b", "c"]
        for _ in range(50):
            D = [{plain_item(x): str(rng.integers(0, 2)) for x in names} for _ in range(20)]
            r = Rule(
                antecedents=(Item(plain_item("a"), "1"),),
                consequent=Item(plain_item("b"), "1"),
            )
            m = compute_metrics(r, D)
            if m is not None:
                assert m.confidence >= m.support - 1e-12

    def test_invariant_lift_one_iff_leverage_zero(self, rng):
        names = ["a", "b"]
        for _ in range(50):
            D = [{plain_item(x): str(rng.integers(0, 2)) for x in names} for _ in range(16)]
            r = Rule(antecedents=(Item(plain_item("a"), "1"),), consequent=Item(plain_item("b"), "1"))
            m = compute_metrics(r, D)
            if m is not None and m.lift is not None:
                assert (m.lift == 1.0) == (m.leverage == 0.0)


class TestRuleOverlap:
    def test_identical_sets(self):
        rules = [rule(["a"], "y"), rule(["b"], "y")]
        assert rule_overlap(rules, list(rules)) == 1.0

    def test_disjoint_sets(self):
        assert rule_overlap([rule(["a"], "y")], [rule(["b"], "y")]) == 0.0

    def test_three_of_four(self):
        reference = [rule(["a"], "y"), rule(["b"], "y"), rule(["c"], "y"), rule(["d"], "y")]
        candidate = reference[:3] + [rule(["e"], "y")]
        assert rule_overlap(reference, candidate) == 0.75

    def test_empty_reference_raises(self):
        with pytest.raises(UndefinedMetric, match="empty reference"):
            rule_overlap([], [rule(["a"], "y")])


class TestRendering:
    def test_measurement_and_property_style(self):
        r = Rule(
            antecedents=(Item(node_property("n1", "length"), "(10, 20]"),),
            consequent=Item(measurement("s1"), "(0, 1]"),
        )
        text = render_rule(r)
        assert "(n1:).length ∈ (10, 20]" in text
        assert "sensor(s1).value ∈ (0, 1]" in text
        assert "→" in text

    def test_categorical_uses_equals(self):
        r = Rule(
            antecedents=(Item(node_property("n1", "material"), "pvc"),),
            consequent=Item(measurement("s1"), "(0, 1]"),
        )
        assert "(n1:).material = pvc" in render_rule(r)

    def test_json_dict_shape(self):
        r = rule(["a", "b"], "y").with_metrics(
            compute_metrics(rule(["a", "b"], "y"), [tx("a", "b", "y"), tx("a")])
        )
        d = rule_to_dict(r)
        assert set(d) == {"antecedents", "consequent", "support", "confidence", "lift", "leverage", "zhangs_metric"}
        assert d["consequent"] == {"feature": "y", "class": "1"}
        assert len(d["antecedents"]) == 2
