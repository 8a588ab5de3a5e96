"""Association rule data model and frequency-based quality metrics.

A rule is ``X -> Y`` with a non-empty antecedent item list X and exactly
one consequent item Y.  Metric counting runs over categorical
transactions (maps feature -> class value), never over one-hot floats,
so counts are exact integers.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from typing import Iterable, Mapping, Sequence


class RuleError(ValueError):
    """Raised for structurally invalid items or rules."""


class UndefinedMetric(ArithmeticError):
    """Raised when a metric's denominator is empty (caller drops or flags)."""


@dataclass(frozen=True, order=True)
class Feature:
    """Descriptor of one transaction feature (one softmax group).

    Kinds: measurement(source), node_property(node, prop),
    neighbor_property(node, neighbor, prop), node_label(node),
    edge_label(edge), edge_presence(node, other), and plain "item" for
    generic itemset mining.
    """

    kind: str
    ids: tuple[str, ...]

    def key(self) -> str:
        k, ids = self.kind, self.ids
        if k == "measurement":
            return f"measurement({ids[0]})"
        if k == "node_property":
            return f"node({ids[0]}).{ids[1]}"
        if k == "neighbor_property":
            return f"neighbor({ids[0]},{ids[1]}).{ids[2]}"
        if k == "node_label":
            return f"label({ids[0]})"
        if k == "edge_label":
            return f"edge_label({ids[0]})"
        if k == "edge_presence":
            return f"edge({ids[0]},{ids[1]})"
        return ids[0]


def measurement(source: str) -> Feature:
    return Feature("measurement", (source,))


def node_property(node: str, prop: str) -> Feature:
    return Feature("node_property", (node, prop))


def neighbor_property(node: str, neighbor: str, prop: str) -> Feature:
    return Feature("neighbor_property", (node, neighbor, prop))


def node_label(node: str) -> Feature:
    return Feature("node_label", (node,))


def edge_label(edge: str) -> Feature:
    return Feature("edge_label", (edge,))


def edge_presence(node: str, other: str) -> Feature:
    return Feature("edge_presence", (node, other))


def plain_item(token: str) -> Feature:
    return Feature("item", (token,))


@dataclass(frozen=True, order=True)
class Item:
    """One feature-class assignment; matching is equality on (feature, value).

    The comparison operator is presentational: bin-interval values render
    with the set-membership form, plain categorical values with equality.
    Raw ordering comparisons are representable via ``op`` but the
    pipeline never produces them.
    """

    feature: Feature
    value: str
    op: str | None = None

    def render_op(self) -> str:
        if self.op is not None:
            return self.op
        if self.value.startswith("(") and self.value.endswith("]"):
            return "∈"
        return "="


@dataclass(frozen=True)
class RuleMetrics:
    support: float
    confidence: float
    lift: float | None
    leverage: float
    zhangs_metric: float | None


@dataclass(frozen=True)
class Rule:
    antecedents: tuple[Item, ...]
    consequent: Item
    metrics: RuleMetrics | None = None

    def __post_init__(self) -> None:
        if not self.antecedents:
            raise RuleError("rule needs at least one antecedent")
        if any(item.feature == self.consequent.feature for item in self.antecedents):
            raise RuleError(f"consequent feature {self.consequent.feature.key()} appears in antecedents")

    def key(self) -> tuple[frozenset[tuple[Feature, str]], tuple[Feature, str]]:
        return (
            frozenset((item.feature, item.value) for item in self.antecedents),
            (self.consequent.feature, self.consequent.value),
        )

    def sort_key(self) -> tuple:
        ants = tuple(sorted((item.feature.key(), item.value) for item in self.antecedents))
        return (len(ants), ants, (self.consequent.feature.key(), self.consequent.value))

    def with_metrics(self, metrics: RuleMetrics) -> "Rule":
        return replace(self, metrics=metrics)


Transaction = Mapping[Feature, str]


def _holds(items: Iterable[Item], transaction: Transaction) -> bool:
    return all(transaction.get(item.feature) == item.value for item in items)


def _counts(rule: Rule, transactions: Sequence[Transaction]) -> tuple[int, int, int, int]:
    if not transactions:
        raise UndefinedMetric("empty transaction set")
    n = len(transactions)
    n_x = n_y = n_xy = 0
    for t in transactions:
        x = _holds(rule.antecedents, t)
        y = _holds((rule.consequent,), t)
        n_x += x
        n_y += y
        n_xy += x and y
    return n, n_x, n_y, n_xy


def support(rule: Rule, transactions: Sequence[Transaction]) -> float:
    """Fraction of transactions where the whole rule (X and Y) holds."""
    n, _, _, n_xy = _counts(rule, transactions)
    return n_xy / n


def confidence(rule: Rule, transactions: Sequence[Transaction]) -> float:
    """Conditional frequency of Y among transactions where X holds."""
    _, n_x, _, n_xy = _counts(rule, transactions)
    if n_x == 0:
        raise UndefinedMetric("antecedent never occurs")
    return n_xy / n_x


def lift(rule: Rule, transactions: Sequence[Transaction]) -> float:
    """confidence / support(Y); 1 means X and Y are independent."""
    n, n_x, n_y, n_xy = _counts(rule, transactions)
    if n_x == 0:
        raise UndefinedMetric("antecedent never occurs")
    if n_y == 0:
        raise UndefinedMetric("consequent never occurs")
    return (n_xy / n_x) / (n_y / n)


def leverage(rule: Rule, transactions: Sequence[Transaction]) -> float:
    """support(X and Y) minus the product of the marginal supports."""
    n, n_x, n_y, n_xy = _counts(rule, transactions)
    return n_xy / n - (n_x / n) * (n_y / n)


def zhangs_metric(rule: Rule, transactions: Sequence[Transaction]) -> float:
    """Association-vs-dissociation score in [-1, 1].

    (conf(X->Y) - conf(notX->Y)) / max(conf(X->Y), conf(notX->Y)), where
    notX are the transactions in which X does not hold.
    """
    n, n_x, n_y, n_xy = _counts(rule, transactions)
    if n_x == 0:
        raise UndefinedMetric("antecedent never occurs")
    if n_x == n:
        raise UndefinedMetric("antecedent holds everywhere; complement is empty")
    conf = n_xy / n_x
    conf_not = (n_y - n_xy) / (n - n_x)
    denom = max(conf, conf_not)
    if denom == 0.0:
        raise UndefinedMetric("both confidences are zero")
    return (conf - conf_not) / denom


def compute_metrics(rule: Rule, transactions: Sequence[Transaction]) -> RuleMetrics | None:
    """All five metrics in one counting pass.

    Returns None when confidence is undefined (the antecedent never
    occurs); lift and Zhang's metric are individually None when their
    own denominators vanish.
    """
    n, n_x, n_y, n_xy = _counts(rule, transactions)
    if n_x == 0:
        return None
    conf = n_xy / n_x
    lift_value = conf / (n_y / n) if n_y else None
    lev = n_xy / n - (n_x / n) * (n_y / n)
    zhangs: float | None = None
    if n_x < n:
        conf_not = (n_y - n_xy) / (n - n_x)
        denom = max(conf, conf_not)
        if denom > 0.0:
            zhangs = (conf - conf_not) / denom
    return RuleMetrics(
        support=n_xy / n,
        confidence=conf,
        lift=lift_value,
        leverage=lev,
        zhangs_metric=zhangs,
    )


def rule_overlap(reference_rules: Sequence[Rule], candidate_rules: Sequence[Rule]) -> float:
    """Fraction of reference rules exactly matched (antecedent set + consequent)."""
    if not reference_rules:
        raise UndefinedMetric("empty reference rule set")
    candidate_keys = {rule.key() for rule in candidate_rules}
    matched = sum(1 for rule in reference_rules if rule.key() in candidate_keys)
    return matched / len(reference_rules)


# --- rendering and serialization -------------------------------------------


def render_item(item: Item, graph=None) -> str:
    feature, value = item.feature, item.value
    op = item.render_op()
    label = _label_of(graph, feature.ids[0]) if graph is not None else ""
    if feature.kind == "measurement":
        return f"sensor({feature.ids[0]}).value {op} {value}"
    if feature.kind == "node_property":
        return f"({feature.ids[0]}:{label}).{feature.ids[1]} {op} {value}"
    if feature.kind == "neighbor_property":
        nb_label = _label_of(graph, feature.ids[1]) if graph is not None else ""
        return f"({feature.ids[0]}:)~({feature.ids[1]}:{nb_label}).{feature.ids[2]} {op} {value}"
    if feature.kind == "node_label":
        return f"({feature.ids[0]}:{value})"
    if feature.kind == "edge_label":
        return f"({feature.ids[0]}:{value})"
    if feature.kind == "edge_presence":
        arrow = f"({feature.ids[0]}:) → ({feature.ids[1]}:)"
        return arrow if value == "present" else f"¬({arrow})"
    return f"{feature.key()} {op} {value}"


def render_rule(rule: Rule, graph=None) -> str:
    body = " ∧ ".join(render_item(item, graph) for item in rule.antecedents)
    return f"{body} → {render_item(rule.consequent, graph)}"


def _label_of(graph, item_id: str) -> str:
    labels = graph.labels_of(item_id) if hasattr(graph, "labels_of") else frozenset()
    return "&".join(sorted(labels))


def rule_to_dict(rule: Rule) -> dict:
    out: dict = {
        "antecedents": [
            {"feature": item.feature.key(), "class": item.value}
            for item in sorted(rule.antecedents, key=lambda i: (i.feature.key(), i.value))
        ],
        "consequent": {"feature": rule.consequent.feature.key(), "class": rule.consequent.value},
    }
    m = rule.metrics
    if m is not None:
        out["support"] = m.support
        out["confidence"] = m.confidence
        out["lift"] = m.lift
        out["leverage"] = m.leverage
        out["zhangs_metric"] = m.zhangs_metric
    return out


def rules_to_jsonl(rules: Sequence[Rule]) -> str:
    return "".join(json.dumps(rule_to_dict(rule), ensure_ascii=False) + "\n" for rule in rules)
