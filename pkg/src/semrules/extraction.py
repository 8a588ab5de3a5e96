"""Rule extraction by probing a trained autoencoder with marked test vectors.

A test vector marks a set of candidate antecedent features with one-hot
class assignments and fills every other group with equal probabilities.
If, after a forward pass, some non-antecedent group reconstructs one of
its classes above the similarity threshold, the marked assignments are
taken to imply that class.

Marked feature groups are excluded as consequents: reading the probe
loop literally would let a marked feature reconstruct itself and emit
tautologies.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from semrules.rules import Rule, compute_metrics
from semrules.transactions import FeatureRegistry, TransactionError, TransactionSet

log = logging.getLogger(__name__)


class ExtractionError(ValueError):
    """Raised for invalid thresholds or probe construction."""


@dataclass(frozen=True)
class TestVector:
    """Probe input: marked (group, class) assignments, other groups uniform."""

    vector: np.ndarray
    marked: frozenset[tuple[int, str]]  # (group position, class value)


def make_test_vector(
    registry: FeatureRegistry,
    assignments: Sequence[tuple[int, str]],
) -> TestVector:
    """Build a probe vector; ``assignments`` are (group position, class value).

    Marked groups get 1 on the chosen class and 0 on its siblings;
    unmarked groups get 1/group_size everywhere.
    """
    positions = [pos for pos, _ in assignments]
    if len(set(positions)) != len(positions):
        raise ExtractionError(f"duplicate group in assignments: {positions}")

    vector = np.empty(registry.width, dtype=np.float64)
    for group in registry.groups:
        vector[group.start : group.end] = 1.0 / len(group.classes)
    for pos, value in assignments:
        if not 0 <= pos < len(registry.groups):
            raise ExtractionError(f"group position {pos} outside registry")
        group = registry.groups[pos]
        vector[group.start : group.end] = 0.0
        vector[group.index_of(value)] = 1.0
    return TestVector(vector=vector, marked=frozenset(assignments))


def extract_rules(
    model,
    transactions: TransactionSet,
    similarity_threshold: float,
    max_antecedents: int = 1,
) -> list[Rule]:
    """Probe the model over every unique transaction and antecedent combination.

    For each unique transaction and each combination of at most
    ``max_antecedents`` feature groups, a test vector copies the
    transaction's classes for the chosen groups; identical probes are
    evaluated once.  Every non-antecedent output group whose
    maximum-probability class exceeds the threshold yields a rule.
    Groups with tied maxima are skipped (no unique argmax).  The result
    is deduplicated and sorted by antecedent then consequent.

    ``model`` needs a ``registry`` attribute and a ``forward(vector)``
    method, which admits stub models in tests.
    """
    if not 0.0 < similarity_threshold < 1.0:
        raise ExtractionError(f"similarity threshold must be in (0, 1), got {similarity_threshold}")
    if max_antecedents < 1:
        raise ExtractionError(f"max antecedents must be >= 1, got {max_antecedents}")

    registry: FeatureRegistry = model.registry
    if registry.content_hash() != transactions.registry.content_hash():
        raise TransactionError("model registry does not match transaction registry")
    n_groups = len(registry.groups)
    if n_groups < 2:
        return []

    unique_rows = transactions.unique_categorical()
    tested: set[frozenset[tuple[int, str]]] = set()
    found: dict = {}

    for row in unique_rows:
        row_classes = [row[group.feature] for group in registry.groups]
        for size in range(1, min(max_antecedents, n_groups - 1) + 1):
            for combo in itertools.combinations(range(n_groups), size):
                assignments = tuple((pos, row_classes[pos]) for pos in combo)
                key = frozenset(assignments)
                if key in tested:
                    continue
                tested.add(key)
                probe = make_test_vector(registry, assignments)
                output = np.asarray(model.forward(probe.vector), dtype=np.float64)
                antecedent_set = set(combo)
                for pos, group in enumerate(registry.groups):
                    if pos in antecedent_set:
                        continue
                    probs = output[group.start : group.end]
                    best = float(probs.max())
                    if best <= similarity_threshold:
                        continue
                    if int((probs == best).sum()) != 1:
                        continue  # tied maxima: no unique winner
                    value = group.classes[int(np.argmax(probs))]
                    rule = Rule(
                        antecedents=tuple(
                            registry.item(registry.groups[p].feature, v) for p, v in assignments
                        ),
                        consequent=registry.item(group.feature, value),
                    )
                    found.setdefault(rule.key(), rule)

    return sorted(found.values(), key=Rule.sort_key)


def attach_metrics(rules: Sequence[Rule], transactions: TransactionSet) -> list[Rule]:
    """Annotate rules with the five counting metrics over the categorical rows.

    Rules whose antecedent never occurs (undefined confidence) are
    dropped with a logged diagnostic.
    """
    rows = transactions.categorical
    out: list[Rule] = []
    for rule in rules:
        metrics = compute_metrics(rule, rows)
        if metrics is None:
            log.warning("dropping rule with never-occurring antecedent: %s", rule.key())
            continue
        out.append(rule.with_metrics(metrics))
    return out
