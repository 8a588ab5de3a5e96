"""Baseline miners: FP-Growth, an exhaustive oracle, and Harris-hawks search.

FP-Growth and the brute-force oracle accept either a TransactionSet
(items become (feature, class) pairs) or a plain sequence of itemsets,
and must produce identical rule sets on any input small enough for the
oracle.  The two are kept as fully separate code paths on purpose: one
checks the other.
"""

from __future__ import annotations

import math
import time
from collections import Counter
from dataclasses import dataclass
from typing import Hashable

import numpy as np

from semrules.rules import Feature, Item, Rule, RuleMetrics, compute_metrics, plain_item
from semrules.transactions import TransactionSet


class BaselineError(ValueError):
    """Raised for invalid thresholds, empty data, or oversized oracle input."""


BRUTE_FORCE_MAX_ITEMS = 16


def _as_itemsets(dataset) -> list[frozenset]:
    if isinstance(dataset, TransactionSet):
        return [frozenset(row.items()) for row in dataset.categorical]
    return [frozenset(t) for t in dataset]


def _stable_key(item: Hashable) -> str:
    if isinstance(item, tuple) and len(item) == 2 and isinstance(item[0], Feature):
        return f"{item[0].key()}::{item[1]}"
    return str(item)


def _wrap_item(item: Hashable) -> Item:
    if isinstance(item, tuple) and len(item) == 2 and isinstance(item[0], Feature):
        return Item(feature=item[0], value=str(item[1]))
    return Item(feature=plain_item(str(item)), value=str(item))


def _check_thresholds(min_support: float, min_confidence: float) -> None:
    if not 0.0 < min_support <= 1.0:
        raise BaselineError(f"min_support must be in (0, 1], got {min_support}")
    if not 0.0 < min_confidence <= 1.0:
        raise BaselineError(f"min_confidence must be in (0, 1], got {min_confidence}")


# --- FP-Growth --------------------------------------------------------------


class _FPNode:
    __slots__ = ("item", "count", "parent", "children")

    def __init__(self, item, parent):
        self.item = item
        self.count = 0
        self.parent = parent
        self.children: dict = {}


def _fp_frequent_itemsets(
    itemsets: list[frozenset],
    n: int,
    min_support: float,
) -> dict[frozenset, int]:
    """All frequent itemsets with counts, mined via conditional FP-trees."""

    def is_frequent(count: int) -> bool:
        return count / n >= min_support

    results: dict[frozenset, int] = {}

    def recurse(tx_counts: list[tuple[tuple, int]], suffix: frozenset) -> None:
        counts: Counter = Counter()
        for items, c in tx_counts:
            for item in items:
                counts[item] += c
        frequent = {item: c for item, c in counts.items() if is_frequent(c)}
        if not frequent:
            return
        # Descending frequency, ties broken lexicographically: deterministic trees.
        order = sorted(frequent, key=lambda it: (-frequent[it], _stable_key(it)))
        rank = {item: i for i, item in enumerate(order)}

        root = _FPNode(None, None)
        header: dict = {item: [] for item in order}
        compact: Counter = Counter()
        for items, c in tx_counts:
            filtered = tuple(sorted((it for it in items if it in frequent), key=rank.__getitem__))
            if filtered:
                compact[filtered] += c
        for filtered, c in compact.items():
            node = root
            for item in filtered:
                child = node.children.get(item)
                if child is None:
                    child = _FPNode(item, node)
                    node.children[item] = child
                    header[item].append(child)
                child.count += c
                node = child

        for item in reversed(order):
            new_suffix = suffix | {item}
            results[frozenset(new_suffix)] = frequent[item]
            base: list[tuple[tuple, int]] = []
            for node in header[item]:
                path = []
                parent = node.parent
                while parent is not None and parent.item is not None:
                    path.append(parent.item)
                    parent = parent.parent
                if path:
                    base.append((tuple(reversed(path)), node.count))
            if base:
                recurse(base, frozenset(new_suffix))

    recurse([(tuple(t), 1) for t in itemsets], frozenset())
    return results


def fp_growth(dataset, min_support: float, min_confidence: float) -> list[Rule]:
    """All rules X -> Y (|Y| = 1) passing both thresholds, via FP-tree mining."""
    _check_thresholds(min_support, min_confidence)
    itemsets = _as_itemsets(dataset)
    n = len(itemsets)
    if n == 0:
        return []
    frequent = _fp_frequent_itemsets(itemsets, n, min_support)

    rules: list[Rule] = []
    for itemset, n_xy in frequent.items():
        if len(itemset) < 2:
            continue
        for consequent in itemset:
            antecedent = itemset - {consequent}
            n_x = frequent[antecedent]
            conf = n_xy / n_x
            if conf < min_confidence:
                continue
            n_y = frequent[frozenset([consequent])]
            lift_value = conf / (n_y / n)
            lev = n_xy / n - (n_x / n) * (n_y / n)
            zhangs = None
            if n_x < n:
                conf_not = (n_y - n_xy) / (n - n_x)
                denom = max(conf, conf_not)
                if denom > 0.0:
                    zhangs = (conf - conf_not) / denom
            rules.append(
                Rule(
                    antecedents=tuple(sorted((_wrap_item(it) for it in antecedent))),
                    consequent=_wrap_item(consequent),
                    metrics=RuleMetrics(
                        support=n_xy / n,
                        confidence=conf,
                        lift=lift_value,
                        leverage=lev,
                        zhangs_metric=zhangs,
                    ),
                )
            )
    rules.sort(key=Rule.sort_key)
    return rules


# --- exhaustive oracle ------------------------------------------------------


def brute_force_mine(dataset, min_support: float, min_confidence: float) -> list[Rule]:
    """Exhaustive enumeration of every itemset and single-consequent rule.

    Refuses more than 16 distinct items; this is a test oracle, not a
    production miner, and deliberately shares no mining code with
    :func:`fp_growth`.
    """
    _check_thresholds(min_support, min_confidence)
    itemsets = _as_itemsets(dataset)
    n = len(itemsets)
    if n == 0:
        raise BaselineError("empty dataset")
    items = sorted({item for t in itemsets for item in t}, key=_stable_key)
    if len(items) > BRUTE_FORCE_MAX_ITEMS:
        raise BaselineError(f"{len(items)} distinct items exceed the oracle limit of {BRUTE_FORCE_MAX_ITEMS}")
    index = {item: j for j, item in enumerate(items)}

    distinct: Counter = Counter(itemsets)
    tx_masks = np.zeros(len(distinct), dtype=np.int64)
    multiplicity = np.zeros(len(distinct), dtype=np.int64)
    for row, (t, mult) in enumerate(distinct.items()):
        multiplicity[row] = mult
        for item in t:
            tx_masks[row] |= 1 << index[item]

    # Every non-empty itemset as a bitmask; count = transactions containing it.
    all_masks = np.arange(1, 1 << len(items), dtype=np.int64)
    count_by_mask = np.zeros(all_masks.shape[0] + 1, dtype=np.int64)
    chunk = 4096
    for start in range(0, all_masks.shape[0], chunk):
        masks = all_masks[start : start + chunk, None]
        hits = (tx_masks[None, :] & masks) == masks
        count_by_mask[start + 1 : start + 1 + masks.shape[0]] = hits @ multiplicity

    def itemset_of(mask: int) -> frozenset:
        return frozenset(items[j] for j in range(len(items)) if mask >> j & 1)

    counts: dict[frozenset, int] = {
        itemset_of(int(mask)): int(count_by_mask[mask]) for mask in all_masks
    }

    rules: list[Rule] = []
    for itemset, n_xy in counts.items():
        if len(itemset) < 2 or n_xy / n < min_support:
            continue
        for consequent in itemset:
            antecedent = itemset - {consequent}
            n_x = counts[antecedent]
            conf = n_xy / n_x
            if conf < min_confidence:
                continue
            n_y = counts[frozenset([consequent])]
            lift_value = conf / (n_y / n)
            lev = n_xy / n - (n_x / n) * (n_y / n)
            zhangs = None
            if n_x < n:
                conf_not = (n_y - n_xy) / (n - n_x)
                denom = max(conf, conf_not)
                if denom > 0.0:
                    zhangs = (conf - conf_not) / denom
            rules.append(
                Rule(
                    antecedents=tuple(sorted((_wrap_item(it) for it in antecedent))),
                    consequent=_wrap_item(consequent),
                    metrics=RuleMetrics(
                        support=n_xy / n,
                        confidence=conf,
                        lift=lift_value,
                        leverage=lev,
                        zhangs_metric=zhangs,
                    ),
                )
            )
    rules.sort(key=Rule.sort_key)
    return rules


# --- Harris hawks optimization ----------------------------------------------


@dataclass
class HHORun:
    """Every distinct valid rule discovered during the run, plus run stats."""

    rules: list[Rule]
    fitness_by_key: dict
    iterations: int
    evaluations: int
    wall_time_s: float
    best_fitness: float


def _levy(dim: int, rng: np.random.Generator) -> np.ndarray:
    beta = 1.5
    sigma = (
        math.gamma(1 + beta)
        * math.sin(math.pi * beta / 2)
        / (math.gamma((1 + beta) / 2) * beta * 2 ** ((beta - 1) / 2))
    ) ** (1 / beta)
    u = rng.standard_normal(dim) * sigma
    v = rng.standard_normal(dim)
    return 0.01 * u / np.abs(v) ** (1 / beta)


def hho_mine(
    dataset: TransactionSet,
    population: int,
    max_iterations: int,
    seed: int = 0,
) -> HHORun:
    """Mine rules by Harris-hawks search over a real-vector rule encoding.

    Encoding: 3 reals per feature group in [0, 1] — a role selector
    (absent / antecedent / consequent over thirds), a class selector
    (scaled index), and an inclusion strength gating the group at 0.5.
    Decodes without at least one antecedent and exactly one consequent
    are invalid and score 0; otherwise fitness is the rule's confidence
    over the dataset (0 when undefined).  All distinct valid rules seen
    across the run are returned with full metrics attached.
    """
    if population < 2:
        raise BaselineError(f"population must be >= 2, got {population}")
    if max_iterations < 1:
        raise BaselineError(f"max_iterations must be >= 1, got {max_iterations}")

    registry = dataset.registry
    groups = registry.groups
    m = len(groups)
    started = time.perf_counter()
    if m < 2 or len(dataset) == 0:
        return HHORun([], {}, max_iterations, 0, time.perf_counter() - started, 0.0)

    presence = dataset.matrix >= 0.5
    rng = np.random.default_rng(seed)
    dim = 3 * m
    discovered: dict[tuple, float] = {}
    evaluations = 0

    def decode(vec: np.ndarray):
        antecedents: list[tuple[int, int]] = []
        consequents: list[tuple[int, int]] = []
        for i, group in enumerate(groups):
            role, cls, strength = vec[3 * i], vec[3 * i + 1], vec[3 * i + 2]
            if strength < 0.5 or role < 1 / 3:
                continue
            class_idx = min(int(cls * len(group.classes)), len(group.classes) - 1)
            if role < 2 / 3:
                antecedents.append((i, class_idx))
            else:
                consequents.append((i, class_idx))
        if not antecedents or len(consequents) != 1:
            return None
        return tuple(antecedents), consequents[0]

    def objective(vec: np.ndarray) -> float:
        """Negated confidence (HHO minimizes); invalid or undefined decodes give 0."""
        nonlocal evaluations
        evaluations += 1
        decoded = decode(vec)
        if decoded is None:
            return 0.0
        antecedents, consequent = decoded
        cols = [groups[i].start + ci for i, ci in antecedents]
        mask = presence[:, cols[0]] if len(cols) == 1 else presence[:, cols].all(axis=1)
        n_x = int(mask.sum())
        if n_x == 0:
            return 0.0
        ccol = groups[consequent[0]].start + consequent[1]
        n_xy = int((mask & presence[:, ccol]).sum())
        conf = n_xy / n_x
        discovered.setdefault((frozenset(antecedents), consequent), conf)
        return -conf

    hawks = rng.uniform(0.0, 1.0, size=(population, dim))
    fitness = np.zeros(population)
    best_vec = hawks[0].copy()
    best_fit = math.inf

    for t in range(max_iterations):
        np.clip(hawks, 0.0, 1.0, out=hawks)
        for i in range(population):
            fitness[i] = objective(hawks[i])
            if fitness[i] < best_fit:
                best_fit = fitness[i]
                best_vec = hawks[i].copy()

        e1 = 2.0 * (1.0 - t / max_iterations)
        mean_pos = hawks.mean(axis=0)
        for i in range(population):
            e0 = 2.0 * rng.random() - 1.0
            energy = e1 * e0
            if abs(energy) >= 1.0:
                # Exploration: perch relative to a random hawk, or on a random
                # tall tree.  The canonical tall-tree formula collapses toward
                # the origin under unit bounds, so a fresh uniform position
                # stands in for it; the energy schedule is unchanged.
                if rng.random() < 0.5:
                    j = int(rng.integers(population))
                    hawks[i] = hawks[j] - rng.random() * np.abs(hawks[j] - 2.0 * rng.random() * hawks[i])
                else:
                    hawks[i] = rng.uniform(0.0, 1.0, dim)
            else:
                r = rng.random()
                if r >= 0.5 and abs(energy) >= 0.5:
                    # Soft besiege.
                    jump = 2.0 * (1.0 - rng.random())
                    hawks[i] = (best_vec - hawks[i]) - energy * np.abs(jump * best_vec - hawks[i])
                elif r >= 0.5:
                    # Hard besiege.
                    hawks[i] = best_vec - energy * np.abs(best_vec - hawks[i])
                elif abs(energy) >= 0.5:
                    # Soft besiege with progressive rapid dives.
                    jump = 2.0 * (1.0 - rng.random())
                    y = np.clip(best_vec - energy * np.abs(jump * best_vec - hawks[i]), 0.0, 1.0)
                    if objective(y) < fitness[i]:
                        hawks[i] = y
                    else:
                        z = np.clip(y + rng.random(dim) * _levy(dim, rng), 0.0, 1.0)
                        if objective(z) < fitness[i]:
                            hawks[i] = z
                else:
                    # Hard besiege with progressive rapid dives.
                    jump = 2.0 * (1.0 - rng.random())
                    y = np.clip(best_vec - energy * np.abs(jump * best_vec - mean_pos), 0.0, 1.0)
                    if objective(y) < fitness[i]:
                        hawks[i] = y
                    else:
                        z = np.clip(y + rng.random(dim) * _levy(dim, rng), 0.0, 1.0)
                        if objective(z) < fitness[i]:
                            hawks[i] = z

    np.clip(hawks, 0.0, 1.0, out=hawks)
    for i in range(population):
        objective(hawks[i])

    rules: list[Rule] = []
    fitness_by_key: dict = {}
    for (antecedents, consequent), conf in discovered.items():
        rule = Rule(
            antecedents=tuple(
                sorted(
                    registry.item(groups[i].feature, groups[i].classes[ci])
                    for i, ci in antecedents
                )
            ),
            consequent=registry.item(groups[consequent[0]].feature, groups[consequent[0]].classes[consequent[1]]),
        )
        metrics = compute_metrics(rule, dataset.categorical)
        if metrics is None:
            continue
        rule = rule.with_metrics(metrics)
        rules.append(rule)
        fitness_by_key[rule.key()] = conf
    rules.sort(key=Rule.sort_key)
    return HHORun(
        rules=rules,
        fitness_by_key=fitness_by_key,
        iterations=max_iterations,
        evaluations=evaluations,
        wall_time_s=time.perf_counter() - started,
        best_fitness=-best_fit,
    )
