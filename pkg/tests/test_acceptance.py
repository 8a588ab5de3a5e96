"""Acceptance suite: one test per criterion, each printing a pass line.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the per-criterion
lines; the numeric tolerances are pinned in the assertions.
"""

import dataclasses
import math
import random
import time

import numpy as np

from semrules.autoencoder import TrainConfig, backward, build_model, loss, train
from semrules.baselines import brute_force_mine, fp_growth, hho_mine
from semrules.benchmark import PlantedRule, SynthSpec, generate, planted_rule_as_rule
from semrules.cli import main
from semrules.extraction import attach_metrics, extract_rules
from semrules.pipeline import build_transactions
from semrules.rules import Item, Rule, compute_metrics, plain_item, rule_overlap
from semrules.transactions import FeatureRegistry, encode_one_hot

DEFAULT_TRAIN = TrainConfig(learning_rate=5e-3, epochs=20, weight_decay=2e-8, noise_factor=0.5, batch_size=64)

PLANTED_SPEC = SynthSpec(
    sources=6,
    nodes=10,
    transactions=2000,
    bins=5,
    planted=(PlantedRule(antecedents=(("s1", 1),), consequent=("s4", 3), confidence=1.0, support=0.3),),
)


def report(number: int, label: str, started: float) -> None:
    print(f"ACCEPTANCE {number:2d} PASS ({time.perf_counter() - started:6.2f}s): {label}")


def build_planted(seed: int):
    spec = dataclasses.replace(PLANTED_SPEC, seed=seed)
    dataset, graph, binding = generate(spec)
    transactions, schemes, _ = build_transactions(dataset, graph, binding, bins=spec.bins)
    planted = planted_rule_as_rule(spec.planted[0], schemes)
    return spec, transactions, planted


def test_01_worked_example_fidelity(two_group_registry):
    """Stubbed model output [0.8,0.2,0.9,0.04,0.06] at threshold 0.8 -> exactly f1(a) -> f2(c)."""
    started = time.perf_counter()

    class Stub:
        registry = two_group_registry

        def forward(self, vector):
            if np.allclose(vector, [1.0, 0.0, 1 / 3, 1 / 3, 1 / 3]):
                return np.array([0.8, 0.2, 0.9, 0.04, 0.06])
            out = np.empty(two_group_registry.width)
            for group in two_group_registry.groups:
                out[group.start : group.end] = 1.0 / len(group.classes)
            return out

    transactions = encode_one_hot(
        [{plain_item("f1"): "a", plain_item("f2"): "c"}], two_group_registry
    )
    rules = extract_rules(Stub(), transactions, 0.8, 1)
    assert len(rules) == 1
    assert [(i.feature.key(), i.value) for i in rules[0].antecedents] == [("f1", "a")]
    assert (rules[0].consequent.feature.key(), rules[0].consequent.value) == ("f2", "c")
    report(1, "worked-example fidelity", started)


def test_02_gradient_correctness():
    """Analytic backward vs central differences (h=1e-4), rel err <= 1e-3, >= 20 models <= 50 params."""
    started = time.perf_counter()
    registry = FeatureRegistry([(plain_item("f1"), ("a", "b")), (plain_item("f2"), ("c", "d", "e"))])
    rng = np.random.default_rng(1234)
    h = 1e-4
    models_checked = 0
    for trial in range(20):
        model = build_model(registry, hidden_dims=[2], seed=trial)
        assert sum(l.weights.size + l.bias.size for l in model.layers) <= 50
        x = rng.uniform(0, 1, registry.width)
        y = np.zeros(registry.width)
        y[rng.integers(0, 2)] = 1.0
        y[2 + rng.integers(0, 3)] = 1.0
        grads = backward(model, x, y)
        for li, layer in enumerate(model.layers):
            for arr, grad in ((layer.weights, grads[li][0]), (layer.bias, grads[li][1])):
                it = np.nditer(arr, flags=["multi_index"])
                for _ in it:
                    idx = it.multi_index
                    orig = arr[idx]
                    arr[idx] = orig + h
                    up = loss(model.forward(x), y)
                    arr[idx] = orig - h
                    down = loss(model.forward(x), y)
                    arr[idx] = orig
                    fd = (up - down) / (2 * h)
                    denom = max(abs(fd), abs(grad[idx]), 1e-6)
                    assert abs(fd - grad[idx]) / denom <= 1e-3
        models_checked += 1
    assert models_checked >= 20
    report(2, f"gradient vs finite differences on {models_checked} models", started)


def test_03_softmax_group_normalization():
    """1000 random (model, input) pairs: every output group sums to 1 +- 1e-6."""
    started = time.perf_counter()
    rng = np.random.default_rng(99)
    pairs = 0
    for model_seed in range(50):
        groups = [(plain_item(f"g{j}"), tuple(f"c{j}{i}" for i in range(int(rng.integers(2, 5))))) for j in range(int(rng.integers(2, 5)))]
        registry = FeatureRegistry(groups)
        model = build_model(registry, seed=model_seed)
        batch = rng.uniform(0, 1, size=(20, registry.width))
        outputs = model.forward_batch(batch)
        for sl in registry.slices():
            sums = outputs[:, sl].sum(axis=1)
            assert np.all(np.abs(sums - 1.0) <= 1e-6)
        pairs += batch.shape[0]
    assert pairs == 1000
    report(3, "softmax group normalization on 1000 pairs", started)


def test_04_fp_growth_oracle_equivalence():
    """fp_growth == brute_force_mine (rules and metrics, tol 1e-12) on 100 random sets."""
    started = time.perf_counter()
    rng = random.Random(20240817)
    for trial in range(100):
        m = rng.randint(3, 12)
        items = [chr(97 + i) for i in range(m)]
        n = rng.randint(5, 200)
        D = [set(rng.sample(items, rng.randint(1, min(6, m)))) for _ in range(n)]
        min_support = rng.choice([0.1, 0.15, 0.2, 0.3, 0.5])
        min_confidence = rng.choice([0.3, 0.5, 0.7, 0.9])
        fp = {r.key(): r.metrics for r in fp_growth(D, min_support, min_confidence)}
        bf = {r.key(): r.metrics for r in brute_force_mine(D, min_support, min_confidence)}
        assert set(fp) == set(bf)
        for key, metrics in fp.items():
            other = bf[key]
            for field in ("support", "confidence", "lift", "leverage", "zhangs_metric"):
                a, b = getattr(metrics, field), getattr(other, field)
                if a is None or b is None:
                    assert a == b
                else:
                    assert abs(a - b) <= 1e-12
    report(4, "FP-Growth equals brute-force oracle on 100 sets", started)


def test_05_metric_formulas():
    """Five metrics match a naive recount oracle on 100 random rules, plus closed forms."""
    started = time.perf_counter()
    rng = np.random.default_rng(77)
    names = ["a", "b", "c", "d", "e"]
    checked = 0
    while checked < 100:
        n = int(rng.integers(2, 80))
        D = [{plain_item(x): str(rng.integers(0, 3)) for x in names} for _ in range(n)]
        k = int(rng.integers(1, 3))
        ants = rng.choice(names[:4], size=k, replace=False).tolist()
        rule = Rule(
            antecedents=tuple(Item(plain_item(a), str(rng.integers(0, 3))) for a in ants),
            consequent=Item(plain_item("e"), str(rng.integers(0, 3))),
        )
        # naive recount oracle: literal definition loops
        holds_x = [all(t[i.feature] == i.value for i in rule.antecedents) for t in D]
        holds_y = [t[rule.consequent.feature] == rule.consequent.value for t in D]
        n_x, n_y = sum(holds_x), sum(holds_y)
        n_xy = sum(x and y for x, y in zip(holds_x, holds_y))
        metrics = compute_metrics(rule, D)
        if n_x == 0:
            assert metrics is None
            continue
        checked += 1
        assert metrics.support == n_xy / n
        assert metrics.confidence == n_xy / n_x
        if n_y:
            assert abs(metrics.lift - (n_xy / n_x) / (n_y / n)) <= 1e-12
        else:
            assert metrics.lift is None
        assert abs(metrics.leverage - (n_xy / n - (n_x / n) * (n_y / n))) <= 1e-12
        if n_x < n and max(n_xy / n_x, (n_y - n_xy) / (n - n_x)) > 0:
            conf, conf_not = n_xy / n_x, (n_y - n_xy) / (n - n_x)
            assert abs(metrics.zhangs_metric - (conf - conf_not) / max(conf, conf_not)) <= 1e-12

    def tx(*present):
        return {plain_item(p): "1" for p in present}

    independent = [tx("x", "y"), tx("x"), tx("y"), tx()]
    coupled = [tx("x", "y"), tx("x", "y"), tx(), tx()]
    dissociated = [tx("x"), tx("x"), tx("y"), tx("y")]
    probe = Rule(antecedents=(Item(plain_item("x"), "1"),), consequent=Item(plain_item("y"), "1"))
    m_ind = compute_metrics(probe, independent)
    assert m_ind.lift == 1.0 and m_ind.leverage == 0.0 and m_ind.zhangs_metric == 0.0
    assert compute_metrics(probe, coupled).zhangs_metric == 1.0
    assert compute_metrics(probe, dissociated).zhangs_metric == -1.0
    report(5, "metric formulas vs recount oracle + closed forms", started)


def test_06_planted_rule_recovery():
    """Paper-default training, threshold 0.8, 1 antecedent: planted rule on >= 4 of 5 seeds."""
    started = time.perf_counter()
    hits = 0
    for seed in range(5):
        spec, transactions, planted = build_planted(seed)
        model = train(transactions, dataclasses.replace(DEFAULT_TRAIN, seed=seed))
        rules = extract_rules(model, transactions, 0.8, 1)
        hits += planted.key() in {r.key() for r in rules}
    assert hits >= 4
    report(6, f"planted-rule recovery on {hits}/5 seeds", started)


def test_07_quality_floor():
    """Mean extracted confidence >= 0.85 and overlap vs FP-Growth(0.2) >= 0.5 over 10 seeds."""
    started = time.perf_counter()
    confidences, overlaps = [], []
    for seed in range(10):
        spec, transactions, _ = build_planted(seed)
        model = train(transactions, dataclasses.replace(DEFAULT_TRAIN, seed=seed))
        ae_rules = attach_metrics(extract_rules(model, transactions, 0.8, 1), transactions)
        fp_rules = fp_growth(transactions, 0.2, 0.8)
        if ae_rules:
            confidences.append(sum(r.metrics.confidence for r in ae_rules) / len(ae_rules))
        if fp_rules:
            overlaps.append(rule_overlap(fp_rules, ae_rules))
    assert confidences and sum(confidences) / len(confidences) >= 0.85
    assert overlaps and sum(overlaps) / len(overlaps) >= 0.5
    report(
        7,
        f"quality floor: mean conf {sum(confidences)/len(confidences):.3f}, "
        f"mean overlap {sum(overlaps)/len(overlaps):.3f}",
        started,
    )


def test_08_threshold_monotonicity():
    """On one trained model: rules(0.5) superset of rules(0.9); counts non-increasing in threshold."""
    started = time.perf_counter()
    _, transactions, _ = build_planted(3)
    model = train(transactions, dataclasses.replace(DEFAULT_TRAIN, seed=3))
    thresholds = [0.9, 0.8, 0.7, 0.6, 0.5]
    rule_sets = {t: {r.key() for r in extract_rules(model, transactions, t, 1)} for t in thresholds}
    assert rule_sets[0.9] <= rule_sets[0.5]
    counts = [len(rule_sets[t]) for t in thresholds]
    assert all(a <= b for a, b in zip(counts, counts[1:]))
    for hi, lo in zip(thresholds, thresholds[1:]):
        assert rule_sets[hi] <= rule_sets[lo]
    report(8, f"threshold monotonicity (counts {counts} at {thresholds})", started)


def _banded_fp_spec(seed: int = 0) -> SynthSpec:
    planted = []
    src = 1
    for _ in range(2):  # frequent from min_support 0.4 down
        planted.append(
            PlantedRule(antecedents=((f"s{src}", 0),), consequent=(f"s{src + 1}", 4), confidence=1.0, support=0.45)
        )
        src += 2
    for _ in range(6):  # joins at 0.3; two antecedents deepen the mining
        planted.append(
            PlantedRule(
                antecedents=((f"s{src}", 0), (f"s{src + 1}", 0)),
                consequent=(f"s{src + 2}", 4),
                confidence=1.0,
                support=0.34,
            )
        )
        src += 3
    for _ in range(6):  # joins at 0.2
        planted.append(
            PlantedRule(antecedents=((f"s{src}", 0),), consequent=(f"s{src + 1}", 4), confidence=1.0, support=0.25)
        )
        src += 2
    return SynthSpec(sources=src - 1, nodes=src, transactions=2500, bins=5, planted=tuple(planted), seed=seed)


def test_09_scaling_shape():
    """Extractor time strictly grows with max_antecedents; FP time grows as support drops."""
    started = time.perf_counter()

    _, transactions, _ = build_planted(0)
    model = train(transactions, DEFAULT_TRAIN)
    extractor_times = []
    for cap in (1, 2, 3):
        best = math.inf
        for _ in range(3):
            t0 = time.perf_counter()
            extract_rules(model, transactions, 0.8, cap)
            best = min(best, time.perf_counter() - t0)
        extractor_times.append(best)
    assert extractor_times[0] < extractor_times[1] < extractor_times[2]

    spec = _banded_fp_spec()
    dataset, graph, binding = generate(spec)
    fp_transactions, _, _ = build_transactions(dataset, graph, binding, bins=spec.bins, neighbor_depth=0)
    fp_times = []
    for min_support in (0.4, 0.3, 0.2):
        best = math.inf
        for _ in range(5):
            t0 = time.perf_counter()
            fp_growth(fp_transactions, min_support, 0.8)
            best = min(best, time.perf_counter() - t0)
        fp_times.append(best)
    assert fp_times[0] < fp_times[1] < fp_times[2]
    report(
        9,
        "scaling shapes: extractor "
        + "/".join(f"{t * 1000:.0f}ms" for t in extractor_times)
        + " over antecedents 1-3, FP-Growth "
        + "/".join(f"{t * 1000:.0f}ms" for t in fp_times)
        + " over support 0.4/0.3/0.2",
        started,
    )


def test_10_determinism(tmp_path):
    """Identical (config, seed) -> byte-identical rules across two full pipeline runs."""
    started = time.perf_counter()
    outputs = []
    for name in ("one", "two"):
        out = tmp_path / name
        cfg = tmp_path / f"{name}.toml"
        cfg.write_text(
            f'seed = 11\noutput_dir = "{out}"\nbins = 5\n'
            "[synth]\nsources = 6\nnodes = 10\ntransactions = 2000\n"
            'planted = [{antecedents = [["s1", 1]], consequent = ["s4", 3], confidence = 1.0, support = 0.3}]\n'
            "[train]\nepochs = 20\nbatch_size = 64\n"
        )
        assert main(["pipeline", "--config", str(cfg)]) == 0
        outputs.append((out / "rules.jsonl").read_bytes())
    assert outputs[0] == outputs[1] and outputs[0]
    report(10, "byte-identical pipeline reruns", started)


def test_11_hho_sanity():
    """Population 50, 2000 iterations: planted rule on >= 4 of 5 seeds; fitness == confidence."""
    started = time.perf_counter()
    hits = 0
    for seed in range(5):
        spec, transactions, planted = build_planted(seed)
        run = hho_mine(transactions, 50, 2000, seed=seed)
        hits += planted.key() in {r.key() for r in run.rules}
        for rule in run.rules:
            assert abs(rule.metrics.confidence - run.fitness_by_key[rule.key()]) <= 1e-12
    assert hits >= 4
    report(11, f"HHO sanity: planted rule on {hits}/5 seeds, fitness consistent", started)
