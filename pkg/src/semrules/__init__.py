"""Semantic association rule learning from time series and a property graph.

The library turns sensor-style time series plus a property graph into
one-hot transactions, trains a denoising under-complete autoencoder on
them, and reads association rules back out of the trained network by
probing it with marked test vectors.  FP-Growth, an exhaustive oracle
miner, and a Harris-hawks metaheuristic serve as baselines, and a
benchmark harness compares all of them on synthetic data with planted
rules.
"""

from semrules.graph import Binding, PropertyGraph, Schema, ValidationReport, neighbors, validate_graph
from semrules.ingest import BinScheme, TimeSeriesDataset, discretize, fit_equal_frequency_bins, parse_timeseries
from semrules.rules import Feature, Item, Rule, RuleMetrics, compute_metrics, rule_overlap
from semrules.transactions import FeatureRegistry, TransactionSet, corrupt, encode_one_hot, enrich
from semrules.autoencoder import AutoencoderModel, TrainConfig, train
from semrules.extraction import attach_metrics, extract_rules, make_test_vector
from semrules.baselines import brute_force_mine, fp_growth, hho_mine
from semrules.benchmark import PlantedRule, SynthSpec, generate

__version__ = "0.1.0"

__all__ = [
    "AutoencoderModel",
    "BinScheme",
    "Binding",
    "Feature",
    "FeatureRegistry",
    "Item",
    "PlantedRule",
    "PropertyGraph",
    "Rule",
    "RuleMetrics",
    "Schema",
    "SynthSpec",
    "TimeSeriesDataset",
    "TrainConfig",
    "TransactionSet",
    "ValidationReport",
    "attach_metrics",
    "brute_force_mine",
    "compute_metrics",
    "corrupt",
    "discretize",
    "encode_one_hot",
    "enrich",
    "extract_rules",
    "fit_equal_frequency_bins",
    "fp_growth",
    "generate",
    "hho_mine",
    "make_test_vector",
    "neighbors",
    "parse_timeseries",
    "rule_overlap",
    "train",
    "validate_graph",
]
