"""Shared pipeline assembly: fit bins, discretize, enrich, encode.

Used by both the CLI and the benchmark harness so that timings and
artifacts are produced by exactly one code path.
"""

from __future__ import annotations

import time
from typing import Mapping

from semrules.graph import Binding, PropertyGraph
from semrules.ingest import TimeSeriesDataset, discretize, fit_schemes
from semrules.transactions import TransactionSet, encode_one_hot, enrich


def build_transactions(
    dataset: TimeSeriesDataset,
    graph: PropertyGraph,
    binding: Binding,
    *,
    bins: int = 5,
    bins_per_source: Mapping[str, int] | None = None,
    neighbor_depth: int = 1,
    graph_bins: int | None = None,
):
    """Run discretization, enrichment, and encoding; return timings per stage.

    Returns (transaction_set, schemes, timings) where timings is an
    ordered list of (stage name, seconds).
    """
    timings: list[tuple[str, float]] = []

    t0 = time.perf_counter()
    schemes = fit_schemes(dataset, bins=bins, bins_per_source=bins_per_source)
    discretized = discretize(dataset, schemes)
    timings.append(("discretize", time.perf_counter() - t0))

    t0 = time.perf_counter()
    cat_rows = enrich(
        discretized,
        graph,
        binding,
        neighbor_depth=neighbor_depth,
        graph_bins=bins if graph_bins is None else graph_bins,
    )
    timings.append(("enrich", time.perf_counter() - t0))

    t0 = time.perf_counter()
    transactions: TransactionSet = encode_one_hot(cat_rows)
    timings.append(("encode", time.perf_counter() - t0))
    return transactions, schemes, timings


def subset_sources(dataset: TimeSeriesDataset, sources) -> TimeSeriesDataset:
    """Restrict a dataset to the given source IDs."""
    keep = frozenset(sources)
    records = tuple(r for r in dataset.records if r.source in keep)
    return TimeSeriesDataset(records=records, sources=keep)
