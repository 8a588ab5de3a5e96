"""Time series parsing and equal-frequency discretization.

Numerical values are binned with nearest-rank quantile cuts so every
bin holds roughly the same number of samples; exact tie values collapse
cut points, which can leave fewer effective bins than requested.
"""

from __future__ import annotations

import csv
import json
import math
from bisect import bisect_left
from dataclasses import dataclass
from pathlib import Path
from typing import IO, Iterable, Mapping


class IngestError(ValueError):
    """Raised for malformed time series input or discretization misuse."""


HEADER = ("source_id", "timestamp", "value")


@dataclass(frozen=True)
class Record:
    source: str
    timestamp: str
    value: float | str


@dataclass(frozen=True)
class TimeSeriesDataset:
    """Parsed records plus the set of sources they came from."""

    records: tuple[Record, ...]
    sources: frozenset[str]

    def values_for(self, source: str) -> list[float]:
        return [r.value for r in self.records if r.source == source and isinstance(r.value, float)]


@dataclass(frozen=True)
class DiscretizedDataset:
    """Records whose values are all class labels (bin intervals or categories)."""

    records: tuple[Record, ...]
    sources: frozenset[str]


@dataclass(frozen=True)
class BinScheme:
    """Equal-frequency binning: interior cut points and (low, high] intervals.

    Bin i covers (cuts[i-1], cuts[i]] with infinite outer edges, so any
    value falls into some bin; a value equal to a cut point goes to the
    lower bin.
    """

    cuts: tuple[float, ...]
    requested_bins: int

    def __post_init__(self) -> None:
        if any(b <= a for a, b in zip(self.cuts, self.cuts[1:])):
            raise IngestError(f"cut points must be strictly increasing, got {self.cuts}")

    @property
    def bin_count(self) -> int:
        return len(self.cuts) + 1

    @property
    def intervals(self) -> tuple[tuple[float, float], ...]:
        edges = (-math.inf, *self.cuts, math.inf)
        return tuple(zip(edges[:-1], edges[1:]))

    def assign(self, value: float) -> int:
        return bisect_left(self.cuts, value)

    def label(self, index: int) -> str:
        low, high = self.intervals[index]
        return f"({low:.6g}, {high:.6g}]"

    def label_for_value(self, value: float) -> str:
        return self.label(self.assign(value))


def parse_timeseries(
    stream: IO[str] | Iterable[str],
    kinds: Mapping[str, str] | None = None,
    default_kind: str = "numerical",
) -> TimeSeriesDataset:
    """Parse CSV with header ``source_id,timestamp,value``.

    ``kinds`` declares per-source value kind ("numerical"/"categorical");
    undeclared sources fall back to ``default_kind``.  Malformed rows
    raise with their line number; a file with no data rows raises.
    """
    kinds = kinds or {}
    reader = csv.reader(stream)
    try:
        header = next(reader)
    except StopIteration:
        raise IngestError("empty file: no header") from None
    if tuple(h.strip() for h in header) != HEADER:
        raise IngestError(f"expected header {','.join(HEADER)!r}, got {','.join(header)!r}")

    records: list[Record] = []
    for line_no, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != 3:
            raise IngestError(f"line {line_no}: expected 3 fields, got {len(row)}")
        source, timestamp, raw = (cell.strip() for cell in row)
        if not source or not timestamp:
            raise IngestError(f"line {line_no}: empty source_id or timestamp")
        kind = kinds.get(source, default_kind)
        if kind == "numerical":
            try:
                value: float | str = float(raw)
            except ValueError:
                raise IngestError(f"line {line_no}: non-numeric value {raw!r} for numerical source {source!r}") from None
        elif kind == "categorical":
            value = raw
        else:
            raise IngestError(f"line {line_no}: unknown kind {kind!r} for source {source!r}")
        records.append(Record(source, timestamp, value))
    if not records:
        raise IngestError("no records")
    return TimeSeriesDataset(records=tuple(records), sources=frozenset(r.source for r in records))


def fit_equal_frequency_bins(values: list[float] | Iterable[float], k: int) -> BinScheme:
    """Fit nearest-rank quantile cuts at i/k for i = 1..k-1.

    Duplicate cuts collapse and cuts at or above the sample maximum are
    dropped, so the effective bin count can be smaller than k.
    """
    ordered = sorted(values)
    if not ordered:
        raise IngestError("cannot fit bins on an empty sample")
    if k < 1:
        raise IngestError(f"bin count must be >= 1, got {k}")
    n = len(ordered)
    top = ordered[-1]
    cuts: list[float] = []
    for i in range(1, k):
        rank = -(-i * n // k)  # ceil(i*n/k)
        cut = ordered[rank - 1]
        if cut >= top:
            continue
        if not cuts or cut > cuts[-1]:
            cuts.append(cut)
    return BinScheme(cuts=tuple(cuts), requested_bins=k)


def fit_schemes(
    dataset: TimeSeriesDataset,
    bins: int = 5,
    bins_per_source: Mapping[str, int] | None = None,
) -> dict[str, BinScheme]:
    """Fit one scheme per numerical source; categorical sources get none."""
    bins_per_source = bins_per_source or {}
    schemes: dict[str, BinScheme] = {}
    for source in sorted(dataset.sources):
        values = [v for v in dataset.values_for(source) if not math.isnan(v)]
        if values:
            schemes[source] = fit_equal_frequency_bins(values, bins_per_source.get(source, bins))
    return schemes


def discretize(dataset: TimeSeriesDataset, schemes: Mapping[str, BinScheme]) -> DiscretizedDataset:
    """Replace numerical values with their bin labels; categorical pass through.

    NaN values are dropped (the downstream timestamp join then drops the
    affected transaction).  A numerical source without a scheme raises.
    """
    records: list[Record] = []
    for record in dataset.records:
        if isinstance(record.value, str):
            records.append(record)
            continue
        if math.isnan(record.value):
            continue
        scheme = schemes.get(record.source)
        if scheme is None:
            raise IngestError(f"no bin scheme for source {record.source!r}")
        records.append(Record(record.source, record.timestamp, scheme.label_for_value(record.value)))
    return DiscretizedDataset(records=tuple(records), sources=dataset.sources)


def load_kinds(path: str | Path) -> tuple[dict[str, str], dict[str, int]]:
    """Load the sidecar JSON: per-source kind and optional bin count.

    Format: ``{"s1": {"kind": "numerical", "bins": 4}, "s2": {"kind": "categorical"}}``.
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"no such file: {path}")
    data = json.loads(path.read_text())
    kinds: dict[str, str] = {}
    bins: dict[str, int] = {}
    for source, entry in data.items():
        if isinstance(entry, str):
            kinds[source] = entry
            continue
        kinds[source] = str(entry.get("kind", "numerical"))
        if "bins" in entry:
            bins[source] = int(entry["bins"])
    return kinds, bins
