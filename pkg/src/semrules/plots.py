"""Render benchmark report curves to PNG files next to the CSV output."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from semrules.benchmark import ExperimentReport


def render_report_figures(report: ExperimentReport, outdir: str | Path) -> list[Path]:
    """Write the figures matching the report kind; returns the written paths."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    if report.title == "runtime_scaling":
        return _runtime_figures(report, outdir)
    if report.title == "quality_comparison":
        return _quality_figures(report, outdir)
    if report.title == "threshold_sweep":
        return _threshold_figures(report, outdir)
    return []


def _save(fig, path: Path) -> Path:
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def _line_panel(rows, x_key, title, x_label, path: Path) -> Path | None:
    by_algo: dict[str, list[tuple[float, float]]] = {}
    for row in rows:
        if row.get("mean_seconds") is None or row.get(x_key) is None:
            continue
        by_algo.setdefault(row["algorithm"], []).append((row[x_key], row["mean_seconds"]))
    if not by_algo:
        return None
    fig, ax = plt.subplots(figsize=(5.5, 3.8))
    for algorithm, points in sorted(by_algo.items()):
        points.sort()
        xs, ys = zip(*points)
        ax.plot(xs, ys, marker="o", label=algorithm)
    ax.set_xlabel(x_label)
    ax.set_ylabel("mean mining time [s]")
    ax.set_title(title)
    ax.grid(True, alpha=0.3)
    ax.legend()
    return _save(fig, path)


def _runtime_figures(report: ExperimentReport, outdir: Path) -> list[Path]:
    written = []
    sections = {
        "sources": ("source_count", "Mining time vs data sources", "time series data sources", "runtime_sources.png"),
        "antecedents": ("max_antecedents", "Extractor time vs antecedent cap", "max antecedents", "runtime_antecedents.png"),
        "min_support": ("min_support", "FP-Growth time vs minimum support", "minimum support", "runtime_min_support.png"),
    }
    for section, (x_key, title, x_label, filename) in sections.items():
        rows = [r for r in report.rows if r.get("section") == section]
        path = _line_panel(rows, x_key, title, x_label, outdir / filename)
        if path is not None:
            written.append(path)
    return written


def _quality_figures(report: ExperimentReport, outdir: Path) -> list[Path]:
    written = []
    seed_rows = [r for r in report.rows if r.get("section") == "seed"]
    metrics = ["mean_support", "mean_confidence", "mean_lift", "mean_leverage", "mean_zhangs_metric"]
    mean_rows = {r["algorithm"]: r for r in report.rows if r.get("section") == "mean"}
    if mean_rows:
        fig, ax = plt.subplots(figsize=(6.5, 3.8))
        width = 0.8 / len(mean_rows)
        for i, (algorithm, row) in enumerate(sorted(mean_rows.items())):
            values = [row.get(m) if row.get(m) is not None else 0.0 for m in metrics]
            ax.bar([j + i * width for j in range(len(metrics))], values, width=width, label=algorithm)
        ax.set_xticks([j + width / 2 for j in range(len(metrics))])
        ax.set_xticklabels([m.removeprefix("mean_") for m in metrics], rotation=20)
        ax.set_title("Mean rule quality per algorithm")
        ax.grid(True, axis="y", alpha=0.3)
        ax.legend()
        written.append(_save(fig, outdir / "quality_metrics.png"))
    overlap_points = [
        (r["seed"], r["overlap_vs_reference"])
        for r in seed_rows
        if r.get("overlap_vs_reference") is not None
    ]
    if overlap_points:
        fig, ax = plt.subplots(figsize=(5.5, 3.5))
        xs = list(range(len(overlap_points)))
        ax.bar(xs, [p[1] for p in overlap_points])
        ax.set_xticks(xs)
        ax.set_xticklabels([str(p[0]) for p in overlap_points])
        ax.set_xlabel("seed")
        ax.set_ylabel("overlap vs FP-Growth")
        ax.set_ylim(0, 1.05)
        ax.set_title("Rule overlap per seed")
        ax.grid(True, axis="y", alpha=0.3)
        written.append(_save(fig, outdir / "quality_overlap.png"))
    return written


def _threshold_figures(report: ExperimentReport, outdir: Path) -> list[Path]:
    rows = sorted((r for r in report.rows if r.get("threshold") is not None), key=lambda r: r["threshold"])
    if not rows:
        return []
    thresholds = [r["threshold"] for r in rows]
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9, 3.6))
    ax1.plot(thresholds, [r["rule_count"] for r in rows], marker="o")
    ax1.set_xlabel("similarity threshold")
    ax1.set_ylabel("rule count")
    ax1.grid(True, alpha=0.3)
    for metric in ("mean_support", "mean_confidence", "mean_zhangs_metric"):
        points = [(t, r[metric]) for t, r in zip(thresholds, rows) if r.get(metric) is not None]
        if points:
            ax2.plot(*zip(*points), marker="o", label=metric.removeprefix("mean_"))
    ax2.set_xlabel("similarity threshold")
    ax2.set_ylabel("metric mean")
    ax2.grid(True, alpha=0.3)
    ax2.legend()
    fig.suptitle("Similarity threshold sweep")
    return [_save(fig, outdir / "threshold_sweep.png")]
