"""Figure rendering for the benchmark harness.

Figures are written next to the CSV output; the search path itself has no
plotting dependency.
"""

from __future__ import annotations

import os

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402


def _grouped_means(records, value_key):
    groups: dict[str, dict[int, list[float]]] = {}
    for r in records:
        groups.setdefault(r["variant"], {}).setdefault(r["n"], []).append(
            float(r[value_key]))
    return {
        variant: sorted((n, sum(vals) / len(vals)) for n, vals in by_n.items())
        for variant, by_n in groups.items()
    }


def render_bench_figures(records: list[dict], outdir: str) -> list[str]:
    """Search time and sub-filter loads versus keyword count, per variant."""
    os.makedirs(outdir, exist_ok=True)
    written = []
    for value_key, ylabel, fname in [
            ("wall_time_ms", "mean search time (ms)", "search_time_vs_n.png"),
            ("subfilters_loaded", "mean sub-filters loaded",
             "subfilters_loaded_vs_n.png")]:
        fig, ax = plt.subplots(figsize=(6, 4))
        for variant, points in sorted(_grouped_means(records, value_key).items()):
            ns = [n for n, _ in points]
            ys = [y for _, y in points]
            ax.plot(ns, ys, marker="o", label=variant)
        ax.set_xlabel("search keyword count")
        ax.set_ylabel(ylabel)
        ax.legend()
        ax.grid(True, alpha=0.3)
        fig.tight_layout()
        path = os.path.join(outdir, fname)
        fig.savefig(path, dpi=120)
        plt.close(fig)
        written.append(path)
    return written


def render_sweep_figure(records: list[dict], outdir: str) -> str:
    """Total search time versus sub-filter capacity."""
    os.makedirs(outdir, exist_ok=True)
    fig, ax = plt.subplots(figsize=(6, 4))
    points = sorted((r["subfilter_size"], r["total_search_ms"]) for r in records)
    ax.plot([s for s, _ in points], [t for _, t in points], marker="s")
    ax.set_xlabel("sub-filter capacity (slots)")
    ax.set_ylabel("total search time (ms)")
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    path = os.path.join(outdir, "subfilter_size_sweep.png")
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path
