"""Figure rendering for the CLI report paths.

Figures are rasterized with the Agg backend straight to files; given the
same data they are byte-stable across runs.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402


def save_bench_figure(path, edges, medians, slope):
    """Log-log runtime over edge count with the fitted slope."""
    fig, ax = plt.subplots(figsize=(5.0, 3.4))
    ax.loglog(edges, medians, "o-", color="tab:blue", label="median runtime")
    ax.set_xlabel("edges")
    ax.set_ylabel("seconds")
    ax.set_title(f"greedy pass scaling (log-log slope {slope:.3f})")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def save_pq_figure(path, report):
    """Per-class panoptic quality bars plus the aggregate line."""
    classes = sorted(report.per_class)
    values = [report.per_class[c].pq for c in classes]
    fig, ax = plt.subplots(figsize=(5.0, 3.4))
    ax.bar([str(c) for c in classes], values, color="tab:blue")
    if report.pq == report.pq:  # skip NaN
        ax.axhline(report.pq, color="tab:red", linestyle="--", label=f"PQ {report.pq:.3f}")
        ax.legend()
    ax.set_ylim(0.0, 1.05)
    ax.set_xlabel("class id")
    ax.set_ylabel("PQ")
    ax.set_title("panoptic quality per class")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
