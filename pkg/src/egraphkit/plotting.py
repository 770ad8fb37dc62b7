"""Bar chart of benchmark medians, written straight to a file."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

from .bench import BenchResult  # noqa: E402


def plot_bench(results: list[BenchResult], path, title: str = "median wall time per case") -> None:
    """Horizontal log-scale bars, one per case; failed cases are hatched red."""
    names = [r.case for r in results]
    ms = [max(r.median_ns, 1) / 1e6 for r in results]
    fig, ax = plt.subplots(figsize=(7.0, 0.45 * len(results) + 1.2))
    try:
        bars = ax.barh(names, ms, color=["#4c72b0" if r.ok else "#c44e52" for r in results])
        for bar, r in zip(bars, results):
            if not r.ok:
                bar.set_hatch("//")
        ax.set_xscale("log")
        ax.invert_yaxis()
        ax.set_xlabel("median time (ms, log scale)")
        ax.set_title(title)
        ax.grid(axis="x", which="both", alpha=0.3)
        fig.tight_layout()
        fig.savefig(path)
    finally:
        plt.close(fig)
