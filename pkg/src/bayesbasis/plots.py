"""Static SVG figures for scan and search results (headless-safe)."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

__all__ = ["plot_probability_bars", "plot_fit_overlay", "plot_subset_probabilities"]


def plot_probability_bars(table, path, x_values=None, x_label="degree") -> None:
    """Bar chart of posterior probability per candidate."""
    xs = list(x_values) if x_values is not None else [r.id for r in table.rows]
    ps = [r.probability for r in table.rows]
    fig, ax = plt.subplots(figsize=(5.0, 3.4))
    ax.bar(xs, ps, color="#3465a4", width=0.72)
    ax.set_xlabel(x_label)
    ax.set_ylabel("probability")
    ax.set_ylim(0, 1.02)
    ax.set_xticks(xs)
    fig.tight_layout()
    fig.savefig(path, format="svg")
    plt.close(fig)


def plot_fit_overlay(sample, curve_x, curve_y, path, label="most probable model",
                     band=None) -> None:
    """Scatter of a 1-D sample with the winning model's curve on top."""
    fig, ax = plt.subplots(figsize=(5.0, 3.4))
    ax.plot(sample.points[:, 0], sample.y, "o", ms=4, color="#555555", alpha=0.8,
            label="data")
    if band is not None:
        ax.fill_between(curve_x, curve_y - band, curve_y + band,
                        color="#d08770", alpha=0.35, lw=0,
                        label="model-averaging spread")
    ax.plot(curve_x, curve_y, "-", color="#a40000", lw=1.6, label=label)
    ax.set_xlabel("x")
    ax.set_ylabel("y (centered)")
    ax.legend(frameon=False, fontsize=8)
    fig.tight_layout()
    fig.savefig(path, format="svg")
    plt.close(fig)


def plot_subset_probabilities(table, path) -> None:
    """Probability against subset sequence index for the retained rows."""
    ids = np.array([r.id for r in table.rows])
    ps = np.array([r.probability for r in table.rows])
    order = np.argsort(ids)
    fig, ax = plt.subplots(figsize=(5.6, 3.4))
    ax.vlines(ids[order], 0.0, ps[order], color="#3465a4", lw=0.8)
    ax.plot(ids[order], ps[order], ".", ms=3, color="#204a87")
    ax.set_xlabel("subset index")
    ax.set_ylabel("probability")
    ax.set_title(f"top {len(table.rows)} of {table.n_models} subsets", fontsize=9)
    fig.tight_layout()
    fig.savefig(path, format="svg")
    plt.close(fig)
