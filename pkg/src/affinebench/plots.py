"""Report figures, rendered as deterministic SVG files.

Every figure is written without timestamps and with a fixed hash salt so
that re-running the report produces diffable output.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

_SAVE_KW = {"format": "svg", "metadata": {"Date": None}, "bbox_inches": "tight"}


def _setup(hashsalt: str) -> None:
    plt.rcParams["svg.hashsalt"] = hashsalt
    plt.rcParams["svg.fonttype"] = "none"
    plt.rcParams["figure.dpi"] = 100


def plot_feature_boxplots(path, groups: dict[str, np.ndarray], feature_names, hashsalt=""):
    """Per-feature boxplots comparing problem groups (components, few/many
    active parts)."""
    _setup(hashsalt)
    n = len(feature_names)
    cols = 4
    rows = (n + cols - 1) // cols
    fig, axes = plt.subplots(rows, cols, figsize=(3.0 * cols, 2.2 * rows))
    axes = np.atleast_2d(axes)
    labels = list(groups)
    for i, name in enumerate(feature_names):
        ax = axes[i // cols][i % cols]
        data = []
        for g in labels:
            col = groups[g][:, i]
            data.append(col[np.isfinite(col)])
        ax.boxplot(data, tick_labels=labels, showfliers=False)
        ax.set_title(name, fontsize=7)
        ax.tick_params(labelsize=6)
    for i in range(n, rows * cols):
        axes[i // cols][i % cols].axis("off")
    fig.tight_layout()
    fig.savefig(path, **_SAVE_KW)
    plt.close(fig)


def plot_pca_scatter(path, coords_all, color_values, coords_ref, ref_color_values, hashsalt="",
                     color_label="active components", ref_label="component function id"):
    """2-d projection of every problem, reference population highlighted."""
    _setup(hashsalt)
    fig, ax = plt.subplots(figsize=(7, 6))
    sc = ax.scatter(coords_all[:, 0], coords_all[:, 1], c=color_values, s=6,
                    cmap="viridis", alpha=0.6, linewidths=0)
    sc_ref = ax.scatter(coords_ref[:, 0], coords_ref[:, 1], c=ref_color_values, s=60,
                        cmap="turbo", edgecolors="black", linewidths=0.5, marker="o")
    fig.colorbar(sc, ax=ax, label=color_label, location="top", shrink=0.8)
    fig.colorbar(sc_ref, ax=ax, label=ref_label, location="bottom", shrink=0.8)
    ax.set_xlabel("principal axis 1")
    ax.set_ylabel("principal axis 2")
    fig.savefig(path, **_SAVE_KW)
    plt.close(fig)


def plot_sbs_scatter(path, sbs_values, other_values: dict[str, np.ndarray], hashsalt=""):
    """Per-algorithm AOCC against the single best solver's AOCC."""
    _setup(hashsalt)
    names = list(other_values)
    cols = min(3, len(names))
    rows = (len(names) + cols - 1) // cols
    fig, axes = plt.subplots(rows, cols, figsize=(3.2 * cols, 3.0 * rows), squeeze=False)
    for i, name in enumerate(names):
        ax = axes[i // cols][i % cols]
        ax.scatter(sbs_values, other_values[name], s=4, alpha=0.5, linewidths=0)
        ax.plot([0, 1], [0, 1], color="red", linewidth=0.8)
        ax.set_xlim(0, 1)
        ax.set_ylim(0, 1)
        ax.set_title(name, fontsize=8)
        ax.set_xlabel("SBS AOCC", fontsize=7)
        ax.set_ylabel("algorithm AOCC", fontsize=7)
        ax.tick_params(labelsize=6)
    for i in range(len(names), rows * cols):
        axes[i // cols][i % cols].axis("off")
    fig.tight_layout()
    fig.savefig(path, **_SAVE_KW)
    plt.close(fig)


def plot_powerset_gaps(path, rows: list[dict], algorithm_names: dict[int, str], hashsalt=""):
    """Gap of every portfolio subset, grouped by the subset's SBS."""
    _setup(hashsalt)
    fig, ax = plt.subplots(figsize=(7, 4.5))
    sbs_ids = sorted({r["sbs_id"] for r in rows})
    xs = {a: i for i, a in enumerate(sbs_ids)}
    sizes = sorted({r["size"] for r in rows})
    markers = ["o", "s", "^", "D", "v", "P", "X", "*", "<", ">"]
    for size in sizes:
        pts = [(xs[r["sbs_id"]], r["gap"]) for r in rows if r["size"] == size]
        if not pts:
            continue
        x, y = zip(*pts)
        jitter = (size - sizes[0]) / max(len(sizes), 1) * 0.3 - 0.15
        ax.scatter(np.asarray(x) + jitter, y, s=28,
                   marker=markers[(size - sizes[0]) % len(markers)],
                   label=f"{size} solvers", alpha=0.8)
    ax.set_xticks(range(len(sbs_ids)))
    ax.set_xticklabels([algorithm_names.get(a, str(a)) for a in sbs_ids], rotation=30, ha="right", fontsize=7)
    ax.set_xlabel("subset SBS")
    ax.set_ylabel("VBS-SBS gap (mean AOCC)")
    ax.legend(fontsize=7)
    fig.tight_layout()
    fig.savefig(path, **_SAVE_KW)
    plt.close(fig)


def plot_heatmap(path, matrix: np.ndarray, row_labels, col_labels, hashsalt="",
                 title="", value_fmt="{:.0f}", cmap="RdBu_r"):
    """Annotated heatmap (gap-closed percentages); NaN cells stay blank."""
    _setup(hashsalt)
    fig, ax = plt.subplots(
        figsize=(max(4.0, 0.55 * len(col_labels) + 2), max(3.0, 0.3 * len(row_labels) + 1.5))
    )
    finite = np.isfinite(matrix)
    vmax = max(100.0, float(np.abs(matrix[finite]).max()) if finite.any() else 100.0)
    im = ax.imshow(np.where(finite, matrix, np.nan), cmap=cmap, vmin=-vmax, vmax=vmax, aspect="auto")
    ax.set_xticks(range(len(col_labels)))
    ax.set_xticklabels(col_labels, rotation=45, ha="right", fontsize=6)
    ax.set_yticks(range(len(row_labels)))
    ax.set_yticklabels(row_labels, fontsize=6)
    for i in range(matrix.shape[0]):
        for j in range(matrix.shape[1]):
            if finite[i, j]:
                ax.text(j, i, value_fmt.format(matrix[i, j]), ha="center", va="center", fontsize=5)
    if title:
        ax.set_title(title, fontsize=9)
    fig.colorbar(im, ax=ax, label="% of VBS-SBS gap closed", shrink=0.8)
    fig.tight_layout()
    fig.savefig(path, **_SAVE_KW)
    plt.close(fig)


def plot_correlation_heatmap(path, matrix: np.ndarray, row_labels, col_labels, hashsalt="", split_after=None):
    """Feature/performance Pearson correlation heatmap."""
    _setup(hashsalt)
    fig, ax = plt.subplots(figsize=(max(5.0, 0.22 * len(col_labels)), max(5.0, 0.22 * len(row_labels))))
    im = ax.imshow(matrix, cmap="RdBu_r", vmin=-1, vmax=1, aspect="auto")
    ax.set_xticks(range(len(col_labels)))
    ax.set_xticklabels(col_labels, rotation=90, fontsize=5)
    ax.set_yticks(range(len(row_labels)))
    ax.set_yticklabels(row_labels, fontsize=5)
    if split_after is not None:
        ax.axhline(split_after - 0.5, color="red", linewidth=0.8)
        ax.axvline(split_after - 0.5, color="red", linewidth=0.8)
    fig.colorbar(im, ax=ax, label="Pearson r", shrink=0.8)
    fig.tight_layout()
    fig.savefig(path, **_SAVE_KW)
    plt.close(fig)
