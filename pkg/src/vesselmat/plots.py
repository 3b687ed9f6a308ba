"""Figure rendering for the report paths (headless matplotlib backend)."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .trimap import BACKGROUND, UNKNOWN, VESSEL


def trimap_rgb(tm):
    """Color rendering of a trimap: vessel white, background black, unknown red."""
    out = np.zeros(tm.shape + (3,), np.uint8)
    out[tm == VESSEL] = (255, 255, 255)
    out[tm == UNKNOWN] = (255, 0, 0)
    out[tm == BACKGROUND] = (0, 0, 0)
    return out


def save_pair(left, right, path, left_title="ground truth", right_title="segmentation"):
    """Side-by-side panel: reference on the left, prediction on the right."""
    fig, axes = plt.subplots(1, 2, figsize=(9, 4.6))
    for ax, img, title in zip(axes, (left, right), (left_title, right_title)):
        cmap = "gray" if np.asarray(img).ndim == 2 else None
        ax.imshow(img, cmap=cmap, interpolation="nearest")
        ax.set_title(title)
        ax.set_axis_off()
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def save_eval_summary(records, path):
    """Per-image Acc/Se/Sp markers with dataset-mean lines."""
    fig, ax = plt.subplots(figsize=(max(6, 0.45 * len(records)), 4.2))
    xs = np.arange(len(records))
    for attr, marker, color in (("acc", "o", "tab:blue"), ("se", "^", "tab:red"),
                                ("sp", "s", "tab:green")):
        vals = [getattr(r, attr) for r in records]
        shown = [v if v is not None else np.nan for v in vals]
        ax.plot(xs, shown, marker, label=attr, color=color, linestyle="none")
        finite = [v for v in vals if v is not None]
        if finite:
            ax.axhline(sum(finite) / len(finite), color=color, linewidth=0.8,
                       linestyle="--")
    ax.set_xticks(xs)
    ax.set_xticklabels([r.image_id for r in records], rotation=60, fontsize=7)
    ax.set_ylabel("score")
    ax.set_ylim(0.0, 1.02)
    ax.legend(loc="lower right")
    ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def save_sweep_plot(param, rows, path):
    """Mean accuracy as a function of one threshold value."""
    xs = [row.value for row in rows]
    ys = [row.mean_acc if row.mean_acc is not None else np.nan for row in rows]
    fig, ax = plt.subplots(figsize=(5.2, 3.8))
    ax.plot(xs, ys, "o-")
    ax.set_xlabel(param)
    ax.set_ylabel("mean accuracy")
    ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
