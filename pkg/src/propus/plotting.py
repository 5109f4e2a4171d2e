"""Matplotlib figures for reports: matrix pictures and PAF profiles.

These are the human-facing companions of the bit-exact PPM output; nothing
is verified from them.
"""
from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
from matplotlib.colors import ListedColormap  # noqa: E402

from .sds import PropusQuadruple  # noqa: E402
from .seqcore import paf_vector  # noqa: E402

PM_CMAP = ListedColormap(["#d62728", "white"])

STYLE = {
    "font.size": 9,
    "axes.titlesize": 10,
    "axes.labelsize": 9,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "savefig.dpi": 150,
    "savefig.bbox": "tight",
}


def plot_matrix(H, path, title=None, block_lines=True):
    """+1 white, -1 red, with optional guides at the GP block boundaries."""
    H = np.asarray(H)
    n = H.shape[0]
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(4.5, 4.5))
        ax.imshow(H, cmap=PM_CMAP, vmin=-1, vmax=1, interpolation="nearest")
        if block_lines and n % 4 == 0:
            v = n // 4
            for t in range(1, 4):
                ax.axhline(t * v - 0.5, color="0.3", lw=0.6)
                ax.axvline(t * v - 0.5, color="0.3", lw=0.6)
        ax.set_xticks([])
        ax.set_yticks([])
        ax.set_title(title or f"order {n}")
        fig.savefig(path)
        plt.close(fig)
    return Path(path)


def plot_paf_profile(q: PropusQuadruple, lam: int, path, title=None):
    """Stacked indicator PAFs of A, B, C, D per folded shift, against lam."""
    pafs = [np.array(paf_vector(X)) for X in q.blocks]
    shifts = np.arange(1, len(pafs[0]) + 1)
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(5.5, 2.8))
        bottom = np.zeros(len(shifts))
        for name, paf, color in zip("ABCD", pafs, ["#1f77b4", "#ff7f0e", "#ffbb78", "#2ca02c"]):
            ax.bar(shifts, paf, bottom=bottom, label=name, color=color, width=0.8)
            bottom += paf
        ax.axhline(lam, color="k", ls="--", lw=0.8)
        ax.set_xlabel("shift")
        ax.set_ylabel("PAF sum")
        ax.set_xticks(shifts)
        ax.legend(ncol=4, frameon=False, loc="lower right")
        ax.set_title(title or f"v={q.v}, lambda={lam}")
        fig.savefig(path)
        plt.close(fig)
    return Path(path)
