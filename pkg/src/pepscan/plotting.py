"""Matplotlib rendering for bench reports."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

params = {
    "axes.labelsize": 11,
    "axes.titlesize": 12,
    "font.size": 10,
    "legend.fontsize": 9,
    "lines.linewidth": 1.5,
    "lines.markersize": 5,
    "figure.figsize": [6.4, 4.2],
    "savefig.dpi": 120,
}


def plot_fig4(cells, path, paper=None):
    """Time vs protein-set length for both engines, speedup on a twin axis."""
    x = [c.text_len for c in cells]
    sw = [c.modeled_sw_us / 1e6 for c in cells]
    hw = [c.modeled_hw_us / 1e6 for c in cells]
    speed = [c.speedup for c in cells]

    with plt.rc_context(params):
        fig, ax = plt.subplots()
        ax.plot(x, sw, "o-", color="tab:red", label="software (model)")
        ax.plot(x, hw, "s-", color="tab:blue", label="co-design (model)")
        if paper is not None:
            known = [c for c in cells if paper.has(c.proteins, c.peptides)]
            if known:
                kx = [c.text_len for c in known]
                ax.plot(kx, [paper.sw_us[c.proteins][c.peptides] / 1e6 for c in known],
                        "o", mfc="none", color="tab:red", label="software (published)")
                ax.plot(kx, [paper.hw_us[c.proteins][c.peptides] / 1e6 for c in known],
                        "s", mfc="none", color="tab:blue", label="co-design (published)")
        ax.set_xlabel("protein set length (residues)")
        ax.set_ylabel("matching time (s)")
        ax2 = ax.twinx()
        ax2.plot(x, speed, "^--", color="tab:green", label="speedup (model)")
        ax2.set_ylabel("speedup")
        ax2.set_ylim(bottom=0)
        h1, l1 = ax.get_legend_handles_labels()
        h2, l2 = ax2.get_legend_handles_labels()
        ax.legend(h1 + h2, l1 + l2, loc="upper left", frameon=False)
        peps = cells[0].peptides if cells else 0
        ax.set_title(f"Total matching time and speedup, {peps} peptides")
        fig.tight_layout()
        fig.savefig(Path(path), metadata={"Software": None})
        plt.close(fig)
