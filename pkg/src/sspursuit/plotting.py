"""Matplotlib rendering of NMSE-versus-SNR curves to image files."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

__all__ = ["render_curves"]

_MARKERS = ("o", "s", "^", "d", "v", "*")


def render_curves(table, path, title=None):
    """Render one errorbar line per (algorithm, R) curve and save to path.

    Noise-free rows (snr_db is None) have no x coordinate and are skipped.
    The file format follows the path suffix (.png, .pdf, ...).
    """
    fig, ax = plt.subplots(figsize=(6.4, 4.4))
    for i, ((alg, r), rows) in enumerate(table.curves().items()):
        points = sorted(
            (row for row in rows if row.snr_db is not None),
            key=lambda row: row.snr_db,
        )
        if not points:
            continue
        ax.errorbar(
            [p.snr_db for p in points],
            [p.nmse_db for p in points],
            yerr=[p.ci95_db for p in points],
            marker=_MARKERS[i % len(_MARKERS)],
            capsize=2,
            label=f"{alg} R={r}",
        )
    ax.set_xlabel("SNR (dB)")
    ax.set_ylabel("NMSE (dB)")
    if title:
        ax.set_title(title)
    ax.grid(True, alpha=0.4)
    if ax.has_data():
        ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
