"""Static SVG charts with byte-stable output.

The SVG backend embeds a creation date and random element ids by default;
both are pinned here so identical inputs give identical files.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

_STYLE = {"svg.hashsalt": "coauthorcast", "svg.fonttype": "none", "figure.figsize": (6, 4)}


def _save(fig, path: Path, description: str | None) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    metadata = {"Date": None, "Creator": "coauthorcast"}
    if description:
        metadata["Description"] = description
    fig.savefig(path, format="svg", metadata=metadata)
    plt.close(fig)
    return path


def significance_chart(path, m, p_values, alpha=0.05, *, description=None) -> Path:
    """Time-slope p-value of each coauthor-rate row, against ``alpha``."""
    with plt.rc_context(_STYLE):
        fig, ax = plt.subplots()
        p = np.asarray(p_values, dtype=float)
        ax.bar(m, np.where(np.isnan(p), 0.0, p), color="tab:blue")
        ax.axhline(alpha, color="tab:red", linestyle="--", label=f"alpha = {alpha}")
        ax.set_xlabel("publications in the year (m)")
        ax.set_ylabel("p-value of the time slope")
        ax.legend()
        return _save(fig, path, description)


def trend_chart(path, groups, observed, predicted, year, *, description=None) -> Path:
    """Observed and predicted mean coauthor counts per anchor group in one year."""
    with plt.rc_context(_STYLE):
        fig, ax = plt.subplots()
        ax.plot(groups, observed, "o", markersize=3, label="observed")
        ax.plot(groups, predicted, "-", label="predicted")
        ax.set_xlabel("coauthors at the anchor year")
        ax.set_ylabel(f"mean coauthors in {year}")
        ax.legend()
        return _save(fig, path, description)


def distribution_chart(path, observed_hist, predicted_hist, year, *, description=None) -> Path:
    """Observed and predicted coauthor-count histograms on log-log axes."""
    with plt.rc_context(_STYLE):
        fig, ax = plt.subplots()
        for hist, style, label in ((observed_hist, "o", "observed"),
                                   (predicted_hist, "x", "predicted")):
            hist = np.asarray(hist, dtype=float)
            k = np.flatnonzero(hist > 0)
            k = k[k > 0]
            ax.loglog(k, hist[k], style, markersize=3, label=label)
        ax.set_xlabel(f"coauthors in {year}")
        ax.set_ylabel("researchers")
        ax.legend()
        return _save(fig, path, description)


def auc_chart(path, labels, values, *, description=None) -> Path:
    """Event-prediction accuracy per historical-publication stratum."""
    with plt.rc_context(_STYLE):
        fig, ax = plt.subplots()
        x = np.arange(len(labels))
        ax.plot(x, values, "o-", markersize=3)
        step = max(1, len(labels) // 10)
        ax.set_xticks(x[::step], [labels[i] for i in range(0, len(labels), step)])
        ax.set_ylim(0, 1)
        ax.set_xlabel("publications before the year")
        ax.set_ylabel("AUC")
        return _save(fig, path, description)
