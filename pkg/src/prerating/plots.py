"""Report figures.

Figures are drawn on standalone :class:`~matplotlib.figure.Figure` objects
with the Agg canvas, so nothing touches pyplot's global state and the CLI
works headless.
"""

from __future__ import annotations

import math
import os

import matplotlib
from matplotlib.backends.backend_agg import FigureCanvasAgg
from matplotlib.figure import Figure

STYLE = {
    "font.size": 9,
    "axes.labelsize": 9,
    "axes.titlesize": 10,
    "legend.fontsize": 8,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "svg.hashsalt": "prerating",
}


def _figure(width=5.0, height=None):
    if height is None:
        height = width * (math.sqrt(5) - 1.0) / 2.0
    fig = Figure(figsize=(width, height), dpi=120)
    FigureCanvasAgg(fig)
    return fig


def _save(fig, path):
    fig.tight_layout()
    # Fixed metadata keeps PNG bytes reproducible between runs.
    fig.savefig(path, metadata={"Software": None})
    return path


def plot_convergence(result, path):
    """Sup-norm step per iteration on a log axis."""
    with matplotlib.rc_context(STYLE):
        fig = _figure()
        ax = fig.add_subplot()
        steps = list(result.trajectory)
        xs = range(1, len(steps) + 1)
        positive = [(i, s) for i, s in zip(xs, steps) if s > 0]
        if positive:
            ax.semilogy(*zip(*positive), marker=".", lw=1)
        ax.set_xlabel("iteration")
        ax.set_ylabel(r"$\max_i |x_i^{new} - x_i|$ (rating points)")
        status = "converged" if result.converged else result.diagnosis
        ax.set_title(f"Fixed-point iteration: {status}")
        return _save(fig, path)


def plot_tpr_vs_ppr(rows, path, label_top=10):
    """Each player's TPR (from initial ratings) against their equilibrium rating."""
    with matplotlib.rc_context(STYLE):
        fig = _figure(5.0, 5.0)
        ax = fig.add_subplot()
        tpr = [r["tpr"] for r in rows]
        ppr = [r["ppr"] for r in rows]
        ax.scatter(tpr, ppr, s=14)
        lo, hi = min(tpr + ppr), max(tpr + ppr)
        pad = 0.05 * (hi - lo or 1.0)
        ax.plot([lo - pad, hi + pad], [lo - pad, hi + pad], lw=0.8, ls="--", color="grey")
        # Players sharing a point get one combined label.
        groups: dict[tuple[int, int], list[str]] = {}
        for r in rows[:label_top]:
            key = (round(r["tpr"]), round(r["ppr"]))
            groups.setdefault(key, []).append(r["name"] or str(r["id"]))
        for (x, y), names in groups.items():
            ax.annotate(", ".join(names), (x, y), fontsize=6, xytext=(4, -2), textcoords="offset points")
        ax.set_xlabel("TPR")
        ax.set_ylabel("PPR")
        ax.set_aspect("equal", adjustable="datalim")
        return _save(fig, path)


def plot_distance_matrix(exploration, path):
    with matplotlib.rc_context(STYLE):
        fig = _figure(4.5, 4.0)
        ax = fig.add_subplot()
        im = ax.imshow(exploration.distances, cmap="viridis")
        fig.colorbar(im, ax=ax, label="sup-distance (rating points)")
        n = len(exploration.results)
        ax.set_xticks(range(n))
        ax.set_yticks(range(n))
        ax.set_xticklabels([str(lab) for lab in exploration.labels])
        ax.set_yticklabels([str(lab) for lab in exploration.labels])
        ax.set_xlabel("start (cluster label)")
        ax.set_title(f"{exploration.n_clusters} distinct equilibria")
        return _save(fig, path)


def render_report_figures(outdir, result, rows):
    os.makedirs(outdir, exist_ok=True)
    return [
        plot_convergence(result, os.path.join(outdir, "convergence.png")),
        plot_tpr_vs_ppr(rows, os.path.join(outdir, "tpr_vs_ppr.png")),
    ]
