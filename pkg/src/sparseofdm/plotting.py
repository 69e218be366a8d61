"""Render sweep and compressibility tables as figures next to the data files.

Figures are rendered headlessly (Agg backend) and written as PNG; the CSV/JSON
tables remain the primary output, the figures are the quick-look report.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

_MARKERS = ("*", "s", "o", "D", "^", "v", "P", "X")


def _style(ax, xlabel: str, ylabel: str):
    ax.grid(True, which="both", alpha=0.3, linestyle=":")
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)


def plot_sweep(records, out_base) -> list[Path]:
    """Error-variance and iteration-count figures for one sweep table."""
    out_base = Path(out_base)
    by_est: dict[str, list] = {}
    for r in records:
        by_est.setdefault(r.estimator_id, []).append(r)
    paths = []

    fig, ax = plt.subplots(figsize=(7, 5))
    for i, (est, rows) in enumerate(by_est.items()):
        snrs = np.array([r.snr_db for r in rows])
        mse = np.array([r.mean_mse for r in rows])
        theory = np.array([r.theory_bound for r in rows])
        line, = ax.semilogy(snrs, mse, label=est)
        keep = theory > 0
        ax.semilogy(
            snrs[keep],
            theory[keep],
            linestyle="none",
            marker=_MARKERS[i % len(_MARKERS)],
            color=line.get_color(),
            markersize=5,
            label=f"{est} (theory)",
        )
    _style(ax, "SNR (dB)", "error variance per subcarrier")
    ax.legend(fontsize=8, ncol=2)
    path = out_base.parent / (out_base.name + "_error_variance.png")
    fig.savefig(path, dpi=150, bbox_inches="tight")
    plt.close(fig)
    paths.append(path)

    fig, ax = plt.subplots(figsize=(7, 5))
    for est, rows in by_est.items():
        snrs = np.array([r.snr_db for r in rows])
        mean_l = np.array([r.mean_l_hat for r in rows])
        std_l = np.array([r.std_l_hat for r in rows])
        if not np.any(mean_l > 0):
            continue  # the full-band estimator has no support size
        ax.errorbar(snrs, mean_l, yerr=std_l, capsize=3, label=est)
    _style(ax, "SNR (dB)", "recovered components")
    ax.legend(fontsize=8)
    path = out_base.parent / (out_base.name + "_iterations.png")
    fig.savefig(path, dpi=150, bbox_inches="tight")
    plt.close(fig)
    paths.append(path)
    return paths


def plot_rho(comparison, out_base) -> list[Path]:
    """Residual-power decay per generator, with bounds and the cost line."""
    out_base = Path(out_base)
    by_gen: dict[str, list] = {}
    for r in comparison.records:
        by_gen.setdefault(r.generator, []).append(r)

    fig, ax = plt.subplots(figsize=(7, 5))
    first = True
    cost_rows = None
    for gen, rows in by_gen.items():
        rows = sorted(rows, key=lambda r: r.d)
        cost_rows = rows
        d = np.array([r.d for r in rows])
        ax.semilogy(d, [r.rho_bar_mean for r in rows], label=f"{gen}")
        if first:
            # Bound curves are most informative for the lead generator.
            lb = np.array([r.lb_fi for r in rows])
            ub = np.array([r.ub_fi for r in rows])
            geo = np.array([r.lb_geometric for r in rows])
            ax.semilogy(d, lb, "--", alpha=0.7, label=f"{gen} FI lower bound")
            ax.semilogy(d, ub, "--", alpha=0.7, label=f"{gen} FI upper bound")
            ax.semilogy(d, geo, "-.", alpha=0.7, label=f"{gen} geometric bound")
            first = False
    if cost_rows is not None:
        d = np.array([r.d for r in cost_rows])
        cost = np.array([r.cost_line for r in cost_rows])
        keep = cost > 0
        ax.semilogy(d[keep], cost[keep], "k:", label="stop-rule cost line")
    _style(ax, "recovered components d", "mean residual power / K")
    ax.legend(fontsize=8)
    path = out_base.parent / (out_base.name + "_compressibility.png")
    fig.savefig(path, dpi=150, bbox_inches="tight")
    plt.close(fig)
    return [path]
