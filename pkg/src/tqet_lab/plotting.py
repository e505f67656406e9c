"""PNG figures rendered next to the data files (``--plot``).

Figures are drawn from the same in-memory results that feed the CSV
writers, so every panel is a direct plot of named output columns.
"""
from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .experiments import SweepResult  # noqa: E402
from .protocol import ProtocolTrace  # noqa: E402
from .timelike import CorrelatorSeries, SyncReport  # noqa: E402

RC = {
    "font.size": 10,
    "axes.labelsize": 10,
    "legend.fontsize": 8,
    "lines.linewidth": 1.2,
    "savefig.dpi": 150,
    "figure.dpi": 100,
}


def _save(fig, path: Path) -> Path:
    path = Path(path).with_suffix(".png")
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.tight_layout()
    # fixed metadata keeps reruns byte-identical
    fig.savefig(path, metadata={"Software": None})
    plt.close(fig)
    return path


def plot_trace(trace: ProtocolTrace, path) -> Path:
    with plt.rc_context(RC):
        fig, axes = plt.subplots(3, 1, figsize=(6, 7), sharex=True)
        ax = axes[0]
        ax.plot(trace.t, trace.e_tqet_opt, label=r"$E_{TQET}(t,\theta^*)$")
        ax.plot(trace.t, trace.e_nte, label=r"$E_{NTE}(t)$", alpha=0.8)
        ax.axhline(trace.e_qet, color="k", ls="--", lw=0.8, label=r"$E_{QET}$")
        ax.set_ylabel("Bob's energy change")
        ax.legend(loc="best")
        axes[1].plot(trace.t, trace.de_min, color="C2")
        axes[1].set_ylabel(r"$\Delta E_{min}(t)$")
        axes[2].plot(trace.t, trace.theta_star, color="C3")
        axes[2].set_ylabel(r"$\theta^*(t)$")
        axes[2].set_xlabel(r"$t\,J$")
        return _save(fig, path)


def plot_timelike(series: CorrelatorSeries, report: SyncReport, path) -> Path:
    with plt.rc_context(RC):
        fig, axes = plt.subplots(1, 3, figsize=(11, 3.4))
        t = series.times
        axes[0].plot(t, series.tr_t2_rho_a.real, label="Re")
        axes[0].plot(t, series.tr_t2_rho_a.imag, label="Im")
        axes[0].set_title(r"Tr $T^2(t;\rho_A)$")
        axes[0].legend()
        axes[1].plot(t, series.delta_tr_t2.real, label="Re")
        axes[1].plot(t, series.delta_tr_t2.imag, label="Im")
        axes[1].plot(t, np.abs(series.delta_tr_t2), label="abs", color="k", lw=0.8)
        axes[1].set_title(r"$\Delta$Tr $T^2(t)$")
        axes[1].legend()
        for ax in axes[:2]:
            ax.set_xlabel(r"$t\,J$")
        ax = axes[2]
        if report.pairs:
            tm = [p[0] for p in report.pairs]
            tc = [p[1] for p in report.pairs]
            ax.scatter(tm, tc, s=14)
            hi = max(max(tm), max(tc))
            ax.plot([0, hi], [0, hi], "k--", lw=0.8)
        ax.set_xlabel(r"$t_{min}$ of $\Delta E_{min}$")
        ax.set_ylabel("nearest critical time")
        ax.set_title(f"sync ({report.scalarization})")
        return _save(fig, path)


def plot_gh(result: SweepResult, path) -> Path:
    g = sorted({p[0] for p in result.points})
    h = sorted({p[1] for p in result.points})
    shape = (len(g), len(h))
    qet = result.column("e_qet").reshape(shape)
    tqet = result.column("min_t_e_tqet").reshape(shape)
    with plt.rc_context(RC):
        fig, axes = plt.subplots(1, 2, figsize=(10, 4))
        extent = (h[0], h[-1], g[0], g[-1])
        for ax, data, title in ((axes[0], qet, r"$E_{QET}$"), (axes[1], tqet, r"$\min_t E_{TQET}$")):
            masked = np.ma.masked_where(~np.isfinite(data) | (data >= 0), data)
            im = ax.imshow(masked, origin="lower", aspect="auto", extent=extent, cmap="viridis")
            fig.colorbar(im, ax=ax)
            ax.set_xlabel("h / J")
            ax.set_ylabel("g / J")
            ax.set_title(title)
        return _save(fig, path)


def plot_scaling(result: SweepResult, path) -> Path:
    n = np.array([p[0] for p in result.points])
    with plt.rc_context(RC):
        fig, ax = plt.subplots(figsize=(5, 3.5))
        if result.kind == "ece":
            ax.plot(n, result.column("eta_tqet"), "o-", label="TQET")
            ax.plot(n, result.column("eta_qet"), "s-", label="QET")
            ax.set_ylabel("energy conversion efficiency")
        elif result.kind == "ratio":
            ax.semilogy(n, result.column("ratio"), "o-")
            ax.set_ylabel(r"$\min_t E_{TQET} / E_{QET}$")
        else:
            ax.plot(n, result.column("min_t_de_restricted"), "o-", label="TQET")
            ax.plot(n, result.column("e_qet"), "s-", label="QET")
            ax.set_ylabel("energy")
        if ax.get_legend_handles_labels()[0]:
            ax.legend()
        ax.set_xlabel("N")
        return _save(fig, path)
