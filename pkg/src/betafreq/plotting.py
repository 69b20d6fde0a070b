"""PNG figures for expansion artifacts (headless matplotlib)."""

from __future__ import annotations

from fractions import Fraction

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402


def frequency_series(checkpoints: list, M: int) -> tuple[list, list]:
    """``N`` values and per-digit frequency lists from checkpoint dictionaries."""
    Ns, freqs = [], [[] for _ in range(M + 1)]
    for cp in sorted(checkpoints, key=lambda c: c["N"]):
        N = cp["N"]
        if N <= 0:
            continue
        Ns.append(N)
        for k in range(M + 1):
            freqs[k].append(cp["counts"][k] / N)
    return Ns, freqs


def sup_errors(checkpoints: list, target) -> tuple[list, list]:
    Ns, errs = [], []
    for cp in sorted(checkpoints, key=lambda c: c["N"]):
        N = cp["N"]
        if N <= 0:
            continue
        Ns.append(N)
        errs.append(float(max(abs(Fraction(c, N) - t) for c, t in zip(cp["counts"], target))))
    return Ns, errs


def plot_artifact(artifact, path) -> None:
    """Digit frequencies against ``N`` and, for fixed targets, the sup-norm error."""
    Ns, freqs = frequency_series(artifact.checkpoints, artifact.M)
    two_panels = artifact.mode == "target"
    fig, axes = plt.subplots(1, 2 if two_panels else 1, figsize=(11 if two_panels else 6.5, 4.2))
    ax = axes[0] if two_panels else axes
    colors = plt.rcParams["axes.prop_cycle"].by_key()["color"]
    for k, series in enumerate(freqs):
        color = colors[k % len(colors)]
        ax.plot(Ns, series, color=color, lw=1.2, label=f"digit {k}")
        for t in artifact.targets:
            ax.axhline(float(t[k]), color=color, lw=0.8, ls="--")
    ax.set_xscale("log")
    ax.set_xlabel("prefix length N")
    ax.set_ylabel("empirical frequency")
    ax.set_title("digit frequencies" if two_panels else "digit frequencies (oscillating)")
    ax.legend(fontsize=8)
    if two_panels:
        Ne, errs = sup_errors(artifact.checkpoints, artifact.targets[0])
        axes[1].loglog(Ne, [max(e, 1e-12) for e in errs], lw=1.2)
        axes[1].set_xlabel("prefix length N")
        axes[1].set_ylabel("sup-norm error")
        axes[1].set_title("distance to target")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def plot_table(rows: list, path) -> None:
    """Critical bases and capped upper bounds against ``n``."""
    ns = [r["n"] for r in rows]
    fig, ax = plt.subplots(figsize=(6.5, 4.2))
    ax.plot(ns, [float(r["beta_n"]) for r in rows], "o-", label="beta_n")
    ax.plot(ns, [float(r["upper_bound"]) for r in rows], "s--", label="upper bound")
    for r in rows:
        if r["flag"]:
            ax.annotate("not reproduced", (r["n"], float(r["upper_bound"])), fontsize=7)
    ax.set_xscale("log")
    ax.set_xlabel("n")
    ax.set_ylabel("base")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
