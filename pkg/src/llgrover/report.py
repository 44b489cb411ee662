"""Figures written next to the CSV/JSON reports."""
from __future__ import annotations

import math
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

plt.rcParams.update({
    "figure.figsize": (6.0, 4.0),
    "axes.spines.top": False,
    "axes.spines.right": False,
    "font.size": 10,
    "savefig.dpi": 120,
})


def plot_histogram(hist: dict[str, int], path: Path, title: str = "",
                   marked: set[str] | None = None) -> Path:
    keys = sorted(hist)
    colors = ["tab:red" if marked and k in marked else "tab:blue" for k in keys]
    fig, ax = plt.subplots(figsize=(max(4.0, 0.35 * len(keys) + 2), 3.5))
    ax.bar(range(len(keys)), [hist[k] for k in keys], color=colors)
    ax.set_xticks(range(len(keys)))
    ax.set_xticklabels(keys, rotation=90 if len(keys) > 8 else 0, fontfamily="monospace")
    ax.set_ylabel("counts")
    ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
    return path


def plot_bench(summary: list[dict], outdir: Path) -> list[Path]:
    """Success probability and oracle-call scaling against k."""
    outdir.mkdir(parents=True, exist_ok=True)
    ks = [row["k"] for row in summary]

    fig, ax = plt.subplots()
    ax.plot(ks, [row["p_theory"] for row in summary], "o-", label="closed form")
    ax.plot(ks, [row["p_empirical"] for row in summary], "s--", label="sampled")
    ax.plot(ks, [row["success_rate"] for row in summary], "^:", label="permutation recovered")
    ax.set_xscale("log", base=2)
    ax.set_xlabel("atomic clauses k")
    ax.set_ylabel("probability")
    ax.set_ylim(0, 1.05)
    ax.legend(frameon=False)
    fig.tight_layout()
    p1 = outdir / "success_vs_k.png"
    fig.savefig(p1)
    plt.close(fig)

    fig, ax = plt.subplots()
    ax.plot(ks, [row["oracle_calls"] for row in summary], "o-", label="oracle calls")
    dense = [2 ** (x / 8) for x in range(8 * int(math.log2(min(ks))), 8 * int(math.log2(max(ks))) + 1)]
    ax.plot(dense, [x ** 1.5 for x in dense], ":", color="grey", label="$k^{1.5}$")
    ax.set_xscale("log", base=2)
    ax.set_yscale("log")
    ax.set_xlabel("atomic clauses k")
    ax.set_ylabel("oracle calls per permutation")
    ax.legend(frameon=False)
    fig.tight_layout()
    p2 = outdir / "oracle_calls_vs_k.png"
    fig.savefig(p2)
    plt.close(fig)
    return [p1, p2]
