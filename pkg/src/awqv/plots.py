"""Figures for a results directory, written next to the CSV output.

Uses ``matplotlib.figure.Figure`` directly (no pyplot state), so rendering is
safe from worker processes and never opens a window.
"""
from __future__ import annotations

from pathlib import Path

import numpy as np
from matplotlib.figure import Figure

from .trace import read_jsonl

DPI = 150


def _methods(rows):
    return list(dict.fromkeys(r["method"] for r in rows))


def _ok(rows, key):
    return [r for r in rows if r.get("status", "ok") == "ok" and r.get(key, "") != ""]


def plot_pgs(rows, path) -> Path | None:
    rows = _ok(rows, "p_gs")
    methods = _methods(rows)
    if not methods:
        return None
    fig = Figure(figsize=(1.2 + 1.1 * len(methods), 3.2))
    ax = fig.add_subplot()
    rng = np.random.default_rng(0)
    for k, m in enumerate(methods):
        y = np.array([float(r["p_gs"]) for r in rows if r["method"] == m])
        ax.scatter(k + rng.uniform(-0.18, 0.18, y.size), y, s=10, alpha=0.7)
        ax.hlines(y.mean(), k - 0.3, k + 0.3, color="k", lw=1)
    ax.set_xticks(range(len(methods)), methods, rotation=30, ha="right", fontsize=8)
    ax.set_ylim(-0.03, 1.03)
    ax.set_ylabel(r"$p_{\mathrm{gs}}$")
    fig.tight_layout()
    fig.savefig(path, dpi=DPI)
    return Path(path)


def plot_alpha(rows, path) -> Path | None:
    rows = _ok(rows, "p_gs")
    methods = _methods(rows)
    ms = sorted(int(c[len("e_alpha_M"):]) for c in (rows[0] if rows else {}) if c.startswith("e_alpha_M"))
    if not methods or not ms:
        return None
    fig = Figure(figsize=(1.5 + 1.4 * len(methods), 3.2))
    ax = fig.add_subplot()
    width = 0.8 / len(ms)
    for j, M in enumerate(ms):
        data = [[float(r[f"e_alpha_M{M}"]) for r in rows if r["method"] == m] for m in methods]
        pos = np.arange(len(methods)) - 0.4 + width * (j + 0.5)
        bp = ax.boxplot(data, positions=pos, widths=width * 0.9, patch_artist=True,
                        showfliers=True, flierprops={"markersize": 2})
        color = f"C{j}"
        for box in bp["boxes"]:
            box.set_facecolor(color)
            box.set_alpha(0.6)
        ax.plot([], [], color=color, lw=6, alpha=0.6, label=f"M={M}")
    ax.set_xticks(range(len(methods)), methods, rotation=30, ha="right", fontsize=8)
    ax.set_ylabel(r"$\mathbb{E}_M[\alpha]$")
    ax.legend(fontsize=7, ncol=len(ms), loc="lower left")
    fig.tight_layout()
    fig.savefig(path, dpi=DPI)
    return Path(path)


def plot_failures(failures, path) -> Path | None:
    if not failures:
        return None
    fig = Figure(figsize=(4.5, 3.2))
    ax = fig.add_subplot()
    for m in _methods(failures):
        pts = sorted((int(f["M"]), int(f["failures"])) for f in failures if f["method"] == m)
        ax.plot(*zip(*pts), marker="o", ms=3, label=m)
    ax.set_xlabel("sampling budget M")
    ax.set_ylabel("failures")
    ax.legend(fontsize=7)
    fig.tight_layout()
    fig.savefig(path, dpi=DPI)
    return Path(path)


def plot_traces(trace_dir, path) -> Path | None:
    """Mean and standard deviation of energy and p_gs per method over iterations."""
    files = sorted(Path(trace_dir).glob("*.jsonl"))
    curves: dict[str, list[list[dict]]] = {}
    for f in files:
        tag = f.stem.split("__", 1)[-1]
        curves.setdefault(tag, []).append(read_jsonl(f))
    if not curves:
        return None
    fig = Figure(figsize=(3.2 * len(curves), 3.0))
    for k, (tag, runs) in enumerate(curves.items()):
        ax = fig.add_subplot(1, len(curves), k + 1)
        steps = min(len(r) for r in runs)
        E = np.array([[row["energy"] for row in r[:steps]] for r in runs])
        P = np.array([[row["p_gs"] for row in r[:steps]] for r in runs])
        x = np.arange(steps)
        ax.plot(x, E.mean(0), color="C1")
        ax.fill_between(x, E.mean(0) - E.std(0), E.mean(0) + E.std(0), color="C1", alpha=0.25)
        ax.set_title(tag, fontsize=9)
        ax.set_xlabel("iteration")
        if k == 0:
            ax.set_ylabel(r"$\langle H\rangle$", color="C1")
        ax2 = ax.twinx()
        ax2.plot(x, P.mean(0), color="C0")
        ax2.fill_between(x, P.mean(0) - P.std(0), P.mean(0) + P.std(0), color="C0", alpha=0.25)
        ax2.set_ylim(0, 1)
        if k == len(curves) - 1:
            ax2.set_ylabel(r"$p_{\mathrm{gs}}$", color="C0")
    fig.tight_layout()
    fig.savefig(path, dpi=DPI)
    return Path(path)


def render_suite_figures(results_dir, rows=None, failures=None) -> list[Path]:
    from .harness import read_metrics, summarize

    results_dir = Path(results_dir)
    if rows is None:
        rows = read_metrics(results_dir / "metrics.csv")
    if failures is None:
        failures = summarize(results_dir, figures=False)["failures"]
    figdir = results_dir / "figures"
    figdir.mkdir(exist_ok=True)
    made = [
        plot_pgs(rows, figdir / "p_gs.png"),
        plot_alpha(rows, figdir / "expected_alpha.png"),
        plot_failures(failures, figdir / "failures_vs_M.png"),
        plot_traces(results_dir / "traces", figdir / "traces.png"),
    ]
    return [p for p in made if p is not None]
