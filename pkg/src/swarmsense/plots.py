"""Figure rendering for results tables: four SVG panels per results file.

Panels mirror the evaluation layout: total energy, risk of collisions,
collision-type counts, and sensing mismatch, as per-method bars with standard
error whiskers.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .errors import DataError
from .metrics import aggregate

_BAR_STYLE = dict(color="#4878a8", edgecolor="black", linewidth=0.6)
_KIND_COLORS = {"cross": "#4878a8", "parallel": "#d1605e", "dest_occupied": "#e7ba52"}


def _bar_panel(methods, means, errs, ylabel, title, path):
    fig, ax = plt.subplots(figsize=(4.2, 3.0))
    x = range(len(methods))
    ax.bar(x, means, yerr=errs, capsize=3, **_BAR_STYLE)
    ax.set_xticks(list(x))
    ax.set_xticklabels(methods, rotation=20, ha="right", fontsize=8)
    ax.set_ylabel(ylabel)
    ax.set_title(title, fontsize=10)
    ax.grid(axis="y", alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, format="svg")
    plt.close(fig)


def render_results(rows: list[dict], out_dir: str | Path) -> dict[str, Path]:
    """Render the four metric panels from results rows; returns panel -> file path."""
    if not rows:
        raise DataError("no result rows to plot")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    summaries = aggregate(rows)
    methods = [s["method"] for s in summaries]

    paths = {}
    panels = [
        ("energy", "energy_J", "total energy (J)", "Energy consumption"),
        ("risk", "risk_ratio", "risk ratio d_r / d", "Risk of collisions"),
        ("mismatch", "mismatch_rss", "sensing mismatch (RSS)", "Sensing mismatch"),
    ]
    for name, metric, ylabel, title in panels:
        path = out_dir / f"{name}.svg"
        _bar_panel(
            methods,
            [s[f"{metric}_mean"] for s in summaries],
            [s[f"{metric}_stderr"] for s in summaries],
            ylabel,
            title,
            path,
        )
        paths[name] = path

    # grouped bars: detected collision classes per method
    fig, ax = plt.subplots(figsize=(4.6, 3.0))
    width = 0.26
    for k, kind in enumerate(("cross", "parallel", "dest_occupied")):
        xs = [i + (k - 1) * width for i in range(len(methods))]
        ax.bar(
            xs,
            [s[f"{kind}_mean"] for s in summaries],
            width=width,
            yerr=[s[f"{kind}_stderr"] for s in summaries],
            capsize=2,
            label=kind,
            color=_KIND_COLORS[kind],
            edgecolor="black",
            linewidth=0.5,
        )
    ax.set_xticks(range(len(methods)))
    ax.set_xticklabels(methods, rotation=20, ha="right", fontsize=8)
    ax.set_ylabel("detected collisions per run")
    ax.set_title("Collision types", fontsize=10)
    ax.legend(fontsize=7)
    ax.grid(axis="y", alpha=0.3)
    fig.tight_layout()
    path = out_dir / "collision_types.svg"
    fig.savefig(path, format="svg")
    plt.close(fig)
    paths["collision_types"] = path
    return paths


def render_field_quiver(samples, walls, path: str | Path) -> Path:
    """Quiver plot of a sampled steering field (debugging aid)."""
    path = Path(path)
    xs = [p[0] for p, _ in samples]
    ys = [p[1] for p, _ in samples]
    us = [v[0] for _, v in samples]
    vs = [v[1] for _, v in samples]
    fig, ax = plt.subplots(figsize=(5.0, 4.0))
    ax.quiver(xs, ys, us, vs, angles="xy", width=0.003)
    for (x1, y1), (x2, y2) in walls:
        ax.plot([x1, x2], [y1, y2], color="black", linewidth=1.5)
    ax.set_aspect("equal")
    fig.tight_layout()
    fig.savefig(path, format="svg")
    plt.close(fig)
    return path
