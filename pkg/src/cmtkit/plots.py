"""Render curve CSVs produced by the report stage to PNG files.

Figures are a convenience companion to the delimited output; the CSVs stay
the contract checked by tests.
"""

from __future__ import annotations

import csv
from collections import defaultdict
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402


def render_curves_csv(csv_path, png_path=None) -> Path:
    """One long-format (x, curve, value) CSV -> one line plot."""
    csv_path = Path(csv_path)
    series: dict[str, list] = defaultdict(list)
    with open(csv_path) as f:
        for row in csv.DictReader(f):
            series[row["curve"]].append((float(row["x"]), float(row["value"])))

    fig, ax = plt.subplots(figsize=(7, 4.5))
    for name in sorted(series):
        pts = sorted(series[name])
        ax.plot([p[0] for p in pts], [p[1] for p in pts],
                marker=".", markersize=3, linewidth=1, label=name)
    positive = [v for pts in series.values() for _, v in pts if v > 0]
    if positive and min(positive) < 0.01:
        ax.set_yscale("log")
    ax.set_xlabel("x")
    ax.set_ylabel("value")
    ax.set_title(csv_path.stem)
    if len(series) <= 24:
        ax.legend(fontsize=6, ncol=2)
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    out = Path(png_path) if png_path else csv_path.with_suffix(".png")
    fig.savefig(out, dpi=150)
    plt.close(fig)
    return out


def render_all(out_dir) -> list:
    """Render every curves/*.csv under an output directory."""
    out_dir = Path(out_dir)
    rendered = []
    curve_dir = out_dir / "curves"
    if curve_dir.is_dir():
        for csv_path in sorted(curve_dir.glob("*.csv")):
            rendered.append(render_curves_csv(csv_path))
    return rendered
