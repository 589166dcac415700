"""Figure rendering for command reports.

When a run is given a figure directory, each command drops one or more
PNGs there plus a ``summary.csv`` row per file, so a batch of runs leaves
a browsable trail.  Rendering is strictly optional; nothing here is
imported unless figures were requested.
"""

from __future__ import annotations

import csv
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .report import Report

_STYLE = {
    "figure.facecolor": "white",
    "axes.titlesize": 10,
    "axes.labelsize": 9,
    "xtick.labelsize": 7,
    "ytick.labelsize": 7,
    "figure.dpi": 120,
}


def _slug(text: str) -> str:
    return "".join(ch if ch.isalnum() or ch in "-_" else "-" for ch in text)


def _matrix_axes(ax, name: str, mat: np.ndarray, rows, cols):
    ax.imshow(mat.astype(float), cmap="Greys", vmin=0.0, vmax=1.0, aspect="auto")
    ax.set_title(name)
    if cols is not None and len(cols) <= 24:
        ax.set_xticks(range(len(cols)))
        ax.set_xticklabels(cols, rotation=90)
    if rows is not None and len(rows) <= 24:
        ax.set_yticks(range(len(rows)))
        ax.set_yticklabels(rows)


def render(report: Report, artifacts: dict, outdir: str | Path) -> list[Path]:
    """Write the report's figures and extend summary.csv.

    artifacts may carry:
      matrices: list of (title, bool array, row labels or None, col labels
        or None), drawn as one heatmap panel each
      series: list of (title, {label: float}), drawn as one bar panel each
    """
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []
    base = _slug(report.command + ("-" + "-".join(report.arguments) if report.arguments else ""))

    with plt.rc_context(_STYLE):
        matrices = artifacts.get("matrices", [])
        if matrices:
            fig, axes = plt.subplots(
                1, len(matrices), figsize=(3.2 * len(matrices) + 0.8, 3.2)
            )
            if len(matrices) == 1:
                axes = [axes]
            for ax, (name, mat, rows, cols) in zip(axes, matrices):
                _matrix_axes(ax, name, np.asarray(mat), rows, cols)
            fig.suptitle(f"{report.command}: {report.verdict}")
            fig.tight_layout()
            path = outdir / f"{base}-matrices.png"
            fig.savefig(path)
            plt.close(fig)
            written.append(path)

        series = artifacts.get("series", [])
        if series:
            fig, axes = plt.subplots(
                1, len(series), figsize=(3.2 * len(series) + 0.8, 3.0)
            )
            if len(series) == 1:
                axes = [axes]
            for ax, (name, values) in zip(axes, series):
                labels = list(values)
                ax.bar(range(len(labels)), [float(values[k]) for k in labels], color="#557")
                ax.set_xticks(range(len(labels)))
                ax.set_xticklabels([str(k) for k in labels], rotation=45, ha="right")
                ax.set_title(name)
            fig.suptitle(f"{report.command}: {report.verdict}")
            fig.tight_layout()
            path = outdir / f"{base}-summary.png"
            fig.savefig(path)
            plt.close(fig)
            written.append(path)

        if not written:
            # every run leaves at least a verdict card
            fig, ax = plt.subplots(figsize=(4.0, 1.6))
            ax.axis("off")
            ax.text(0.5, 0.6, report.command, ha="center", fontsize=12)
            ax.text(0.5, 0.25, report.verdict, ha="center", fontsize=10)
            path = outdir / f"{base}-verdict.png"
            fig.savefig(path)
            plt.close(fig)
            written.append(path)

    summary = outdir / "summary.csv"
    fresh = not summary.exists()
    with summary.open("a", newline="") as fh:
        writer = csv.writer(fh)
        if fresh:
            writer.writerow(["file", "command", "instance", "verdict"])
        for path in written:
            writer.writerow(
                [path.name, report.command, report.instance or "", report.verdict]
            )
    return written
