"""Figure rendering for scan and solve reports, plus a standalone plot script.

Figures are written straight to files (Agg backend); the emitted script only
reads the CSV, so it can be rerun without this package installed.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .minimize import MinimizeReport
from .thresholds import MU_HALFLINE, MU_LINE, MU_WITNESS, ThresholdReport

__all__ = ["render_scan_figure", "render_solve_figure", "scan_plot_script"]

_MARKERS = [
    (MU_HALFLINE, "half-line critical mass"),
    (MU_WITNESS, "witness onset"),
    (MU_LINE, "line critical mass"),
]


def render_scan_figure(report: ThresholdReport, path) -> None:
    mus = [p.mu for p in report.points]
    energies = [p.best_energy for p in report.points]
    attained = np.array([p.attained for p in report.points], dtype=bool)

    fig, ax = plt.subplots(figsize=(7.0, 4.5))
    mus = np.asarray(mus)
    energies = np.asarray(energies)
    ax.plot(mus, energies, "-", color="0.6", lw=0.9, zorder=1)
    ax.plot(mus[~attained], energies[~attained], "o", ms=4, label="not attained")
    ax.plot(mus[attained], energies[attained], "s", ms=4, label="ground state")
    for x, label in _MARKERS:
        ax.axvline(x, color="gray", ls="--", lw=0.8)
        ax.annotate(label, (x, 0.98), xycoords=("data", "axes fraction"),
                    rotation=90, fontsize=7, va="top", ha="right")
    if report.bracket_lower is not None and report.bracket_upper is not None:
        ax.axvspan(report.bracket_lower, report.bracket_upper, color="orange",
                   alpha=0.2, label="threshold bracket")
    ax.axhline(0.0, color="black", lw=0.6)
    ax.set_xlabel("mass")
    ax.set_ylabel("best energy found")
    ax.legend(fontsize=8, loc="lower left")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_solve_figure(report: MinimizeReport, path) -> None:
    g = report.profile.graph
    fig, axes = plt.subplots(1, 2, figsize=(9.0, 3.6))

    ax = axes[0]
    offset = 0.0
    for eid in range(len(g.edges)):
        x = g.edge_x(eid) + offset
        ax.plot(x, report.profile.edge_values(eid),
                label=f"edge {eid}" + (" (core)" if g.edges[eid].is_compact_core else ""))
        offset += g.edges[eid].length
    ax.set_xlabel("arclength (edges laid end to end)")
    ax.set_ylabel("profile")
    ax.legend(fontsize=8)

    ax = axes[1]
    trace = np.asarray(report.energy_trace)
    ax.plot(np.arange(trace.size), trace, lw=0.9)
    ax.set_xlabel("iteration")
    ax.set_ylabel("energy")
    if trace.size > 1 and trace.min() < 0 < trace.max():
        ax.set_yscale("symlog", linthresh=1e-6)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def scan_plot_script(csv_name: str, png_name: str = "scan.png") -> str:
    """Source of a self-contained script that plots the scan CSV."""
    return f'''#!/usr/bin/env python3
"""Plot the ground-energy scan curve from {csv_name}."""
import csv
import math

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

mus, energies, attained = [], [], []
with open("{csv_name}") as fh:
    for row in csv.DictReader(fh):
        mus.append(float(row["mu"]))
        energies.append(float(row["best_energy"]))
        attained.append(row["attained"] == "1")

fig, ax = plt.subplots(figsize=(7.0, 4.5))
ax.plot(mus, energies, "-", color="0.6", lw=0.9)
ax.plot([m for m, a in zip(mus, attained) if not a],
        [e for e, a in zip(energies, attained) if not a], "o", ms=4,
        label="not attained")
ax.plot([m for m, a in zip(mus, attained) if a],
        [e for e, a in zip(energies, attained) if a], "s", ms=4,
        label="ground state")
for x, label in [
    (math.sqrt(3.0) * math.pi / 4.0, "half-line critical mass"),
    (math.sqrt(3.0), "witness onset"),
    (math.sqrt(3.0) * math.pi / 2.0, "line critical mass"),
]:
    ax.axvline(x, color="gray", ls="--", lw=0.8)
    ax.annotate(label, (x, 0.98), xycoords=("data", "axes fraction"),
                rotation=90, fontsize=7, va="top", ha="right")
ax.axhline(0.0, color="black", lw=0.6)
ax.set_xlabel("mass")
ax.set_ylabel("best energy found")
ax.legend(fontsize=8, loc="lower left")
fig.tight_layout()
fig.savefig("{png_name}", dpi=150)
print("wrote {png_name}")
'''
