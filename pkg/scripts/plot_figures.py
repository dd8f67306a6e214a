"""Render the CSVs written by ``softrgg figure`` with matplotlib.

Usage: python scripts/plot_figures.py OUT_DIR [fig3|fig5]

matplotlib is needed only here; the package itself never imports it.
"""
import csv
import sys
from pathlib import Path

import matplotlib.pyplot as plt


def load(path):
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    return {k: [float(r[k]) for r in rows] for k in rows[0]}


def plot_fig3(out):
    labels = {"p_dis": "disconnected", "p_iso": "isolated node", "p_ucg": "uncrossed gap",
              "p_iso_or_ucg": "isolated or gap"}
    for path in sorted(out.glob("fig3_*_p_*.csv")):
        family = path.stem.split("_")[1]
        curve = path.stem.split("_", 2)[2]
        d = load(path)
        plt.plot(d["mean_degree"], d["p"], marker="o", ms=3, label=f"{family}: {labels.get(curve, curve)}")
    plt.xlabel("mean degree")
    plt.ylabel("proportion of trials")
    plt.legend()
    plt.savefig(out / "fig3.png", dpi=150)


def plot_fig5(out):
    for path in sorted(out.glob("fig5_*_p_iso.csv")):
        d = load(path)
        plt.plot(d["mean_degree"], d["p"], "o", label=f"{path.stem.split('_')[1]} simulation")
    d = load(out / "fig5_poisson.csv")
    plt.plot(d["mean_degree"], d["p"], "-", label="Poisson approximation")
    plt.xlabel("mean degree")
    plt.ylabel("P(at least one isolated node)")
    plt.legend()
    plt.savefig(out / "fig5.png", dpi=150)


if __name__ == "__main__":
    out = Path(sys.argv[1])
    which = sys.argv[2] if len(sys.argv) > 2 else "fig3"
    {"fig3": plot_fig3, "fig5": plot_fig5}[which](out)
