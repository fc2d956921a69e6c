#!/usr/bin/env python3
"""Plot timeseries.csv files written by `qplab run`."""

import argparse
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import pandas as pd


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("csv", nargs="+", type=Path, help="one or more timeseries.csv files")
    ap.add_argument("-o", "--out", type=Path, default=Path("timeseries.png"))
    ap.add_argument("--columns", default="mass,l2,linf,energy,oracle_error")
    ap.add_argument("--logy", action="store_true", help="log scale for norms and errors")
    args = ap.parse_args()

    frames = {p: pd.read_csv(p) for p in args.csv}
    cols = [c for c in args.columns.split(",") if any(c in f.columns for f in frames.values())]
    if not cols:
        ap.error("none of the requested columns are present")

    fig, axes = plt.subplots(len(cols), 1, figsize=(7, 2.2 * len(cols)), sharex=True, squeeze=False)
    for ax, col in zip(axes[:, 0], cols):
        for path, df in frames.items():
            if col in df.columns:
                ax.plot(df["t"], df[col], label=path.parent.name or str(path))
        # window boundaries of the first file
        first = next(iter(frames.values()))
        for t in first.groupby("window")["t"].min().iloc[1:]:
            ax.axvline(t, color="0.85", lw=0.6, zorder=0)
        ax.set_ylabel(col)
        if args.logy and col != "mass":
            ax.set_yscale("log")
    axes[-1, 0].set_xlabel("t")
    if len(frames) > 1:
        axes[0, 0].legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(args.out, dpi=120)
    print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
