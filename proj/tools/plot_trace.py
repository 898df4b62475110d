#!/usr/bin/env python3
"""Plot a trace.csv written by `ucbf run`: state, barrier value vs threshold, rho and input."""

import argparse

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import pandas as pd


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("trace", help="path to trace.csv")
    ap.add_argument("-o", "--output", default="trace.png", help="image path")
    args = ap.parse_args()

    df = pd.read_csv(args.trace)
    t = df["t"]
    fig, axes = plt.subplots(4, 1, figsize=(8, 10), sharex=True)

    for col in [c for c in df.columns if c.startswith("x_")]:
        axes[0].plot(t, df[col], label=col)
    axes[0].set_ylabel("state")
    axes[0].legend(loc="best")

    axes[1].plot(t, df["h"], label="h")
    axes[1].plot(t, df["threshold"], "--", label="threshold")
    if "s" in df.columns:
        axes[1].plot(t, df["s"], label="s")
    axes[1].axhline(0.0, color="k", lw=0.5)
    axes[1].set_ylabel("barrier")
    axes[1].legend(loc="best")

    axes[2].plot(t, df["rho"], label="rho")
    for col in [c for c in df.columns if c.startswith("theta_hat_")]:
        axes[2].plot(t, df[col], label=col)
    axes[2].set_ylabel("adaptation")
    axes[2].legend(loc="best")

    for col in [c for c in df.columns if c.startswith("u_")]:
        axes[3].plot(t, df[col], label=col)
    axes[3].set_ylabel("input")
    axes[3].set_xlabel("t")
    axes[3].legend(loc="best")

    fig.tight_layout()
    fig.savefig(args.output, dpi=120)


if __name__ == "__main__":
    main()
