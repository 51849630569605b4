"""Weighted-Sobolev ratio against epsilon.

Plots eps^2 * lhs / discrepancy for every sweep row over the eps columns;
a bounded curve means the 1/eps^2 growth of the estimate is not exceeded.
"""

import argparse
import sys

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from csvdata import ColumnError, column, eps_columns, load_rows


def build_figure(path):
    rows = load_rows(path)
    ts = column(rows, "t", path)
    series = eps_columns(rows, "ratio_eps2_sobolev_disc_eps", path)
    eps_values = [eps for eps, _ in series]
    fig, ax = plt.subplots(figsize=(5.5, 4.5))
    for i, t in enumerate(ts):
        ax.plot(eps_values, [vals[i] for _, vals in series], "o-", label=f"t={t:g}")
    ax.set_xscale("log")
    ax.set_xlabel(r"$\epsilon$")
    ax.set_ylabel(r"$\epsilon^2 \cdot$ weighted Sobolev lhs / discrepancy")
    ax.set_title("weighted Sobolev ratio")
    ax.legend()
    fig.tight_layout()
    return fig


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("csv", help="sweep CSV file")
    ap.add_argument("out", help="output image path")
    args = ap.parse_args(argv)
    try:
        fig = build_figure(args.csv)
    except (ColumnError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    fig.savefig(args.out, dpi=150)
    print(f"wrote {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
