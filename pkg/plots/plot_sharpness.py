"""Sharpness band: dist^2 / discrepancy across mollifier radii.

The shaded band spans the measured ratios; staying inside a fixed positive
band as the radius shrinks is the numerical signature that the quadratic
power in the stability inequality cannot be improved.
"""

import argparse
import sys

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from csvdata import ColumnError, column, load_rows


def build_figure(path):
    rows = load_rows(path)
    radii = column(rows, "radius", path)
    ratios = column(rows, "ratio_dist2_disc", path)
    fig, ax = plt.subplots(figsize=(5.5, 4.5))
    ax.plot(radii, ratios, "o-", color="tab:blue")
    ax.axhspan(min(ratios), max(ratios), color="tab:blue", alpha=0.15,
               label=f"band [{min(ratios):.3g}, {max(ratios):.3g}]")
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("mollifier radius R")
    ax.set_ylabel(r"$\|u - u_0\|^2$ / discrepancy")
    ax.set_title("sharpness of the quadratic power")
    ax.legend()
    fig.tight_layout()
    return fig


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("csv", help="sharpness CSV file")
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
