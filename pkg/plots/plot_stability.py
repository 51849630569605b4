"""Log-log scatter of squared L2 distance against discrepancy.

Overlaying several sweep CSVs gives one legend entry per file; the dashed
guide has unit slope, so quadratic stability shows up as points running
parallel to it.
"""

import argparse
import os
import sys

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from csvdata import ColumnError, column, load_rows


def build_figure(paths):
    fig, ax = plt.subplots(figsize=(5.5, 4.5))
    ref_anchor = None
    for path in paths:
        rows = load_rows(path)
        disc = column(rows, "discrepancy", path)
        dist = [u + f for u, f in zip(column(rows, "dist_u_sq", path),
                                      column(rows, "dist_F_sq", path))]
        label = os.path.splitext(os.path.basename(path))[0]
        ax.loglog(dist, disc, "o-", label=label)
        if ref_anchor is None:
            ref_anchor = (dist[0], disc[0])
    x0, y0 = ref_anchor
    span = [x0 * 1e-2, x0 * 1e1]
    ax.loglog(span, [y0 / x0 * x for x in span], "k--", lw=0.8, label="slope 1")
    ax.set_xlabel(r"$\|u-u_0\|^2 + \|F-F_0\|^2$")
    ax.set_ylabel("discrepancy")
    ax.legend()
    ax.set_title("quadratic stability")
    fig.tight_layout()
    return fig


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("csv", nargs="+", help="sweep CSV file(s)")
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
