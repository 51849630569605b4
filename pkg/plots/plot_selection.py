"""Penalized descent chains: G and E per iteration.

The iteration counter resets at each re-anchoring, which is drawn as a
dashed vertical marker.
"""

import argparse
import sys

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from csvdata import ColumnError, column, load_rows


def build_figure(path):
    rows = load_rows(path)
    iters = column(rows, "iter", path)
    g_vals = column(rows, "G", path)
    e_vals = column(rows, "E", path)
    steps = list(range(len(rows)))
    restarts = [k for k in steps[1:] if iters[k] == 0]
    fig, ax = plt.subplots(figsize=(6.0, 4.5))
    ax.plot(steps, g_vals, "-", color="tab:red", label="G (penalized)")
    ax.plot(steps, e_vals, "-", color="tab:blue", label="E (energy)")
    for k in restarts:
        ax.axvline(k, color="gray", ls="--", lw=0.8)
    ax.set_xlabel("accepted step")
    ax.set_ylabel("functional value")
    ax.set_title("selection descent" + (f" ({len(restarts)} re-anchorings)"
                                        if restarts else ""))
    ax.legend()
    fig.tight_layout()
    return fig


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("csv", help="iteration log CSV")
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
