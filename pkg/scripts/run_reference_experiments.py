#!/usr/bin/env python3
"""Reproduce the full reference experiment set into an output directory.

Runs every CLI command at the reference configuration (n=513, L=12 for the
solves), then aggregates the pass/fail report.  Takes a few minutes on one
core; set VORTEXLAB_THREADS to parallelize sweep rows.

Usage: python scripts/run_reference_experiments.py [OUTDIR]
"""

import os
import sys

from vortexlab.cli import main as vortexlab

OUT = sys.argv[1] if len(sys.argv) > 1 else "out"


def run(*args):
    print("+ vortexlab " + " ".join(args))
    rc = vortexlab(list(args))
    if rc != 0:
        sys.exit(rc)


os.makedirs(OUT, exist_ok=True)
sol_n1 = os.path.join(OUT, "sol_n1")
sol_n2 = os.path.join(OUT, "sol_n2")

run("solve", "--zeros", "0,0", "--grid", "513", "--box", "12", "--out", sol_n1)
run("solve", "--zeros=-2,0;2,0", "--grid", "513", "--box", "12", "--out", sol_n2)
run("sweep-stability", "--solution", sol_n1,
    "--t-list", "0.2,0.1,0.05,0.025", "--eps-list", "0.5,0.25,0.125",
    "--out", os.path.join(OUT, "sweep_n1.csv"))
run("sweep-stability", "--solution", sol_n2,
    "--t-list", "0.2,0.1,0.05,0.025", "--eps-list", "0.5,0.25,0.125",
    "--out", os.path.join(OUT, "sweep_n2.csv"))
run("sharpness", "--solution", sol_n1, "--center", "5,5",
    "--radius-list", "0.5,1,2", "--amplitude", "1.0",
    "--out", os.path.join(OUT, "sharpness.csv"))
run("hodge-suite", "--out", os.path.join(OUT, "hodge_suite.json"))
run("selection-run", "--solution", sol_n1, "--amplitude", "0.3", "--seed", "7",
    "--out", os.path.join(OUT, "selection_run.csv"))
run("poly-suite", "--out", os.path.join(OUT, "poly_suite.json"))
run("report", "--dir", OUT, "--out", os.path.join(OUT, "report.json"))
print(f"\nall reference experiments in {OUT}/, report at {OUT}/report.json")
