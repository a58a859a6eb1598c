"""Descent-distance statistics of the tabu search on OR-Library instances.

    python scripts/descent_table.py --length 1000000
"""

import argparse
import os
import sys

from tabudyn.cli import main

DEFAULT = ["la16", "la17", "la18", "la19", "la20", "abz5", "abz6", "ft06"]


def run():
    p = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    p.add_argument("--benchmark", nargs="*", default=DEFAULT)
    p.add_argument("--length", type=int, default=1_000_000)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--jobs", type=int, default=os.cpu_count() or 1)
    p.add_argument("--out", default="results/descent")
    a = p.parse_args()
    return main([str(x) for x in ["experiment", "--suite", "descent", "--benchmark",
                                  *a.benchmark, "--length", a.length, "--seed", a.seed,
                                  "--jobs", a.jobs, "--out", a.out]])


if __name__ == "__main__":
    sys.exit(run())
