"""Tenure-interval sweep and initialization-method comparison on random 6x4 instances.

    python scripts/tenure_and_init.py --count 20 --seed 1
"""

import argparse
import os
import sys

from tabudyn.cli import main


def run():
    p = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    p.add_argument("--count", type=int, default=20)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--jobs", type=int, default=os.cpu_count() or 1)
    p.add_argument("--out", default="results/tenure_init")
    a = p.parse_args()
    sets = os.path.join(a.out, "instances")
    for s in (["generate", "--n", 6, "--m", 4, "--count", a.count, "--seed", a.seed,
               "--out", sets],
              ["enumerate", "--instances", sets],
              ["experiment", "--suite", "tenure", "--instances", sets, "--seed", a.seed,
               "--jobs", a.jobs, "--out", a.out],
              ["experiment", "--suite", "init", "--instances", sets, "--seed", a.seed,
               "--jobs", a.jobs, "--out", a.out]):
        rc = main([str(x) for x in s])
        if rc:
            return rc
    return 0


if __name__ == "__main__":
    sys.exit(run())
