"""Run-length distributions against the exponential, on random 6x6 instances.

Only the optimal makespan is needed, so instances are enumerated with the
default budget and the rld suite runs 1000 trials per instance.
Output: results/rld/.

    python scripts/rld.py --count 50 --seed 1
"""

import argparse
import os
import sys

from tabudyn.cli import main


def run():
    p = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    p.add_argument("--n", type=int, default=6)
    p.add_argument("--m", type=int, default=6)
    p.add_argument("--count", type=int, default=50)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--jobs", type=int, default=os.cpu_count() or 1)
    p.add_argument("--out", default="results/rld")
    a = p.parse_args()
    sets = os.path.join(a.out, "instances")
    rc = main([str(x) for x in ["generate", "--n", a.n, "--m", a.m, "--count", a.count,
                                "--seed", a.seed, "--out", sets]])
    if rc:
        return rc
    rc = main(["enumerate", "--instances", sets])
    if rc not in (0, 3):
        return rc
    return main([str(x) for x in ["experiment", "--suite", "rld", "--instances", sets,
                                  "--trials", a.trials, "--seed", a.seed, "--jobs", a.jobs,
                                  "--out", a.out]])


if __name__ == "__main__":
    sys.exit(run())
