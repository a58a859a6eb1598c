"""Predicted vs actual search cost on random 6x4 instances.

Generates the set, enumerates optimal sets, then runs the cost-model suite
(dynamic, quasi-dynamic and static models).  Output: results/cost_model/.

    python scripts/cost_model.py --count 100 --seed 1
"""

import argparse
import os
import sys

from tabudyn.cli import main


def run():
    p = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    p.add_argument("--n", type=int, default=6)
    p.add_argument("--m", type=int, default=4)
    p.add_argument("--count", type=int, default=100)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--trials", type=int, default=500)
    p.add_argument("--jobs", type=int, default=os.cpu_count() or 1)
    p.add_argument("--out", default="results/cost_model")
    a = p.parse_args()
    sets = os.path.join(a.out, "instances")
    steps = [
        ["generate", "--n", a.n, "--m", a.m, "--count", a.count, "--seed", a.seed, "--out", sets],
        ["enumerate", "--instances", sets],
        ["experiment", "--suite", "cost-model", "--instances", sets, "--trials", a.trials,
         "--seed", a.seed, "--jobs", a.jobs, "--out", a.out],
    ]
    for s in steps:
        rc = main([str(x) for x in s])
        if rc:
            return rc
    return 0


if __name__ == "__main__":
    sys.exit(run())
