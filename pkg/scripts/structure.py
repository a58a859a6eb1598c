"""Difficulty and D_max of random, workflow and flowshop instances.

One set per workflow factor (1 = random, 2 = workflow, m = flowshop), each
enumerated and run through the structure suite.  Output: results/structure/wf*/.

    python scripts/structure.py --count 100 --seed 1
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
    p.add_argument("--out", default="results/structure")
    a = p.parse_args()
    for wf in sorted({1, 2, a.m}):
        out = os.path.join(a.out, f"wf{wf}")
        sets = os.path.join(out, "instances")
        for s in (["generate", "--n", a.n, "--m", a.m, "--wf", wf, "--count", a.count,
                   "--seed", a.seed + wf, "--out", sets],
                  ["enumerate", "--instances", sets],
                  ["experiment", "--suite", "structure", "--instances", sets, "--trials",
                   a.trials, "--seed", a.seed, "--jobs", a.jobs, "--out", out]):
            rc = main([str(x) for x in s])
            if rc:
                return rc
    return 0


if __name__ == "__main__":
    sys.exit(run())
