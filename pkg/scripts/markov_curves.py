"""Estimated transition probabilities and the v_i cost curve for one instance.

Writes model.json (the estimated chain) and curves.csv with, per distance i,
the closer/equal/farther probabilities under each gradient and the mean
simulated cost v_i from i.

    python scripts/markov_curves.py --n 6 --m 4 --seed 3 --out results/markov
"""

import argparse
import csv
import os
import sys

import numpy as np

from tabudyn.exact import solve
from tabudyn.instance import generate
from tabudyn.markov import EstimationConfig, Gradient, estimate_model, predicted_v


def run():
    p = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    p.add_argument("--n", type=int, default=6)
    p.add_argument("--m", type=int, default=4)
    p.add_argument("--wf", type=int, default=1)
    p.add_argument("--seed", type=int, default=3)
    p.add_argument("--trials", type=int, default=10_000)
    p.add_argument("--out", default="results/markov")
    a = p.parse_args()
    inst = generate(a.n, a.m, wf=a.wf, seed=a.seed)
    opt = solve(inst)
    rng = np.random.default_rng(a.seed)
    res = estimate_model(inst, opt, EstimationConfig(), rng, return_details=True)
    model = res.model
    os.makedirs(a.out, exist_ok=True)
    with open(os.path.join(a.out, "model.json"), "w") as f:
        f.write(model.to_json())
    with open(os.path.join(a.out, "curves.csv"), "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["i"] + [f"{g.name.lower()}_{o}" for g in Gradient
                            for o in ("closer", "equal", "farther")] + ["accepted", "v"])
        for i in range(1, model.d_max + 1):
            probs = [f"{p:.6g}" for g in Gradient for p in model.row(i, g)]
            v = predicted_v(model, i, a.trials, rng)
            w.writerow([i, *probs, int(res.accepted[i]), f"{v:.6g}"])
    print(f"{a.n}x{a.m} wf{a.wf} seed {a.seed}: {len(opt)} optima, c*={opt.c_star}, D_max={model.d_max}, "
          f"{res.iterations} iterations over {res.trials} trials")
    return 0


if __name__ == "__main__":
    sys.exit(run())
