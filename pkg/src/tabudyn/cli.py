"""Command line: generate instance sets, enumerate optima, run experiments.

    python -m tabudyn generate --n 6 --m 4 --count 100 --seed 1 --out sets/6x4
    python -m tabudyn enumerate --instances sets/6x4
    python -m tabudyn experiment --suite cost-model --instances sets/6x4 --out results

Outputs are CSV rows plus a JSON summary carrying the version, seed and
configuration of the run.  ``TABUDYN_OUT`` sets the default output directory.
Exit status: 0 when all requested work completed, 1 on usage/input errors,
3 when some instances could not be enumerated within the node budget.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import subprocess
import sys
from importlib import metadata
from pathlib import Path

from . import exact, experiments as ex, instance as inst_mod, markov, tabu

SUITES = ("cost-model", "rld", "descent", "tenure", "init", "structure")
NEEDS_OPTIMA = {"cost-model", "tenure", "init", "structure"}
SIDE = ".optset.json"
OWN_FILES = {"manifest.json", "enumerate_status.json"}


def version() -> str:
    try:
        out = subprocess.run(["git", "describe", "--always", "--dirty", "--tags"],
                             cwd=Path(__file__).parent, capture_output=True, text=True,
                             timeout=5)
        if out.returncode == 0 and out.stdout.strip():
            return out.stdout.strip()
    except (OSError, subprocess.SubprocessError):
        pass
    try:
        return metadata.version("artifact")
    except metadata.PackageNotFoundError:
        return "unknown"


def _default_out() -> str:
    return os.environ.get("TABUDYN_OUT", "results")


def _instance_files(d: Path) -> list[Path]:
    files = [p for p in sorted(d.iterdir()) if p.is_file() and p.suffix in (".json", ".txt")
             and not p.name.endswith(SIDE) and p.name not in OWN_FILES]
    return files


def load_instances(d) -> list[inst_mod.Instance]:
    d = Path(d)
    if not d.is_dir():
        raise FileNotFoundError(f"instance directory {d} does not exist")
    out = []
    for p in _instance_files(d):
        i = inst_mod.load(p)
        if i.name is None:
            i = inst_mod.Instance(i.n, i.m, i.routing, i.duration, i.wf, i.seed, p.stem)
        out.append(i)
    return out


def sidecar(opt_dir, inst: inst_mod.Instance) -> Path:
    return Path(opt_dir) / f"{inst.digest()}{SIDE}"


def cmd_generate(a) -> int:
    try:
        insts = inst_mod.generate_set(a.n, a.m, a.wf, a.count, a.seed,
                                      duration_range=(a.lb, a.ub))
    except inst_mod.InstanceError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    out = Path(a.out)
    out.mkdir(parents=True, exist_ok=True)
    entries = []
    for i in insts:
        (out / f"{i.name}.json").write_text(inst_mod.serialize(i, "native-json"))
        entries.append({"name": i.name, "digest": i.digest(), "seed": i.seed})
    manifest = {"version": version(), "n": a.n, "m": a.m, "wf": a.wf, "count": a.count,
                "duration_range": [a.lb, a.ub], "seed": a.seed, "instances": entries}
    (out / "manifest.json").write_text(json.dumps(manifest, indent=1, sort_keys=True) + "\n")
    print(f"wrote {len(insts)} instances to {out}")
    return 0


def cmd_enumerate(a) -> int:
    try:
        insts = load_instances(a.instances)
    except (FileNotFoundError, inst_mod.InstanceError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    out = Path(a.out or a.instances)
    out.mkdir(parents=True, exist_ok=True)
    flagged, solved, skipped = [], 0, 0
    for i in insts:
        path = sidecar(out, i)
        if path.exists():
            skipped += 1
            continue
        try:
            opt = exact.solve(i, a.budget)
        except exact.BudgetExceeded:
            flagged.append(i.name)
            print(f"{i.name}: node budget exceeded", file=sys.stderr)
            continue
        opt.save(path, i.digest())
        solved += 1
    status = {"version": version(), "budget": a.budget, "solved": solved, "skipped": skipped,
              "budget_exceeded": flagged}
    (out / "enumerate_status.json").write_text(json.dumps(status, indent=1) + "\n")
    print(f"solved {solved}, already done {skipped}, over budget {len(flagged)}")
    return 3 if flagged else 0


def _write_csv(path: Path, rows: list[dict]) -> None:
    if not rows:
        path.write_text("")
        return
    cols = list(rows[0])
    with path.open("w", newline="") as f:
        w = csv.DictWriter(f, fieldnames=cols, lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow({k: (f"{v:.10g}" if isinstance(v, float) else v) for k, v in r.items()})


def _cost_model_task(i, o, k, seed, cfg):
    return ex.cost_model_row(i, o, k, seed, cfg)[0]


def cmd_experiment(a) -> int:
    if a.benchmark:
        try:
            insts = [inst_mod.benchmark(b) for b in a.benchmark]
        except (FileNotFoundError, KeyError, ValueError) as e:
            print(f"error: {e}", file=sys.stderr)
            return 1
    elif a.instances:
        try:
            insts = load_instances(a.instances)
        except (FileNotFoundError, inst_mod.InstanceError) as e:
            print(f"error: {e}", file=sys.stderr)
            return 1
    else:
        print("error: give --instances or --benchmark", file=sys.stderr)
        return 1
    opt_dir = Path(a.optima or a.instances or ".")
    opts = []
    for i in insts:
        p = sidecar(opt_dir, i)
        opts.append(exact.OptimalSet.load(p) if p.exists() else None)
    missing = [i.name for i, o in zip(insts, opts) if o is None]
    if a.suite in NEEDS_OPTIMA and missing:
        print(f"error: no optimal-set sidecar for {len(missing)} instance(s), e.g. "
              f"{missing[0]}; run `enumerate` first", file=sys.stderr)
        return 1

    def target(i, o):
        if a.target is not None:
            return a.target
        if o is not None:
            return o.c_star
        return ex.benchmark_target(i)

    if a.suite in ("rld", "descent"):
        bad = [i.name for i, o in zip(insts, opts) if target(i, o) is None]
        if bad:
            print(f"error: no target makespan for {bad[0]}; enumerate it or pass --target",
                  file=sys.stderr)
            return 1

    def cfg_for(i):
        base = tabu.default_config(i.n, i.m)
        lo = base.l_min if a.l_min is None else a.l_min
        hi = base.l_max if a.l_max is None else a.l_max
        return tabu.TabuConfig(lo, hi, a.period, a.cap)

    cfgs = [cfg_for(i) for i in insts]
    ests = [markov.EstimationConfig(tabu=c) for c in cfgs]
    seed, jobs = a.seed, a.jobs
    jobs_in = [(i, o, k, seed) for k, (i, o) in enumerate(zip(insts, opts))]
    config = {"suite": a.suite, "seed": seed,
              "tabu": {i.name: ex.config_dict(c) for i, c in zip(insts, cfgs)}}
    if a.suite == "cost-model":
        cms = [ex.CostModelConfig(trials=a.trials or 500, tabu=c, estimation=e)
               for c, e in zip(cfgs, ests)]
        cm, est = cms[0], ests[0]
        config["cost_model"] = {"trials": cm.trials, "lopt_samples": cm.lopt_samples,
                                "dtabu_cap": cm.dtabu_cap, "simulations": cm.simulations,
                                "s_min": est.s_min, "s_max": est.s_max,
                                "sample_interval": est.sample_interval,
                                "saturation": est.saturation}
        rows = ex.pmap(_cost_model_task, [j + (c,) for j, c in zip(jobs_in, cms)], jobs)
        summary = ex.cost_model_summary(rows)
    elif a.suite == "rld":
        trials = a.trials or 1000
        config["trials"] = trials
        rows = ex.pmap(ex.rld_row, [(i, target(i, o), k, seed, trials, c)
                                    for (i, o, k, seed), c in zip(jobs_in, cfgs)], jobs)
        summary = ex.rld_summary(rows)
    elif a.suite == "descent":
        config["length"] = a.length
        rows = ex.pmap(ex.descent_row, [(i, target(i, o), k, seed, a.length, c)
                                        for (i, o, k, seed), c in zip(jobs_in, cfgs)], jobs)
        summary = {"mean_of_means": sum(r["mean"] for r in rows) / len(rows)}
    elif a.suite == "tenure":
        trials = a.trials or 500
        config["trials"] = trials
        config["intervals"] = [list(t) for t in ex.TENURE_INTERVALS]
        rows = ex.pmap(ex.tenure_row, [j + (ex.TENURE_INTERVALS, trials, 5000, e)
                                       for j, e in zip(jobs_in, ests)], jobs)
        summary = ex.tenure_summary(rows)
    elif a.suite == "init":
        trials = a.trials or 200
        config["trials"] = trials
        rows = ex.pmap(ex.init_row, [j + (trials, 200, c) for j, c in zip(jobs_in, cfgs)], jobs)
        summary = ex.init_summary(rows)
    else:
        trials = a.trials or 200
        config["trials"] = trials
        rows = ex.pmap(ex.structure_row, [j + (trials, 5000, e) for j, e in zip(jobs_in, ests)],
                       jobs)
        summary = ex.structure_summary(rows)

    out = Path(a.out or _default_out())
    out.mkdir(parents=True, exist_ok=True)
    stem = a.suite.replace("-", "_")
    _write_csv(out / f"{stem}.csv", rows)
    doc = {"version": version(), "seed": seed, "config": config, "summary": summary}
    (out / f"{stem}.json").write_text(json.dumps(doc, indent=1, sort_keys=True) + "\n")
    print(json.dumps(summary, sort_keys=True))
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="tabudyn", description=__doc__.split("\n")[0])
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="write a seeded random instance set")
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--m", type=int, required=True)
    g.add_argument("--wf", type=int, default=1, help="workflow partitions (1 random, m flowshop)")
    g.add_argument("--count", type=int, default=1)
    g.add_argument("--lb", type=int, default=1)
    g.add_argument("--ub", type=int, default=99)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", default=None)
    g.set_defaults(fn=cmd_generate)

    e = sub.add_parser("enumerate", help="write optimal-set sidecars")
    e.add_argument("--instances", required=True)
    e.add_argument("--budget", type=int, default=exact.DEFAULT_BUDGET)
    e.add_argument("--out", default=None, help="sidecar directory (default: --instances)")
    e.set_defaults(fn=cmd_enumerate)

    x = sub.add_parser("experiment", help="run an experiment suite")
    x.add_argument("--suite", choices=SUITES, required=True)
    x.add_argument("--instances", default=None)
    x.add_argument("--benchmark", nargs="*", default=None, help="bundled instances, e.g. la16")
    x.add_argument("--optima", default=None, help="sidecar directory (default: --instances)")
    x.add_argument("--trials", type=int, default=None)
    x.add_argument("--length", type=int, default=1_000_000, help="descent series length")
    x.add_argument("--target", type=int, default=None)
    x.add_argument("--seed", type=int, default=0)
    x.add_argument("--l-min", dest="l_min", type=int, default=None,
                   help="tenure lower bound (default 6, or 8 at 10x10 and up)")
    x.add_argument("--l-max", dest="l_max", type=int, default=None)
    x.add_argument("--period", type=int, default=15)
    x.add_argument("--cap", type=int, default=1_000_000)
    x.add_argument("--jobs", type=int, default=os.cpu_count() or 1)
    x.add_argument("--out", default=None)
    x.set_defaults(fn=cmd_experiment)
    return p


def main(argv=None) -> int:
    a = build_parser().parse_args(argv)
    if a.command == "generate" and a.out is None:
        a.out = _default_out()
    return a.fn(a)


if __name__ == "__main__":
    sys.exit(main())
