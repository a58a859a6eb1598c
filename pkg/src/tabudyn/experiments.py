"""End-to-end experiment pipelines.

Each suite maps one instance (plus its optimal set when needed) to a flat
row dict and reduces the rows to a JSON-able summary.  Per-instance seeds
come from ``derive_seed(master, index, stage)`` so rows are independent of
scheduling order and of the number of worker processes.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from . import descent, exact, landscape, markov, stats, tabu
from .instance import BENCHMARK_OPTIMA, Instance, generate_set
from .rng import derive_seed
from .schedule import Orientation

# stage keys for derive_seed
COST, LOPT, DTABU, EST, PRED, RLD, DESC, INIT, TENURE = range(9)


def _rng(master: int, index: int, stage: int, *more: int) -> np.random.Generator:
    return np.random.default_rng(derive_seed(master, index, stage, *more))


def pmap(fn, items, jobs: int = 1):
    """Order-preserving map, optionally over a process pool."""
    items = list(items)
    if jobs <= 1 or len(items) <= 1:
        return [fn(*it) for it in items]
    with ProcessPoolExecutor(max_workers=jobs) as ex:
        return list(ex.map(_star, [(fn, it) for it in items]))


def _star(arg):
    fn, it = arg
    return fn(*it)


# --- instance sets ---------------------------------------------------------

def _solve_one(inst: Instance, budget: int):
    try:
        return exact.solve(inst, budget)
    except exact.BudgetExceeded:
        return None


def solved_set(n: int, m: int, wf: int, count: int, seed: int,
               budget: int = exact.DEFAULT_BUDGET, jobs: int = 1):
    """Generate ``count`` instances and their optimal sets, dropping any
    instance whose enumeration exceeds the node budget."""
    insts = generate_set(n, m, wf, count, seed)
    opts = pmap(_solve_one, [(i, budget) for i in insts], jobs)
    return [(i, o) for i, o in zip(insts, opts) if o is not None]


# --- cost model (predicted vs actual, static model, dominance) ------------

@dataclass(frozen=True)
class CostModelConfig:
    trials: int = 500
    lopt_samples: int = 5000
    dtabu_cap: int = 100_000
    simulations: int = 10_000
    tabu: tabu.TabuConfig = tabu.SMALL
    estimation: markov.EstimationConfig = field(default_factory=markov.EstimationConfig)


def cost_model_row(inst: Instance, opt: exact.OptimalSet, index: int, seed: int,
                   cfg: CostModelConfig = CostModelConfig()):
    """Returns (row, model)."""
    cs = tabu.solve_cost_stats(inst, opt.c_star, cfg.trials, cfg.tabu,
                               derive_seed(seed, index, COST))
    lo = landscape.mean_dlopt_opt(inst, opt, cfg.lopt_samples, _rng(seed, index, LOPT))
    dt = landscape.mean_dtabu_opt(inst, opt, cfg.dtabu_cap, cfg.tabu, _rng(seed, index, DTABU))
    est_cfg = cfg.estimation
    if est_cfg.tabu != cfg.tabu:
        est_cfg = markov.EstimationConfig(est_cfg.s_min, est_cfg.s_max, est_cfg.sample_interval,
                                          cfg.tabu, est_cfg.iteration_budget, est_cfg.saturation)
    er = markov.estimate_model(inst, opt, est_cfg, _rng(seed, index, EST), lo.mean,
                               return_details=True)
    pred = markov.predicted_cost(er.model, inst, opt, cfg.simulations, _rng(seed, index, PRED))
    hi = stats.rint(lo.mean)
    short = [i for i in range(2, hi + 1) if er.accepted[i] < est_cfg.s_min]
    row = {
        "name": inst.name, "n": inst.n, "m": inst.m, "wf": inst.wf,
        "c_star": opt.c_star, "num_optima": len(opt),
        "c_q2": cs.c_q2, "c_bar": cs.c_bar, "censored": cs.censored,
        "d_lopt": lo.mean, "d_tabu": dt.mean,
        "d_max": er.model.d_max, "c_bar_pred": pred.c_bar_pred,
        "est_iterations": er.iterations, "saturated": len(short),
    }
    return row, er.model


def _fit(xs, ys):
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    keep = (xs > 0) & (ys > 0)
    if keep.sum() < 2 or np.ptp(xs[keep]) == 0:
        return None, int(keep.sum())
    return stats.loglog_regression(xs[keep], ys[keep]), int(keep.sum())


def cost_model_summary(rows: list[dict], factor: float = 4.0) -> dict:
    pred = np.array([r["c_bar_pred"] for r in rows], dtype=float)
    act = np.array([r["c_bar"] for r in rows], dtype=float)
    dyn, n_dyn = _fit(pred, act)
    stat, n_stat = _fit([r["d_lopt"] for r in rows], [r["c_q2"] for r in rows])
    ok = (pred > 0) & (act > 0)
    ratio = np.where(ok, np.maximum(pred, act) / np.where(ok, np.minimum(pred, act), 1), np.inf)
    dom = np.array([r["d_tabu"] <= r["d_lopt"] for r in rows])
    return {
        "instances": len(rows),
        "dynamic_r2": None if dyn is None else dyn.r_squared,
        "dynamic_slope": None if dyn is None else dyn.slope,
        "dynamic_points": n_dyn,
        "within_factor": float(np.mean(ratio <= factor)),
        "factor": factor,
        "static_r2": None if stat is None else stat.r_squared,
        "static_points": n_stat,
        "dominance": float(dom.mean()),
    }


# --- run-length distributions ---------------------------------------------

def rld_row(inst: Instance, c_star: int, index: int, seed: int, trials: int = 1000,
            config: tabu.TabuConfig = tabu.SMALL, alpha: float = 0.01) -> dict:
    cs = tabu.solve_cost_stats(inst, c_star, trials, config, derive_seed(seed, index, RLD))
    x = cs.samples.astype(float)
    if cs.c_bar > 0:
        ks = stats.ks_vs_exponential(x, cs.c_bar)
        d, p = ks.d_stat, ks.p_value
        deficit = stats.left_tail_deficit(x, cs.c_bar)
    else:
        d, p, deficit = 1.0, 0.0, True
    return {"name": inst.name, "c_star": c_star, "c_q2": cs.c_q2, "c_bar": cs.c_bar,
            "censored": cs.censored, "d_stat": d, "p_value": p,
            "rejected": bool(p <= alpha), "left_tail_deficit": bool(deficit)}


def rld_summary(rows: list[dict]) -> dict:
    """KS rejection rate over the hardest half of the rows (by c_bar)."""
    hard = sorted(rows, key=lambda r: r["c_bar"], reverse=True)[: max(1, len(rows) // 2)]
    rej = [r for r in hard if r["rejected"]]
    return {"instances": len(rows), "hard": len(hard),
            "rejected_fraction": len(rej) / len(hard),
            "rejected_with_left_deficit": (sum(r["left_tail_deficit"] for r in rej) / len(rej)
                                           if rej else None)}


# --- descent distance ------------------------------------------------------

def descent_row(inst: Instance, target: int, index: int, seed: int, length: int = 1_000_000,
                config: tabu.TabuConfig = tabu.SMALL) -> dict:
    ds = landscape.descent_distance_series(inst, target, length, config,
                                           _rng(seed, index, DESC))
    return {"name": inst.name, "target": target, "length": length, "median": ds.median,
            "mean": ds.mean, "stddev": ds.stddev, "max": ds.max, "random_mean": ds.random_mean}


def benchmark_target(inst: Instance) -> int | None:
    return BENCHMARK_OPTIMA.get(inst.name) if inst.name else None


# --- tenure sweep -----------------------------------------------------------

TENURE_INTERVALS = ((6, 14), (10, 18), (14, 22))


def tenure_row(inst: Instance, opt: exact.OptimalSet, index: int, seed: int,
               intervals=TENURE_INTERVALS, trials: int = 500, lopt_samples: int = 5000,
               estimation: markov.EstimationConfig = markov.EstimationConfig()) -> dict:
    lo = landscape.mean_dlopt_opt(inst, opt, lopt_samples, _rng(seed, index, LOPT))
    row = {"name": inst.name, "d_lopt": lo.mean}
    for k, (a, b) in enumerate(intervals):
        cfg = tabu.TabuConfig(a, b, estimation.tabu.resample_period,
                              estimation.tabu.iteration_cap)
        cs = tabu.solve_cost_stats(inst, opt.c_star, trials, cfg,
                                   derive_seed(seed, index, TENURE, k))
        ecfg = markov.EstimationConfig(estimation.s_min, estimation.s_max,
                                       estimation.sample_interval, cfg,
                                       estimation.iteration_budget, estimation.saturation)
        model = markov.estimate_model(inst, opt, ecfg, _rng(seed, index, TENURE, k, 1), lo.mean)
        row[f"c_bar_{a}_{b}"] = cs.c_bar
        row[f"d_max_{a}_{b}"] = model.d_max
    return row


def tenure_summary(rows: list[dict], intervals=TENURE_INTERVALS) -> dict:
    keys = [f"{a}_{b}" for a, b in intervals]
    cb = [float(np.mean([r[f"c_bar_{k}"] for r in rows])) for k in keys]
    dm = [float(np.mean([r[f"d_max_{k}"] for r in rows])) for k in keys]
    inc = lambda v: all(x < y for x, y in zip(v, v[1:]))  # noqa: E731
    return {"intervals": keys, "mean_c_bar": cb, "mean_d_max": dm,
            "c_bar_increasing": inc(cb), "d_max_increasing": inc(dm)}


# --- initialization methods --------------------------------------------------

INIT_METHODS = ("RND_semi", "FCFS", "LRM", "MWKR", "SPT", "RND_actv", "RND_ndly")


def init_start(inst: Instance, method: str, rng) -> Orientation:
    """A local optimum obtained by steepest descent from the method's solution."""
    if method == "RND_semi":
        return descent.random_local_optimum(inst, rng)
    if method == "RND_actv":
        s = landscape.gt_construct(inst, "RANDOM", "active", rng)
    elif method == "RND_ndly":
        s = landscape.gt_construct(inst, "RANDOM", "nondelay", rng)
    else:
        s = landscape.gt_construct(inst, method, "active", rng)
    return descent.steepest_descent(inst, s, rng)


def init_row(inst: Instance, opt: exact.OptimalSet, index: int, seed: int,
             trials: int = 200, samples: int = 200,
             config: tabu.TabuConfig = tabu.SMALL) -> dict:
    row = {"name": inst.name}
    for k, meth in enumerate(INIT_METHODS):
        rng = _rng(seed, index, INIT, k)
        d = [exact.d_opt(init_start(inst, meth, rng), opt) for _ in range(samples)]
        costs = [tabu.ts_run(inst, init_start(inst, meth, rng), opt.c_star, config, rng).iterations
                 for _ in range(trials)]
        row[f"d_lopt_{meth}"] = float(np.mean(d))
        row[f"c_q2_{meth}"] = float(np.median(costs))
    return row


def init_summary(rows: list[dict]) -> dict:
    out = {}
    base = np.array([r["c_q2_RND_semi"] for r in rows], dtype=float)
    for meth in INIT_METHODS:
        c = np.array([r[f"c_q2_{meth}"] for r in rows], dtype=float)
        ok = base > 0
        out[meth] = {
            "mean_d_lopt": float(np.mean([r[f"d_lopt_{meth}"] for r in rows])),
            "mean_c_q2": float(c.mean()),
            "pct_diff_c_q2": (float(100 * np.mean((c[ok] - base[ok]) / base[ok]))
                              if ok.any() else None),
        }
    return out


# --- structure classes ---------------------------------------------------------

def structure_row(inst: Instance, opt: exact.OptimalSet, index: int, seed: int,
                  trials: int = 200, lopt_samples: int = 5000,
                  estimation: markov.EstimationConfig = markov.EstimationConfig()) -> dict:
    cs = tabu.solve_cost_stats(inst, opt.c_star, trials, estimation.tabu,
                               derive_seed(seed, index, COST))
    lo = landscape.mean_dlopt_opt(inst, opt, lopt_samples, _rng(seed, index, LOPT))
    model = markov.estimate_model(inst, opt, estimation, _rng(seed, index, EST), lo.mean)
    return {"name": inst.name, "wf": inst.wf, "c_q2": cs.c_q2, "c_bar": cs.c_bar,
            "d_lopt": lo.mean, "d_max": model.d_max}


def structure_summary(rows: list[dict]) -> dict:
    out = {}
    for wf in sorted({r["wf"] for r in rows}):
        sub = [r for r in rows if r["wf"] == wf]
        out[str(wf)] = {"instances": len(sub),
                        "mean_c_q2": float(np.mean([r["c_q2"] for r in sub])),
                        "mean_d_max": float(np.mean([r["d_max"] for r in sub]))}
    return out


def config_dict(cfg) -> dict:
    d = asdict(cfg)
    return {k: (v if not isinstance(v, float) or math.isfinite(v) else str(v))
            for k, v in d.items()}
