"""Distance-to-optimum statistics, descent distance and GT construction."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from . import _core
from .descent import random_local_optima_bits
from .exact import OptimalSet
from .instance import Instance
from .rng import as_rng, kernel_seed
from .schedule import Orientation, num_words
from .tabu import SMALL, TabuConfig, zobrist_keys


class IterationCapExceeded(RuntimeError):
    pass


@dataclass
class DistanceStats:
    mean: float
    histogram: np.ndarray  # histogram[d] = number of samples at distance d

    @property
    def count(self) -> int:
        return int(self.histogram.sum())


@dataclass
class DescentStats:
    median: float
    mean: float
    stddev: float
    max: int
    random_mean: float
    series: np.ndarray


def _hist(values, size) -> np.ndarray:
    return np.bincount(np.asarray(values, dtype=np.int64), minlength=size + 1)


def mean_dlopt_opt(inst: Instance, opt: OptimalSet, count: int = 5000, rng=None) -> DistanceStats:
    """Mean distance from random local optima to the nearest optimum."""
    if count < 1:
        raise ValueError("count must be >= 1")
    bits = random_local_optima_bits(inst, count, rng)
    d = _nearest_many(bits, opt.members)
    return DistanceStats(float(d.mean()), _hist(d, inst.num_pairs))


@njit(cache=True)
def _nearest_many(bits, members):
    out = np.empty(bits.shape[0], dtype=np.int64)
    for t in range(bits.shape[0]):
        out[t] = _core.nearest_distance(bits[t], members)
    return out


@njit(cache=True)
def _dtabu(n, m, mach, opof, dur, c_star, params, trial_cap, zob, members, sample_cap, seed):
    _core.seed(seed)
    nw = members.shape[1]
    hist = np.zeros(m * n * (n - 1) // 2 + 1, dtype=np.int64)
    order = np.empty((m, n), dtype=np.int64)
    ws = _core.workspace(n, m)
    tabu = np.zeros((m, n, n), dtype=np.int64)
    ring = np.zeros(_core.RING, dtype=np.uint64)
    flips = np.zeros((max(params[4], 1), 3), dtype=np.int64)
    dist = np.zeros(members.shape[0], dtype=np.int64)
    recorded = 0
    while recorded < sample_cap:
        _core.random_local_optimum(n, m, mach, opof, dur, order, ws)
        st = _core.ts_init(order, opof, dur, m, ws, zob)
        tabu[:] = 0
        bits = _core.pack_bits(order, nw)
        d = _core.init_dist(bits, members, dist)
        hist[d] += 1
        recorded += 1
        while st[_core.CUR] > c_star and recorded < sample_cap:
            if st[_core.IT] >= trial_cap:
                return hist, False
            nf = _core.ts_step(order, opof, mach, dur, ws, tabu, st, params, ring, zob, flips)
            for f in range(nf):
                d = _core.flip_dist(n, bits, members, dist, flips[f, 0], flips[f, 1], flips[f, 2])
            hist[d] += 1
            recorded += 1
    return hist, True


def mean_dtabu_opt(inst: Instance, opt: OptimalSet, sample_cap: int = 100_000,
                   config: TabuConfig = SMALL, rng=None) -> DistanceStats:
    """Mean distance to the nearest optimum over every solution visited by
    successive tabu trials (each ending at an optimum), stopped mid-trial
    once ``sample_cap`` solutions are recorded."""
    if sample_cap < 1:
        raise ValueError("sample_cap must be >= 1")
    if config.operator != "N1":
        raise ValueError("visited-solution statistics use the N1 search")
    hist, ok = _dtabu(inst.n, inst.m, inst.mach, inst.opof, inst.dur, opt.c_star,
                      config.params(), config.iteration_cap, zobrist_keys(inst.num_pairs),
                      opt.members, int(sample_cap), kernel_seed(as_rng(rng)))
    if not ok:
        raise IterationCapExceeded(f"a trial exceeded {config.iteration_cap} iterations")
    d = np.arange(hist.size)
    return DistanceStats(float((d * hist).sum() / hist.sum()), hist)


@njit(cache=True)
def _descent_dist(order, opof, dur, m, tmp, ws2, nw):
    tmp[:] = order
    _core.set_links(tmp, opof, ws2)
    _core.steepest_descent(tmp, opof, dur, m, ws2)
    return _core.hamming(_core.pack_bits(order, nw), _core.pack_bits(tmp, nw))


@njit(cache=True)
def _descent_series(n, m, mach, opof, dur, target, params, length, zob, seed):
    _core.seed(seed)
    nw = (m * n * (n - 1) // 2 + 63) // 64
    ts_dd = np.zeros(length, dtype=np.int64)
    rnd_dd = np.zeros(length, dtype=np.int64)
    order = np.empty((m, n), dtype=np.int64)
    tmp = np.empty((m, n), dtype=np.int64)
    ws = _core.workspace(n, m)
    ws2 = _core.workspace(n, m)
    tabu = np.zeros((m, n, n), dtype=np.int64)
    ring = np.zeros(_core.RING, dtype=np.uint64)
    flips = np.zeros((max(params[4], 1), 3), dtype=np.int64)
    t = 0
    while t < length:
        _core.random_local_optimum(n, m, mach, opof, dur, order, ws)
        st = _core.ts_init(order, opof, dur, m, ws, zob)
        tabu[:] = 0
        # at least one step per trial, so a start already at the target cannot stall us
        while t < length:
            _core.ts_step(order, opof, mach, dur, ws, tabu, st, params, ring, zob, flips)
            ts_dd[t] = _descent_dist(order, opof, dur, m, tmp, ws2, nw)
            t += 1
            if st[_core.CUR] <= target:
                break
    for r in range(length):
        _core.random_semi_active(n, m, mach, order)
        rnd_dd[r] = _descent_dist(order, opof, dur, m, tmp, ws2, nw)
    return ts_dd, rnd_dd


def descent_distance_series(inst: Instance, target_makespan: int, length: int = 1_000_000,
                            config: TabuConfig = SMALL, rng=None) -> DescentStats:
    """Descent distance of the tabu search's current solution at every
    iteration (restarting whenever the target is hit), with the mean over
    ``length`` random semi-active solutions for comparison."""
    if length < 1:
        raise ValueError("length must be >= 1")
    ts_dd, rnd_dd = _descent_series(inst.n, inst.m, inst.mach, inst.opof, inst.dur,
                                    int(target_makespan), config.params(), int(length),
                                    zobrist_keys(inst.num_pairs), kernel_seed(as_rng(rng)))
    return DescentStats(float(np.median(ts_dd)), float(ts_dd.mean()), float(ts_dd.std()),
                        int(ts_dd.max()), float(rnd_dd.mean()), ts_dd)


# --- Giffler-Thompson construction -----------------------------------------

PDRS = ("FCFS", "LRM", "MWKR", "SPT", "RANDOM")


def gt_construct(inst: Instance, pdr: str = "SPT", mode: str = "active", rng=None) -> Orientation:
    """Giffler-Thompson generation with a priority dispatching rule.

    FCFS picks the longest-waiting job (ready earliest), lowest index on ties.
    LRM / MWKR use remaining work excluding / including the current operation.
    Other ties are broken uniformly at random.
    """
    if pdr not in PDRS:
        raise ValueError(f"unknown rule {pdr!r}")
    if mode not in ("active", "nondelay"):
        raise ValueError(f"unknown mode {mode!r}")
    rng = as_rng(rng)
    n, m = inst.n, inst.m
    dur = np.asarray(inst.duration, dtype=np.int64)
    mach = np.asarray(inst.routing, dtype=np.int64)
    rem = dur[:, ::-1].cumsum(axis=1)[:, ::-1]  # rem[j, p] = work from position p on
    nxt = np.zeros(n, dtype=np.int64)
    job_ready = np.zeros(n, dtype=np.int64)
    mach_ready = np.zeros(m, dtype=np.int64)
    seqs: list[list[int]] = [[] for _ in range(m)]
    for _ in range(n * m):
        jobs = np.flatnonzero(nxt < m)
        ks = mach[jobs, nxt[jobs]]
        est = np.maximum(job_ready[jobs], mach_ready[ks])
        ect = est + dur[jobs, nxt[jobs]]
        if mode == "active":
            k = ks[int(np.argmin(ect))]
            cand = jobs[(ks == k) & (est < ect.min())]
        else:
            t = est.min()
            # machine of the earliest-startable op with the smallest completion
            pick = np.flatnonzero(est == t)
            k = ks[pick[int(np.argmin(ect[pick]))]]
            cand = jobs[(ks == k) & (est == t)]
        p = nxt[cand]
        if pdr == "FCFS":
            key = job_ready[cand].astype(float)
            best = cand[key == key.min()]
            j = int(best.min())
        else:
            if pdr == "SPT":
                key = dur[cand, p].astype(float)
            elif pdr == "LRM":
                key = -(rem[cand, p] - dur[cand, p]).astype(float)
            elif pdr == "MWKR":
                key = -rem[cand, p].astype(float)
            else:
                key = np.zeros(len(cand))
            best = cand[key == key.min()]
            j = int(rng.choice(best))
        pj = nxt[j]
        s = max(job_ready[j], mach_ready[k])
        job_ready[j] = mach_ready[k] = s + dur[j, pj]
        seqs[k].append(j)
        nxt[j] += 1
    return Orientation(np.array(seqs, dtype=np.int64))
