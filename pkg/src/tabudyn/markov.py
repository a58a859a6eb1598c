"""Biased random-walk model of tabu search over distance-to-optimum.

States are (i, x): distance i to the nearest optimum and the gradient x of
the last step.  Transition probabilities are estimated from sampled TS_N1
trajectories and the chain is simulated to predict search cost.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field

import numpy as np
from numba import njit, types
from numba.typed import Dict

from . import _core
from .exact import OptimalSet
from .descent import random_local_optima_bits
from .instance import Instance
from .landscape import _nearest_many
from .rng import as_rng, kernel_seed
from .stats import rint
from .tabu import SMALL, TabuConfig, zobrist_keys


class Gradient(enum.IntEnum):
    CLOSER = -1
    EQUAL = 0
    FARTHER = 1

    @property
    def col(self) -> int:
        """Column in probability triples (closer, equal, farther)."""
        return int(self) + 1


class CoverageError(RuntimeError):
    pass


STEP_CAP = 10**9


@dataclass
class MarkovModel:
    """prob[i, x + 1] = (P(closer), P(equal), P(farther)) from state (i, x),
    for 1 <= i <= d_max; row 0 is unused.  support[i, x + 1] counts the
    samples behind each row (0 for filled rows)."""

    d_max: int
    prob: np.ndarray
    support: np.ndarray = field(default=None)

    def __post_init__(self):
        self.prob = np.asarray(self.prob, dtype=float)
        if self.support is None:
            self.support = np.zeros(self.prob.shape[:2], dtype=np.int64)
        if self.prob.shape != (self.d_max + 1, 3, 3):
            raise ValueError(f"prob must have shape {(self.d_max + 1, 3, 3)}")
        rows = self.prob[1:]
        if np.any(rows < 0) or np.any(rows > 1) or not np.allclose(rows.sum(axis=2), 1, atol=1e-9):
            raise ValueError("probability rows must lie in [0, 1] and sum to 1")
        if np.any(self.prob[self.d_max, :, 2] != 0):
            raise ValueError("rows at d_max may not move farther")

    def row(self, i: int, x: Gradient) -> np.ndarray:
        return self.prob[i, Gradient(x).col]

    def to_dict(self) -> dict:
        rows = []
        for i in range(1, self.d_max + 1):
            for x in Gradient:
                p = self.prob[i, x.col]
                rows.append([i, int(x), float(p[0]), float(p[1]), float(p[2]),
                             int(self.support[i, x.col])])
        return {"d_max": self.d_max, "rows": rows}

    def to_json(self) -> str:
        return json.dumps(self.to_dict()) + "\n"

    @classmethod
    def from_dict(cls, d: dict) -> "MarkovModel":
        dm = int(d["d_max"])
        prob = np.zeros((dm + 1, 3, 3))
        sup = np.zeros((dm + 1, 3), dtype=np.int64)
        for i, x, pc, pe, pf, s in d["rows"]:
            prob[i, x + 1] = (pc, pe, pf)
            sup[i, x + 1] = s
        return cls(dm, prob, sup)

    @classmethod
    def from_json(cls, text: str) -> "MarkovModel":
        return cls.from_dict(json.loads(text))


@dataclass(frozen=True)
class EstimationConfig:
    s_min: int = 50
    s_max: int = 250
    sample_interval: int = 100
    tabu: TabuConfig = SMALL
    iteration_budget: int = 200_000_000
    # A distance whose distinct solutions seem exhausted (this many repeated
    # candidates while still short of s_min) stops blocking coverage; 0
    # disables the rule.
    saturation: int = 50

    def __post_init__(self):
        if not 1 <= self.s_min <= self.s_max:
            raise ValueError("need 1 <= s_min <= s_max")
        if self.saturation < 0:
            raise ValueError("saturation must be >= 0")
        if self.sample_interval < 1:
            raise ValueError("sample_interval must be >= 1")


@dataclass
class EstimationResult:
    model: MarkovModel
    accepted: np.ndarray  # accepted samples per distance
    duplicates: np.ndarray  # repeated candidates per distance
    transitions: np.ndarray  # raw counts [i, x + 1, outcome]
    iterations: int
    trials: int


_MIX = np.int64(-7046029254386353131)  # 0x9E3779B97F4A7C15 as signed


@njit(cache=True)
def _covered(acc, dups, lo, hi, s_min, saturation):
    for i in range(lo, hi + 1):
        if acc[i] < s_min and not (saturation > 0 and dups[i] >= saturation):
            return False
    return True


@njit(cache=True)
def _estimate(n, m, mach, opof, dur, c_star, params, trial_cap, zob, members,
              s_min, s_max, saturation, interval, cover_hi, budget, seed):
    _core.seed(seed)
    nw = members.shape[1]
    P = m * n * (n - 1) // 2
    acc = np.zeros(P + 2, dtype=np.int64)
    dups = np.zeros(P + 2, dtype=np.int64)
    trans = np.zeros((P + 2, 3, 3), dtype=np.int64)
    seen = Dict.empty(key_type=types.int64, value_type=types.int64)
    order = np.empty((m, n), dtype=np.int64)
    ws = _core.workspace(n, m)
    tabu = np.zeros((m, n, n), dtype=np.int64)
    ring = np.zeros(_core.RING, dtype=np.uint64)
    flips = np.zeros((max(params[4], 1), 3), dtype=np.int64)
    clock = 0
    total = 0
    trials = 0
    if cover_hi < 2:
        return acc, dups, trans, total, trials, True
    while True:
        _core.random_local_optimum(n, m, mach, opof, dur, order, ws)
        st = _core.ts_init(order, opof, dur, m, ws, zob)
        tabu[:] = 0
        trials += 1
        bits = _core.pack_bits(order, nw)
        h = _core.zobrist_hash(order, zob)
        first = True
        pending = False
        pi = 0
        px = 0
        d = -1
        dprev = -1
        while True:
            sample_now = clock % interval == 0
            if pending or sample_now or (clock + 1) % interval == 0 or first:
                d = _core.nearest_distance(bits, members)
            else:
                d = -1
            if pending:
                out = 0 if d < pi else (1 if d == pi else 2)
                trans[pi, px, out] += 1
                pending = False
                if _covered(acc, dups, 2, cover_hi, s_min, saturation):
                    return acc, dups, trans, total, trials, True
            if sample_now and d >= 1 and acc[d] < s_max:
                if first or dprev < 0:
                    x = 0 if np.random.random() < 0.5 else 2
                else:
                    x = 0 if d < dprev else (1 if d == dprev else 2)
                key = np.int64(h) ^ (np.int64(d) * _MIX)
                if key not in seen:
                    seen[key] = 1
                    acc[d] += 1
                    pending = True
                    pi = d
                    px = x
                else:
                    dups[d] += 1
            dprev = d
            first = False
            clock += 1
            if st[_core.CUR] <= c_star:
                break
            if st[_core.IT] >= trial_cap and not pending:
                break
            if total >= budget:
                return acc, dups, trans, total, trials, False
            nf = _core.ts_step(order, opof, mach, dur, ws, tabu, st, params, ring, zob, flips)
            total += 1
            for f in range(nf):
                k, a, b = flips[f, 0], flips[f, 1], flips[f, 2]
                h = _core._flip_hash(n, zob, h, k, a, b)
                if a < b:
                    idx = _core.pair_index(n, k, a, b)
                else:
                    idx = _core.pair_index(n, k, b, a)
                bits[idx >> 6] ^= _core.ONE << np.uint64(idx & 63)


def _fill(prob: np.ndarray, support: np.ndarray, d_max: int) -> None:
    """Unsupported rows copy the nearest lower-i row with the same gradient,
    else the nearest higher one, else move closer with certainty.  The top
    row must keep some closer mass, otherwise (d_max, x) would be a second
    absorbing state."""
    for x in range(3):
        have = [i for i in range(1, d_max + 1) if support[i, x] > 0]
        for i in range(1, d_max + 1):
            if support[i, x] > 0:
                continue
            lower = [j for j in have if j < i]
            higher = [j for j in have if j > i]
            if lower:
                prob[i, x] = prob[lower[-1], x]
            elif higher:
                prob[i, x] = prob[higher[0], x]
            else:
                prob[i, x] = (1.0, 0.0, 0.0)
    # reflecting barrier
    top = prob[d_max]
    top[:, 2] = 0.0
    for x in range(3):
        s = top[x].sum()
        top[x] = top[x] / s if s > 0 and top[x, 0] > 0 else (1.0, 0.0, 0.0)


def build_model(accepted: np.ndarray, trans: np.ndarray, s_min: int,
                duplicates: np.ndarray | None = None, saturation: int = 0) -> MarkovModel:
    """D_max = X - 1, X the smallest distance >= 2 with fewer than s_min
    samples (saturated distances do not count as short); probabilities are
    transition frequencies."""
    def short(i):
        if accepted[i] >= s_min:
            return False
        return not (saturation > 0 and duplicates is not None and duplicates[i] >= saturation)

    X = 2
    while X < len(accepted) and not short(X):
        X += 1
    d_max = max(1, X - 1)
    prob = np.zeros((d_max + 1, 3, 3))
    support = np.zeros((d_max + 1, 3), dtype=np.int64)
    for i in range(1, d_max + 1):
        for x in range(3):
            c = trans[i, x].astype(float)
            if i == d_max:
                c[2] = 0.0
            s = c.sum()
            # a pure self-loop (no closer/farther observation left) is no
            # better than no data
            if c[0] + c[2] > 0:
                prob[i, x] = c / s
                support[i, x] = int(trans[i, x].sum())
    _fill(prob, support, d_max)
    return MarkovModel(d_max, prob, support)


def estimate_model(inst: Instance, opt: OptimalSet, cfg: EstimationConfig = EstimationConfig(),
                   rng=None, mean_dlopt: float | None = None,
                   return_details: bool = False):
    """Sample TS_N1 trajectories until every distance in [2, rint(mean_dlopt)]
    has s_min distinct accepted samples, then build the model."""
    rng = as_rng(rng)
    if cfg.tabu.operator != "N1":
        raise ValueError("estimation uses the N1 search")
    if mean_dlopt is None:
        from .landscape import mean_dlopt_opt

        mean_dlopt = mean_dlopt_opt(inst, opt, 5000, rng).mean
    acc, dups, trans, total, trials, ok = _estimate(
        inst.n, inst.m, inst.mach, inst.opof, inst.dur, opt.c_star, cfg.tabu.params(),
        cfg.tabu.iteration_cap, zobrist_keys(inst.num_pairs), opt.members, cfg.s_min,
        cfg.s_max, cfg.saturation, cfg.sample_interval, rint(mean_dlopt), cfg.iteration_budget,
        kernel_seed(rng))
    if not ok:
        raise CoverageError(f"no coverage of [2, {rint(mean_dlopt)}] within "
                            f"{cfg.iteration_budget} iterations")
    model = build_model(acc, trans, cfg.s_min, dups, cfg.saturation)
    if return_details:
        return EstimationResult(model, acc, dups, trans, int(total), int(trials))
    return model


@njit(cache=True)
def _simulate(prob, starts, xs, seed, cap):
    np.random.seed(seed)
    T = starts.shape[0]
    out = np.zeros(T, dtype=np.int64)
    for t in range(T):
        i = starts[t]
        x = xs[t]
        steps = 0
        while i > 0 and steps < cap:
            u = np.random.random()
            p = prob[i, x]
            if u < p[0]:
                i -= 1
                x = 0
            elif u < p[0] + p[1]:
                x = 1
            else:
                i += 1
                x = 2
            steps += 1
        out[t] = steps
    return out


@njit(cache=True)
def _visits(prob, starts, xs, seed, cap, d_max):
    np.random.seed(seed)
    occ = np.zeros(d_max + 1, dtype=np.int64)
    for t in range(starts.shape[0]):
        i = starts[t]
        x = xs[t]
        steps = 0
        while i > 0 and steps < cap:
            occ[i] += 1
            u = np.random.random()
            p = prob[i, x]
            if u < p[0]:
                i -= 1
                x = 0
            elif u < p[0] + p[1]:
                x = 1
            else:
                i += 1
                x = 2
            steps += 1
    return occ


def _starts(starts, rng, d_max):
    starts = np.minimum(np.asarray(starts, dtype=np.int64), d_max)
    xs = np.where(rng.random(len(starts)) < 0.5, 0, 2).astype(np.int64)
    return starts, xs


def simulate_run(model: MarkovModel, start_i: int, start_x: Gradient = Gradient.CLOSER,
                 rng=None) -> int:
    """Steps until the absorbing state (0, closer)."""
    if not 0 <= start_i <= model.d_max:
        raise ValueError(f"start_i must lie in [0, {model.d_max}]")
    rng = as_rng(rng)
    out = _simulate(model.prob, np.array([start_i], dtype=np.int64),
                    np.array([Gradient(start_x).col], dtype=np.int64), kernel_seed(rng), STEP_CAP)
    return int(out[0])


def simulate_many(model: MarkovModel, starts, rng=None) -> np.ndarray:
    """One simulation per start distance, start gradient closer/farther 50/50."""
    rng = as_rng(rng)
    s, xs = _starts(starts, rng, model.d_max)
    return _simulate(model.prob, s, xs, kernel_seed(rng), STEP_CAP)


@dataclass
class Prediction:
    c_bar_pred: float
    rld_pred: np.ndarray


def predicted_cost(model: MarkovModel, inst: Instance, opt: OptimalSet, trials: int = 10_000,
                   rng=None) -> Prediction:
    """Simulate from d_opt of fresh random local optima (clamped to d_max)."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rng = as_rng(rng)
    d = _nearest_many(random_local_optima_bits(inst, trials, rng), opt.members)
    rld = simulate_many(model, d, rng)
    return Prediction(float(rld.mean()), rld)


def predicted_v(model: MarkovModel, i: int, trials: int = 10_000, rng=None) -> float:
    """Mean absorption time from distance i."""
    if not 0 <= i <= model.d_max:
        raise ValueError(f"i must lie in [0, {model.d_max}]")
    return float(simulate_many(model, np.full(trials, i), rng).mean())


def dynamic_mean_distance(model: MarkovModel, starts, rng=None) -> float:
    """Mean distance over the pre-absorption states visited by simulated
    walks: the model's counterpart of the mean visited distance of tabu search."""
    rng = as_rng(rng)
    s, xs = _starts(starts, rng, model.d_max)
    occ = _visits(model.prob, s, xs, kernel_seed(rng), STEP_CAP, model.d_max)
    if occ.sum() == 0:
        return 0.0
    return float((np.arange(occ.size) * occ).sum() / occ.sum())
