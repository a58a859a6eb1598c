"""Taillard-style tabu search (TS_N1) and its N5 variant with trap escape."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _core
from .instance import Instance
from .rng import as_rng, derive_seed, kernel_seed
from .schedule import Orientation
from .stats import rint, summarize_costs


@dataclass(frozen=True)
class TabuConfig:
    l_min: int = 6
    l_max: int = 14
    resample_period: int = 15
    iteration_cap: int = 1_000_000
    operator: str = "N1"
    trap_walk_length: int = 3

    def __post_init__(self):
        if not 1 <= self.l_min <= self.l_max:
            raise ValueError(f"bad tenure interval [{self.l_min}, {self.l_max}]")
        if self.resample_period < 1 or self.iteration_cap < 1:
            raise ValueError("resample_period and iteration_cap must be >= 1")
        if self.operator not in ("N1", "N5"):
            raise ValueError(f"unknown operator {self.operator!r}")

    @classmethod
    def from_formula(cls, n: int, m: int, **kw) -> "TabuConfig":
        """Taillard's rule, re-sampled every rint(1.2 * l_max) iterations."""
        lo, hi = tenure_interval(n, m)
        kw.setdefault("resample_period", max(1, rint(1.2 * hi)))
        return cls(l_min=lo, l_max=hi, **kw)

    def with_interval(self, lo: int, hi: int) -> "TabuConfig":
        return TabuConfig(lo, hi, self.resample_period, self.iteration_cap, self.operator,
                          self.trap_walk_length)

    def params(self) -> np.ndarray:
        return np.array([self.l_min, self.l_max, self.resample_period,
                         int(self.operator == "N5"), self.trap_walk_length], dtype=np.int64)


# Fixed intervals used for the small and 10x10 instance sets.
SMALL = TabuConfig(6, 14, 15)
TEN_BY_TEN = TabuConfig(8, 14, 15)


def default_config(n: int, m: int) -> TabuConfig:
    """The fixed interval for the instance size: [8, 14] at 10x10 and up, else [6, 14]."""
    return TEN_BY_TEN if n * m >= 100 else SMALL


def tenure_x(n: int, m: int) -> float:
    N = n * m
    return (n + m / 2) * math.exp(-n / (5 * m)) + N / 2 * math.exp(-5 * m / n)


def tenure_interval(n: int, m: int) -> tuple[int, int]:
    """[rint(0.8X), rint(1.2X)] clamped to >= 1."""
    x = tenure_x(n, m)
    lo = max(1, rint(0.8 * x))
    return lo, max(lo, rint(1.2 * x))


@dataclass
class RunResult:
    iterations: int
    reached: bool
    best_makespan: int

    @property
    def iterations_to_target(self) -> int | None:
        return self.iterations if self.reached else None


@dataclass
class CostStats:
    c_q2: float
    c_bar: float
    samples: np.ndarray
    censored: int = 0
    valid: bool = field(init=False)

    def __post_init__(self):
        self.valid = self.censored == 0


_ZOBRIST: dict[int, np.ndarray] = {}


def zobrist_keys(num_pairs: int) -> np.ndarray:
    keys = _ZOBRIST.get(num_pairs)
    if keys is None:
        keys = np.random.default_rng(0x5EED).integers(0, 2**63, size=max(num_pairs, 1),
                                                       dtype=np.uint64)
        _ZOBRIST[num_pairs] = keys
    return keys


def ts_run(inst: Instance, start: Orientation, target_makespan: int,
           config: TabuConfig = SMALL, rng=None) -> RunResult:
    """Run from ``start`` until makespan <= target or the iteration cap."""
    order = start.order.copy()
    _core.seed(kernel_seed(as_rng(rng)))
    it, best = _core.ts_run(order, inst.opof, inst.mach, inst.dur, int(target_makespan),
                            config.params(), config.iteration_cap,
                            zobrist_keys(inst.num_pairs))
    return RunResult(int(it), bool(best <= target_makespan), int(best))


def trial_seeds(master_seed: int, trials: int, offset: int = 0) -> np.ndarray:
    return np.array([derive_seed(master_seed, t) & 0xFFFFFFFF
                     for t in range(offset, offset + trials)], dtype=np.int64)


def run_trials(inst: Instance, target_makespan: int, trials: int, config: TabuConfig,
               master_seed: int) -> tuple[np.ndarray, np.ndarray]:
    """Iteration counts and best makespans of independent trials, each from
    a fresh random local optimum."""
    return _core.ts_cost_trials(inst.n, inst.m, inst.mach, inst.opof, inst.dur,
                                int(target_makespan), config.params(), config.iteration_cap,
                                zobrist_keys(inst.num_pairs), trial_seeds(master_seed, trials))


def solve_cost_stats(inst: Instance, target_makespan: int, trials: int,
                     config: TabuConfig = SMALL, master_seed: int = 0) -> CostStats:
    """Median (c_Q2) and mean (c_bar) iterations to reach the target."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    iters, bests = run_trials(inst, target_makespan, trials, config, master_seed)
    censored = int(np.sum(bests > target_makespan))
    med, mean = summarize_costs(iters)
    return CostStats(med, mean, iters, censored)
