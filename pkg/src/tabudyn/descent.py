"""Steepest descent, random walks, random local optima and descent distance."""

from __future__ import annotations

import numpy as np
from numba import njit

from . import _core
from .instance import Instance
from .rng import as_rng, kernel_seed
from .schedule import Orientation, distance, num_words


def _run_descent(inst: Instance, order: np.ndarray) -> int:
    ws = _core.workspace(inst.n, inst.m)
    _core.set_links(order, inst.opof, ws)
    if _core.longest_paths(inst.dur, inst.m, ws) < 0:
        raise ValueError("orientation is infeasible")
    steps, _ = _core.steepest_descent(order, inst.opof, inst.dur, inst.m, ws)
    return steps


def steepest_descent(inst: Instance, s0: Orientation, rng=None) -> Orientation:
    """Move to a best strictly improving N1 neighbor (ties uniform) until
    none exists."""
    order = s0.order.copy()
    _core.seed(kernel_seed(as_rng(rng)))
    _run_descent(inst, order)
    return Orientation(order)


def random_local_optimum(inst: Instance, rng=None) -> Orientation:
    order = np.empty((inst.m, inst.n), dtype=np.int64)
    ws = _core.workspace(inst.n, inst.m)
    _core.seed(kernel_seed(as_rng(rng)))
    _core.random_local_optimum(inst.n, inst.m, inst.mach, inst.opof, inst.dur, order, ws)
    return Orientation(order)


def random_walk(inst: Instance, s0: Orientation, steps: int, rng=None) -> tuple[Orientation, int]:
    """Uniform N1 walk of up to ``steps`` moves; returns (result, steps taken).
    Stops early if a solution without N1 moves is reached."""
    order = s0.order.copy()
    ws = _core.workspace(inst.n, inst.m)
    _core.set_links(order, inst.opof, ws)
    flips = np.zeros((max(steps, 1), 3), dtype=np.int64)
    _core.seed(kernel_seed(as_rng(rng)))
    done = _core.random_walk(order, inst.opof, inst.dur, inst.m, ws, steps, flips)
    return Orientation(order), int(done)


def descent_distance(inst: Instance, s: Orientation, rng=None) -> int:
    return distance(s, steepest_descent(inst, s, rng))


def random_local_optima_bits(inst: Instance, count: int, rng=None) -> np.ndarray:
    """Packed bitvectors of ``count`` random local optima, shape (count, words)."""
    rng = as_rng(rng)
    return _lopt_bits(inst.n, inst.m, inst.mach, inst.opof, inst.dur, count,
                      num_words(inst.n, inst.m), kernel_seed(rng))


@njit(cache=True)
def _lopt_bits(n, m, mach, opof, dur, count, nwords, seed):
    _core.seed(seed)
    out = np.zeros((count, nwords), dtype=np.uint64)
    order = np.empty((m, n), dtype=np.int64)
    ws = _core.workspace(n, m)
    for t in range(count):
        _core.random_local_optimum(n, m, mach, opof, dur, order, ws)
        out[t] = _core.pack_bits(order, nwords)
    return out
