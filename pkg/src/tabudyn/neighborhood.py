"""N1 and N5 move operators."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _core
from .instance import Instance
from .rng import as_rng, kernel_seed
from .schedule import Orientation, ScheduleInfo, evaluate


class StaleMove(ValueError):
    pass


@dataclass(frozen=True)
class Move:
    """Swap of jobs ``first`` and ``second``, adjacent in that order on ``machine``."""

    machine: int
    first: int
    second: int

    def inverse(self) -> "Move":
        return Move(self.machine, self.second, self.first)

    def ops(self, inst: Instance) -> tuple[int, int]:
        return int(inst.opof[self.first, self.machine]), int(inst.opof[self.second, self.machine])


def _prepare(inst: Instance, s: Orientation, info: ScheduleInfo | None):
    if info is None:
        info = evaluate(inst, s)
        if info is None:
            raise ValueError("orientation is infeasible")
    ws = _core.workspace(inst.n, inst.m)
    order = s.order.copy()
    _core.set_links(order, inst.opof, ws)
    _core.longest_paths(inst.dur, inst.m, ws)
    return order, ws, info.cmax


def _collect(order, ws, count) -> list[Move]:
    mvk, mvp = ws[8], ws[9]
    out = []
    for i in range(count):
        k, p = int(mvk[i]), int(mvp[i])
        out.append(Move(k, int(order[k, p]), int(order[k, p + 1])))
    return out


def n1_moves(inst: Instance, s: Orientation, info: ScheduleInfo | None = None) -> list[Move]:
    """All swaps of adjacent critical operations joined by a tight machine arc,
    across every critical path."""
    order, ws, cmax = _prepare(inst, s, info)
    return _collect(order, ws, _core.n1_moves(order, inst.opof, inst.dur, ws, cmax))


def n5_moves(inst: Instance, s: Orientation, info: ScheduleInfo | None = None,
             rng=None) -> list[Move]:
    """Block-end swaps on one critical path, chosen uniformly at random when
    several exist.  An empty list flags a potential trap."""
    order, ws, cmax = _prepare(inst, s, info)
    _core.seed(kernel_seed(as_rng(rng)))
    c = _core.n5_moves(order, inst.opof, inst.mach, inst.dur, inst.m, ws, cmax)
    return _collect(order, ws, c)


def apply_move(s: Orientation, mv: Move) -> Orientation:
    row = s.order[mv.machine]
    idx = np.flatnonzero(row == mv.first)
    if len(idx) == 0 or idx[0] + 1 >= len(row) or row[idx[0] + 1] != mv.second:
        raise StaleMove(f"{mv} does not match machine order {row.tolist()}")
    order = s.order.copy()
    p = int(idx[0])
    order[mv.machine, p], order[mv.machine, p + 1] = mv.second, mv.first
    return Orientation(order)
