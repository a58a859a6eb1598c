"""Orientations, semi-active schedule evaluation and disjunctive graph distance."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import _core
from .instance import Instance
from .rng import as_rng, kernel_seed


class ShapeMismatch(ValueError):
    pass


def num_words(n: int, m: int) -> int:
    return max(1, (m * n * (n - 1) // 2 + 63) // 64)


class Orientation:
    """One job permutation per machine.  ``order[k]`` lists the jobs in
    processing order on machine k.  Orientations may be cyclic; use
    :func:`evaluate` to test feasibility."""

    __slots__ = ("order", "__dict__")

    def __init__(self, order):
        a = np.array(order, dtype=np.int64)
        if a.ndim != 2:
            raise ValueError("order must be an m x n array")
        m, n = a.shape
        for k in range(m):
            if sorted(a[k].tolist()) != list(range(n)):
                raise ValueError(f"machine {k}: {a[k].tolist()} is not a job permutation")
        a.flags.writeable = False
        self.order = a

    @property
    def m(self) -> int:
        return self.order.shape[0]

    @property
    def n(self) -> int:
        return self.order.shape[1]

    @cached_property
    def bits(self) -> np.ndarray:
        """Packed precedence bitvector; bit (k, a<b) set iff a precedes b on k."""
        b = _core.pack_bits(self.order, num_words(self.n, self.m))
        b.flags.writeable = False
        return b

    def bit_list(self) -> list[int]:
        P = self.m * self.n * (self.n - 1) // 2
        return [int(self.bits[i >> 6] >> np.uint64(i & 63)) & 1 for i in range(P)]

    @classmethod
    def from_bits(cls, bits: np.ndarray, n: int, m: int) -> "Orientation":
        order = _core.unpack_bits(np.asarray(bits, dtype=np.uint64), n, m)
        if order[0, 0] < 0:
            raise ValueError("bitvector does not encode machine permutations")
        return cls(order)

    def to_list(self) -> list[list[int]]:
        return self.order.tolist()

    def __eq__(self, other):
        return isinstance(other, Orientation) and np.array_equal(self.order, other.order)

    def __hash__(self):
        return hash(self.order.tobytes())

    def __repr__(self):
        return f"Orientation({self.order.tolist()})"


@dataclass(frozen=True)
class ScheduleInfo:
    start: np.ndarray      # per op (op = job * m + position)
    head: np.ndarray       # equals start for semi-active schedules
    tail: np.ndarray       # longest path after completion
    cmax: int
    critical: np.ndarray   # bool per op

    def start_of(self, inst: Instance, job: int, machine: int) -> int:
        return int(self.start[inst.opof[job, machine]])


def _check_shape(inst: Instance, s: Orientation) -> None:
    if s.order.shape != (inst.m, inst.n):
        raise ShapeMismatch(f"orientation is {s.m}x{s.n}, instance needs {inst.m}x{inst.n}")


def evaluate(inst: Instance, s: Orientation) -> ScheduleInfo | None:
    """Semi-active schedule of ``s``; None when the orientation is cyclic."""
    _check_shape(inst, s)
    ws = _core.workspace(inst.n, inst.m)
    _core.set_links(s.order, inst.opof, ws)
    cmax = _core.longest_paths(inst.dur, inst.m, ws)
    if cmax < 0:
        return None
    head = ws[0].copy()
    tail = ws[1].copy()
    crit = head + inst.dur + tail == cmax
    return ScheduleInfo(start=head, head=head, tail=tail, cmax=int(cmax), critical=crit)


def makespan(inst: Instance, s: Orientation) -> int | None:
    info = evaluate(inst, s)
    return None if info is None else info.cmax


def is_feasible(inst: Instance, s: Orientation) -> bool:
    return evaluate(inst, s) is not None


def distance(s1: Orientation, s2: Orientation) -> int:
    """Disjunctive graph distance: number of machine job-pairs ordered differently."""
    if s1.order.shape != s2.order.shape:
        raise ShapeMismatch(f"{s1.order.shape} vs {s2.order.shape}")
    return int(_core.hamming(s1.bits, s2.bits))


def random_semi_active(inst: Instance, rng) -> Orientation:
    """Feasible orientation built by dispatching a uniformly random
    schedulable operation at every step."""
    rng = as_rng(rng)
    order = np.empty((inst.m, inst.n), dtype=np.int64)
    _core.seed(kernel_seed(rng))
    _core.random_semi_active(inst.n, inst.m, inst.mach, order)
    return Orientation(order)
