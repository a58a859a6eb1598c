"""Optimal makespan and the complete set of optimal orientations.

Depth-first branch-and-bound that fixes one machine job-pair precedence
per level (pairs in descending order of their duration sum).  The bound at
a node is the longest path through job arcs and fixed machine arcs,
strengthened by a one-machine bound (min head + machine load + min tail).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from numba import njit

from . import _core
from .instance import Instance
from .schedule import Orientation, ShapeMismatch, num_words


class BudgetExceeded(RuntimeError):
    pass


@dataclass
class OptimalSet:
    c_star: int
    members: np.ndarray  # (count, words) uint64, deduplicated
    n: int
    m: int

    def __len__(self) -> int:
        return self.members.shape[0]

    def __contains__(self, s: Orientation) -> bool:
        return bool(np.any(np.all(self.members == s.bits, axis=1)))

    def orientations(self) -> list[Orientation]:
        return [Orientation.from_bits(b, self.n, self.m) for b in self.members]

    def to_json(self, digest: str | None = None) -> str:
        d = {"instance": digest, "n": self.n, "m": self.m, "c_star": self.c_star,
             "members": ["".join(f"{int(w):016x}" for w in row) for row in self.members]}
        return json.dumps(d) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "OptimalSet":
        d = json.loads(text)
        words = num_words(d["n"], d["m"])
        members = np.array([[int(h[16 * i:16 * i + 16], 16) for i in range(words)]
                            for h in d["members"]], dtype=np.uint64).reshape(-1, words)
        return cls(int(d["c_star"]), members, int(d["n"]), int(d["m"]))

    def save(self, path, digest: str | None = None) -> None:
        Path(path).write_text(self.to_json(digest))

    @classmethod
    def load(cls, path) -> "OptimalSet":
        return cls.from_json(Path(path).read_text())


def _pairs(inst: Instance):
    n, m = inst.n, inst.m
    rows = []
    for k in range(m):
        for a in range(n - 1):
            for b in range(a + 1, n):
                u, v = inst.opof[a, k], inst.opof[b, k]
                idx = a * (2 * n - a - 1) // 2 + (b - a - 1) + k * (n * (n - 1) // 2)
                rows.append((-(inst.dur[u] + inst.dur[v]), idx, u, v))
    rows.sort()
    pu = np.array([r[2] for r in rows], dtype=np.int64)
    pv = np.array([r[3] for r in rows], dtype=np.int64)
    pidx = np.array([r[1] for r in rows], dtype=np.int64)
    return pu, pv, pidx


@njit(cache=True)
def _bound(N, m, mach, dur, load, pu, pv, state, depth, heads, tails, topo, indeg,
           start, adj):
    """Longest-path + one-machine bound over fixed arcs; -1 if cyclic."""
    # CSR of fixed machine arcs
    for i in range(N + 1):
        start[i] = 0
    for q in range(depth):
        if state[q] == 1:
            start[pu[q] + 1] += 1
        else:
            start[pv[q] + 1] += 1
    for i in range(N):
        start[i + 1] += start[i]
    fill = start[:N].copy()
    for q in range(depth):
        if state[q] == 1:
            a, b = pu[q], pv[q]
        else:
            a, b = pv[q], pu[q]
        adj[fill[a]] = b
        fill[a] += 1
    for i in range(N):
        indeg[i] = 1 if i % m != 0 else 0
    for i in range(start[N]):
        indeg[adj[i]] += 1
    qt = 0
    for i in range(N):
        heads[i] = 0
        if indeg[i] == 0:
            topo[qt] = i
            qt += 1
    qh = 0
    while qh < qt:
        u = topo[qh]
        qh += 1
        f = heads[u] + dur[u]
        if (u + 1) % m != 0:
            if f > heads[u + 1]:
                heads[u + 1] = f
            indeg[u + 1] -= 1
            if indeg[u + 1] == 0:
                topo[qt] = u + 1
                qt += 1
        for e in range(start[u], start[u + 1]):
            v = adj[e]
            if f > heads[v]:
                heads[v] = f
            indeg[v] -= 1
            if indeg[v] == 0:
                topo[qt] = v
                qt += 1
    if qt < N:
        return -1
    lb = 0
    for idx in range(N - 1, -1, -1):
        u = topo[idx]
        t = 0
        if (u + 1) % m != 0:
            t = dur[u + 1] + tails[u + 1]
        for e in range(start[u], start[u + 1]):
            v = adj[e]
            x = dur[v] + tails[v]
            if x > t:
                t = x
        tails[u] = t
        if heads[u] + dur[u] + t > lb:
            lb = heads[u] + dur[u] + t
    M = load.shape[0]
    for k in range(M):
        hmin = 1 << 60
        tmin = 1 << 60
        for u in range(N):
            if mach[u] == k:
                if heads[u] < hmin:
                    hmin = heads[u]
                if tails[u] < tmin:
                    tmin = tails[u]
        x = hmin + load[k] + tmin
        if x > lb:
            lb = x
    return lb


@njit(cache=True)
def _bnb(N, m, mach, dur, pu, pv, pidx, ub, collect, budget, nwords):
    """Returns (best, nodes, solutions, count).  With ``collect`` every leaf
    with makespan == best is kept and only bound > best is pruned; without
    it the search stops improving once bound >= incumbent."""
    P = pu.shape[0]
    load = np.zeros(m, dtype=np.int64)
    for u in range(N):
        load[mach[u]] += dur[u]
    state = np.full(max(P, 1), -1, dtype=np.int64)
    tried = np.zeros(max(P, 1), dtype=np.int64)
    first = np.zeros(max(P, 1), dtype=np.int64)
    heads = np.zeros(N, dtype=np.int64)
    tails = np.zeros(N, dtype=np.int64)
    topo = np.zeros(N, dtype=np.int64)
    indeg = np.zeros(N, dtype=np.int64)
    start = np.zeros(N + 1, dtype=np.int64)
    adj = np.zeros(max(P, 1), dtype=np.int64)
    sols = np.zeros((16, nwords), dtype=np.uint64)
    count = 0
    best = ub
    nodes = 0
    d = 0
    while True:
        nodes += 1
        if nodes > budget:
            return best, -1, sols, count
        lb = _bound(N, m, mach, dur, load, pu, pv, state, d, heads, tails, topo, indeg,
                    start, adj)
        expand = lb >= 0 and (lb <= best if collect else lb < best)
        if expand and d == P:
            if lb < best:
                best = lb
                count = 0
            if collect:
                if count == sols.shape[0]:
                    grown = np.zeros((2 * count, nwords), dtype=np.uint64)
                    grown[:count] = sols
                    sols = grown
                row = sols[count]
                row[:] = 0
                for q in range(P):
                    # bit set iff the lower-indexed job precedes
                    if state[q] == 1:
                        idx = pidx[q]
                        row[idx >> 6] |= np.uint64(1) << np.uint64(idx & 63)
                count += 1
            else:
                count = 1
            expand = False
        if expand:
            first[d] = 1 if heads[pu[d]] <= heads[pv[d]] else 0
            state[d] = first[d]
            tried[d] = 1
            d += 1
            continue
        found = False
        while d > 0:
            d -= 1
            if tried[d] == 1:
                tried[d] = 2
                state[d] = 1 - first[d]
                d += 1
                found = True
                break
            tried[d] = 0
            state[d] = -1
        if not found:
            break
    return best, nodes, sols[:count], count


def _upper_bound(inst: Instance, iterations: int = 3000, seed: int = 1) -> int:
    from .tabu import SMALL, run_trials

    cfg = SMALL.__class__(SMALL.l_min, SMALL.l_max, SMALL.resample_period, iterations)
    _, bests = run_trials(inst, 0, 2, cfg, seed)
    return int(bests.min())


DEFAULT_BUDGET = 200_000_000


def _solve(inst: Instance, ub: int, collect: bool, budget: int):
    pu, pv, pidx = _pairs(inst)
    best, nodes, sols, count = _bnb(inst.num_ops, inst.m, inst.mach, inst.dur, pu, pv, pidx,
                                    int(ub), collect, int(budget),
                                    num_words(inst.n, inst.m))
    if nodes < 0:
        raise BudgetExceeded(f"node budget {budget} exhausted")
    return int(best), sols, int(count)


def optimal_makespan(inst: Instance, budget: int = DEFAULT_BUDGET) -> int:
    ub = _upper_bound(inst)
    # search strictly below ub; if nothing better exists ub is optimal
    best, _, count = _solve(inst, ub, False, budget)
    return best


def enumerate_optima(inst: Instance, c_star: int | None = None,
                     budget: int = DEFAULT_BUDGET) -> OptimalSet:
    if c_star is None:
        c_star = optimal_makespan(inst, budget)
    best, sols, count = _solve(inst, c_star, True, budget)
    if count == 0 or best != c_star:
        raise ValueError(f"c_star={c_star} is not the optimal makespan (found {best})")
    members = np.unique(sols, axis=0)
    return OptimalSet(int(c_star), members, inst.n, inst.m)


def solve(inst: Instance, budget: int = DEFAULT_BUDGET) -> OptimalSet:
    return enumerate_optima(inst, None, budget)


def d_opt(s: Orientation, opt: OptimalSet) -> int:
    if len(opt) == 0:
        raise ValueError("empty optimal set")
    if (s.n, s.m) != (opt.n, opt.m):
        raise ShapeMismatch(f"{s.n}x{s.m} vs {opt.n}x{opt.m}")
    return int(_core.nearest_distance(s.bits, opt.members))
