"""Job-shop instances: generation, OR-Library parsing and serialization.

Ids are 0-based throughout (jobs, machines, routing positions).  An
operation is addressed as ``op = job * m + position``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property
from importlib import resources

import numpy as np

from .rng import derive_seed


class InstanceError(ValueError):
    """Invalid instance shape or contents."""


class ParseError(InstanceError):
    def __init__(self, msg: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {msg}" if line is not None else msg)


@dataclass(frozen=True)
class Instance:
    """An n x m job shop.  ``routing[j][p]`` is the machine of job j's p-th
    operation, ``duration[j][p]`` its processing time."""

    n: int
    m: int
    routing: tuple[tuple[int, ...], ...]
    duration: tuple[tuple[int, ...], ...]
    wf: int | None = field(default=None, compare=False)
    seed: int | None = field(default=None, compare=False)
    name: str | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.n < 1 or self.m < 1:
            raise InstanceError(f"need n, m >= 1, got {self.n}x{self.m}")
        if len(self.routing) != self.n or len(self.duration) != self.n:
            raise InstanceError("routing/duration must have n rows")
        for j, (r, d) in enumerate(zip(self.routing, self.duration)):
            if len(r) != self.m or len(d) != self.m:
                raise InstanceError(f"job {j}: expected {self.m} operations")
            if sorted(r) != list(range(self.m)):
                raise InstanceError(f"job {j}: routing {r} is not a machine permutation")
            if min(d) < 0:
                raise InstanceError(f"job {j}: negative duration")
        if self.wf is not None:
            _check_workflow(self.routing, self.m, self.wf)

    @property
    def num_ops(self) -> int:
        return self.n * self.m

    @property
    def num_pairs(self) -> int:
        """Length of the precedence bitvector, m * n(n-1)/2."""
        return self.m * self.n * (self.n - 1) // 2

    # Flat arrays consumed by the numba kernels.
    @cached_property
    def mach(self) -> np.ndarray:
        a = np.array(self.routing, dtype=np.int64).reshape(-1)
        a.flags.writeable = False
        return a

    @cached_property
    def dur(self) -> np.ndarray:
        a = np.array(self.duration, dtype=np.int64).reshape(-1)
        a.flags.writeable = False
        return a

    @cached_property
    def opof(self) -> np.ndarray:
        """opof[j, k]: the operation of job j that runs on machine k."""
        a = np.empty((self.n, self.m), dtype=np.int64)
        for j, r in enumerate(self.routing):
            for p, k in enumerate(r):
                a[j, k] = j * self.m + p
        a.flags.writeable = False
        return a

    def to_dict(self) -> dict:
        d = {
            "n": self.n,
            "m": self.m,
            "routing": [list(r) for r in self.routing],
            "duration": [list(r) for r in self.duration],
        }
        if self.wf is not None:
            d["wf"] = self.wf
        if self.seed is not None:
            d["seed"] = self.seed
        return d

    @classmethod
    def from_dict(cls, d: dict, name: str | None = None) -> "Instance":
        try:
            return cls(
                n=int(d["n"]),
                m=int(d["m"]),
                routing=tuple(tuple(int(x) for x in r) for r in d["routing"]),
                duration=tuple(tuple(int(x) for x in r) for r in d["duration"]),
                wf=d.get("wf"),
                seed=d.get("seed"),
                name=name,
            )
        except (KeyError, TypeError) as e:
            raise ParseError(f"bad native-json instance: {e}") from e

    def digest(self) -> str:
        """Stable content hash (routing + durations only)."""
        import hashlib

        body = json.dumps([self.n, self.m, self.routing, self.duration])
        return hashlib.sha256(body.encode()).hexdigest()[:16]


def _check_workflow(routing, m: int, wf: int) -> None:
    if wf < 1 or m % wf:
        raise InstanceError(f"m={m} is not divisible by wf={wf}")
    b = m // wf
    for j, r in enumerate(routing):
        for p, k in enumerate(r):
            if k // b != p // b:
                raise InstanceError(f"job {j} violates workflow partition at position {p}")


def generate(n: int, m: int, wf: int = 1, duration_range: tuple[int, int] = (1, 99),
             seed: int = 0) -> Instance:
    """Random (wf=1), workflow (wf=2) or flowshop (wf=m) instance.

    Routings are concatenations of uniform random permutations of each of
    the ``wf`` contiguous machine blocks; durations are i.i.d. uniform
    integers on ``duration_range`` (inclusive).  The generator is numpy's
    PCG64 seeded with ``seed``.
    """
    lb, ub = duration_range
    if n < 1 or m < 1:
        raise InstanceError(f"need n, m >= 1, got {n}x{m}")
    if not 1 <= wf <= m or m % wf:
        raise InstanceError(f"m={m} is not divisible by wf={wf}")
    if lb > ub:
        raise InstanceError(f"empty duration range [{lb}, {ub}]")
    rng = np.random.default_rng(seed)
    b = m // wf
    routing = []
    for _ in range(n):
        r = []
        for blk in range(wf):
            r.extend(int(x) for x in blk * b + rng.permutation(b))
        routing.append(tuple(r))
    dur = rng.integers(lb, ub + 1, size=(n, m))
    return Instance(n, m, tuple(routing), tuple(tuple(int(x) for x in row) for row in dur),
                    wf=wf, seed=seed)


def generate_set(n: int, m: int, wf: int, count: int, seed: int,
                 duration_range: tuple[int, int] = (1, 99)) -> list[Instance]:
    """``count`` instances; instance i uses ``derive_seed(seed, i)``."""
    out = []
    for i in range(count):
        inst = generate(n, m, wf, duration_range, derive_seed(seed, i))
        out.append(Instance(inst.n, inst.m, inst.routing, inst.duration, wf=inst.wf,
                            seed=inst.seed, name=f"{n}x{m}_wf{wf}_{i:04d}"))
    return out


def parse_orlib(text: str, name: str | None = None) -> Instance:
    """Parse the OR-Library job-shop format ("n m" then n lines of
    machine/duration pairs).  Blank lines and ``#`` comments are skipped."""
    lines = [(i + 1, ln.split()) for i, ln in enumerate(text.splitlines())]
    lines = [(no, toks) for no, toks in lines if toks and not toks[0].startswith("#")]
    if not lines:
        raise ParseError("empty input")
    hno, header = lines[0]
    if len(header) != 2:
        raise ParseError("header must be 'n m'", hno)
    try:
        n, m = int(header[0]), int(header[1])
    except ValueError:
        raise ParseError("header must be two integers", hno) from None
    if n < 1 or m < 1:
        raise ParseError("n and m must be positive", hno)
    body = lines[1:]
    if len(body) != n:
        raise ParseError(f"expected {n} job lines, found {len(body)}",
                         body[n][0] if len(body) > n else (body[-1][0] if body else hno))
    routing, duration = [], []
    for j, (no, toks) in enumerate(body):
        if len(toks) != 2 * m:
            raise ParseError(f"expected {2 * m} integers, found {len(toks)}", no)
        try:
            vals = [int(t) for t in toks]
        except ValueError:
            raise ParseError("non-integer token", no) from None
        r, d = tuple(vals[0::2]), tuple(vals[1::2])
        if sorted(r) != list(range(m)):
            raise InstanceError(f"line {no}: routing {r} is not a machine permutation")
        if min(d) < 0:
            raise InstanceError(f"line {no}: negative duration")
        routing.append(r)
        duration.append(d)
    return Instance(n, m, tuple(routing), tuple(duration), name=name)


def serialize(inst: Instance, format: str = "orlib") -> str:
    if format == "orlib":
        out = [f"{inst.n} {inst.m}"]
        for r, d in zip(inst.routing, inst.duration):
            out.append(" ".join(f"{k} {t}" for k, t in zip(r, d)))
        return "\n".join(out) + "\n"
    if format == "native-json":
        return json.dumps(inst.to_dict(), sort_keys=True) + "\n"
    raise ValueError(f"unknown format {format!r}")


def parse(text: str, format: str = "orlib", name: str | None = None) -> Instance:
    if format == "orlib":
        return parse_orlib(text, name)
    if format == "native-json":
        try:
            d = json.loads(text)
        except json.JSONDecodeError as e:
            raise ParseError(str(e), e.lineno) from e
        return Instance.from_dict(d, name)
    raise ValueError(f"unknown format {format!r}")


def load(path) -> Instance:
    """Read an instance file; ``.json`` is native-json, anything else OR-Library."""
    from pathlib import Path

    p = Path(path)
    fmt = "native-json" if p.suffix == ".json" else "orlib"
    return parse(p.read_text(), fmt, name=p.stem)


def benchmark(name: str) -> Instance:
    """Bundled OR-Library instance (la16-la20, abz5, abz6, ft06)."""
    text = resources.files("tabudyn.data").joinpath(f"{name}.txt").read_text()
    return parse_orlib(text, name=name)


# Known optimal makespans of the bundled benchmarks.
BENCHMARK_OPTIMA = {"ft06": 55, "la16": 945, "la17": 784, "la18": 848, "la19": 842,
                    "la20": 902, "abz5": 1234, "abz6": 943}
