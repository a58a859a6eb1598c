"""Seed derivation.

Every stochastic routine takes a ``numpy.random.Generator``.  Numba kernels
draw from numba's internal Mersenne Twister, re-seeded per call from a
32-bit value pulled off the caller's Generator, so results depend only on
the Generator's state.
"""

import numpy as np


def derive_seed(master: int, *keys: int) -> int:
    """Stable 63-bit seed for sub-stream ``keys`` of ``master``."""
    ss = np.random.SeedSequence(entropy=int(master), spawn_key=tuple(int(k) for k in keys))
    lo, hi = ss.generate_state(2, np.uint32)
    return int(lo) | (int(hi) & 0x7FFFFFFF) << 32


def as_rng(rng) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)


def kernel_seed(rng: np.random.Generator) -> int:
    return int(rng.integers(0, 2**32 - 1))
