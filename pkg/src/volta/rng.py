"""Seed derivation and the counter-based stream used inside walk kernels.

Graph and conductance sampling use numpy's ``PCG64`` bit generator. Walk
kernels run under numba, where numpy generators cannot be split per walk, so
each walk gets its own SplitMix64 stream keyed by ``(seed, vertex, walk)``.
That keeps results independent of how walks are sharded.
"""

from __future__ import annotations

import numpy as np
from numba import njit

GRAPH_RNG = "numpy.PCG64"
WALK_RNG = "splitmix64"

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S11 = np.uint64(11)
_INV53 = 1.0 / 9007199254740992.0


def derive_seed(master: int, *keys: int) -> int:
    """Deterministic 64-bit child seed for ``master`` and integer ``keys``."""
    ss = np.random.SeedSequence([int(master) & 0xFFFFFFFFFFFFFFFF, *[int(k) for k in keys]])
    return int(ss.generate_state(1, np.uint64)[0])


def generator(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(int(seed) & 0xFFFFFFFFFFFFFFFF))


@njit(cache=True, nogil=True)
def mix64(z):
    z = (z ^ (z >> _S30)) * _M1
    z = (z ^ (z >> _S27)) * _M2
    return z ^ (z >> _S31)


@njit(cache=True, nogil=True)
def stream_state(seed, a, b):
    """Initial SplitMix64 state for substream ``(a, b)`` of ``seed``."""
    s = mix64(np.uint64(seed) + _GOLDEN)
    s = mix64(s ^ (np.uint64(a) + _GOLDEN))
    return mix64(s ^ (np.uint64(b) * _GOLDEN + _M1))


@njit(cache=True, nogil=True)
def next_uniform(state):
    """Advance ``state``; return ``(new_state, u)`` with u uniform on [0, 1)."""
    state = state + _GOLDEN
    u = (mix64(state) >> _S11) * _INV53
    return state, u
