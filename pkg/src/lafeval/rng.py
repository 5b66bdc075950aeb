"""Deterministic 64-bit random streams for the synthetic laboratory.

The generator is splitmix64 (Steele, Lea & Flood's SplittableRandom
finalizer).  Output ``i`` (0-based) of the stream seeded with ``s`` is::

    mix64((s + (i + 1) * 0x9E3779B97F4A7C15) mod 2**64)

Because every output is a pure function of ``(seed, counter)``, blocks of
draws can be produced out of order or in parallel and still match a serial
run bit for bit.  Substreams follow one fixed rule: child ``k`` of seed
``s`` is output ``k`` of the stream seeded with ``s`` (see
:func:`substream`).
"""

from __future__ import annotations

import numpy as np

_MASK64 = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15
_M1 = 0xBF58476D1CE4E5B9
_M2 = 0x94D049BB133111EB


def mix64(z: int) -> int:
    """splitmix64 finalizer on a 64-bit integer."""
    z &= _MASK64
    z = ((z ^ (z >> 30)) * _M1) & _MASK64
    z = ((z ^ (z >> 27)) * _M2) & _MASK64
    return z ^ (z >> 31)


def substream(seed: int, tag: int) -> int:
    """Derive the seed of child stream ``tag`` from a parent seed.

    Defined as output ``tag`` of the parent stream, so the rule is exactly
    as reproducible as the generator itself.
    """
    if tag < 0:
        raise ValueError("substream tag must be non-negative")
    return mix64((seed + (tag + 1) * _GAMMA) & _MASK64)


def _mix64_array(z: np.ndarray) -> np.ndarray:
    z = (z ^ (z >> np.uint64(30))) * np.uint64(_M1)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(_M2)
    return z ^ (z >> np.uint64(31))


class SplitMix64:
    """Counter-based splitmix64 stream.

    Scalar draws and block draws interleave freely: both advance the same
    counter and produce the same outputs a pure-scalar run would.
    """

    def __init__(self, seed: int):
        self._seed = seed & _MASK64
        self._count = 0

    @property
    def seed(self) -> int:
        return self._seed

    def next_u64(self) -> int:
        out = mix64((self._seed + (self._count + 1) * _GAMMA) & _MASK64)
        self._count += 1
        return out

    def next_float(self) -> float:
        """Uniform in [0, 1) with 53 random bits."""
        return (self.next_u64() >> 11) * 2.0**-53

    def next_below(self, n: int) -> int:
        """Uniform integer in [0, n)."""
        if n <= 0:
            raise ValueError("n must be positive")
        return min(int(self.next_float() * n), n - 1)

    def u64_block(self, n: int) -> np.ndarray:
        """The next ``n`` raw outputs as a uint64 array."""
        counters = np.arange(self._count + 1, self._count + n + 1, dtype=np.uint64)
        self._count += n
        state = np.uint64(self._seed) + counters * np.uint64(_GAMMA)
        return _mix64_array(state)

    def float_block(self, n: int) -> np.ndarray:
        """The next ``n`` uniforms in [0, 1) as a float64 array."""
        return (self.u64_block(n) >> np.uint64(11)).astype(np.float64) * 2.0**-53
