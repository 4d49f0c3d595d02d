"""splitmix64 generator.

Every random draw in the package comes from here so that a seed pins down
positions, velocities and phantom noise bit for bit on any platform.
"""

from __future__ import annotations

import math

import numpy as np

GOLDEN_GAMMA = 0x9E3779B97F4A7C15
_MASK64 = (1 << 64) - 1
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB
_UNIT = 2.0 ** -53


def _mix(z: int) -> int:
    z = ((z ^ (z >> 30)) * _MIX1) & _MASK64
    z = ((z ^ (z >> 27)) * _MIX2) & _MASK64
    return z ^ (z >> 31)


class SplitMix64:
    """Seedable splitmix64 stream.

    >>> hex(SplitMix64(0).next_u64())
    '0xe220a8397b1dcdaf'
    """

    def __init__(self, seed: int = 0):
        self.state = int(seed) & _MASK64

    def next_u64(self) -> int:
        self.state = (self.state + GOLDEN_GAMMA) & _MASK64
        return _mix(self.state)

    def next_unit(self) -> float:
        """Uniform double in [0, 1) from the top 53 bits."""
        return (self.next_u64() >> 11) * _UNIT

    def units(self, n: int) -> np.ndarray:
        """The next ``n`` values of :meth:`next_unit`, as an array.

        splitmix64 state after k steps is ``seed + k * gamma``, so a block of
        draws can be produced without a Python loop.
        """
        if n <= 0:
            return np.empty(0, dtype=np.float64)
        steps = np.arange(1, n + 1, dtype=np.uint64)
        with np.errstate(over="ignore"):
            z = np.uint64(self.state) + steps * np.uint64(GOLDEN_GAMMA)
            z = (z ^ (z >> np.uint64(30))) * np.uint64(_MIX1)
            z = (z ^ (z >> np.uint64(27))) * np.uint64(_MIX2)
            z = z ^ (z >> np.uint64(31))
        self.state = (self.state + n * GOLDEN_GAMMA) & _MASK64
        return (z >> np.uint64(11)).astype(np.float64) * _UNIT

    def normals(self, n: int) -> np.ndarray:
        """``n`` standard normal deviates via Box-Muller.

        Each pair (u1, u2) of consecutive units yields
        ``r*cos(2*pi*u2)`` then ``r*sin(2*pi*u2)`` with
        ``r = sqrt(-2*ln(1 - u1))``; an odd tail discards the sine half.
        """
        pairs = (n + 1) // 2
        u = self.units(2 * pairs).reshape(pairs, 2)
        r = np.sqrt(-2.0 * np.log1p(-u[:, 0]))
        theta = 2.0 * math.pi * u[:, 1]
        out = np.empty((pairs, 2), dtype=np.float64)
        out[:, 0] = r * np.cos(theta)
        out[:, 1] = r * np.sin(theta)
        return out.ravel()[:n]
