"""Deterministic pseudo-random stream for the solver.

The multi-start loop derives one independent stream per iteration from
(seed + iteration index), so a run split across workers draws exactly the
numbers a serial run would. SplitMix64 is small enough to implement
identically in interpreted and compiled code, which keeps the two solver
engines bit-for-bit comparable.
"""

from __future__ import annotations

MASK64 = (1 << 64) - 1

_GAMMA = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB


class SplitMix64:
    """George Steele's splitmix64 generator over unsigned 64-bit state."""

    __slots__ = ("_state",)

    def __init__(self, seed: int) -> None:
        self._state = seed & MASK64

    def next_u64(self) -> int:
        self._state = (self._state + _GAMMA) & MASK64
        z = self._state
        z = ((z ^ (z >> 30)) * _MIX1) & MASK64
        z = ((z ^ (z >> 27)) * _MIX2) & MASK64
        return z ^ (z >> 31)

    def randrange(self, n: int) -> int:
        """Uniform draw from [0, n). Plain modulo; the bias at n << 2**64
        is far below anything observable and keeps both engines identical."""
        if n <= 0:
            raise ValueError("randrange needs a positive bound")
        return self.next_u64() % n


def stream_for_iteration(seed: int, iteration: int) -> SplitMix64:
    """Sub-stream for one multi-start iteration."""
    return SplitMix64((seed + iteration) & MASK64)
