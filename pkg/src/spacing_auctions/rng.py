"""Seedable counter-based pseudo-random generator used by every simulation.

The generator is SplitMix64.  Its entire algorithm fits in a few lines, so a
run can be reproduced bit-for-bit from the seed alone, in any language:

    state   <- (state + 0x9E3779B97F4A7C15) mod 2^64       # golden-ratio step
    z       <- state
    z       <- (z XOR (z >> 30)) * 0xBF58476D1CE4E5B9 mod 2^64
    z       <- (z XOR (z >> 27)) * 0x94D049BB133111EB mod 2^64
    output  <- z XOR (z >> 31)

``uniform()`` maps the top 53 bits of one output to [0, 1).  ``split(key)``
derives an independent child stream by feeding ``seed + key * golden`` through
the same finalizer, so replications can fan out without sharing state.
"""

from __future__ import annotations

_MASK = 0xFFFFFFFFFFFFFFFF
_GOLDEN = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB
_INV_2_53 = 1.0 / (1 << 53)


def _mix(z: int) -> int:
    z = ((z ^ (z >> 30)) * _MIX1) & _MASK
    z = ((z ^ (z >> 27)) * _MIX2) & _MASK
    return z ^ (z >> 31)


class SplitMix64:
    """64-bit counter PRNG: a golden-ratio counter pushed through a mixer."""

    __slots__ = ("_state",)

    def __init__(self, seed: int):
        self._state = seed & _MASK

    def next_u64(self) -> int:
        self._state = (self._state + _GOLDEN) & _MASK
        return _mix(self._state)

    def uniform(self) -> float:
        """Uniform draw in [0, 1) with 53-bit resolution."""
        return (self.next_u64() >> 11) * _INV_2_53

    def split(self, key: int) -> "SplitMix64":
        """Independent child stream; deterministic function of (seed, key)."""
        return SplitMix64(_mix((self._state + (key & _MASK) * _GOLDEN) & _MASK))

    def __repr__(self) -> str:  # pragma: no cover
        return f"SplitMix64(state=0x{self._state:016x})"
