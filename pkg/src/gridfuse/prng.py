"""Seeded random streams for reproducible scenario generation.

The core generator is SplitMix64: 64 bits of state advanced by the odd
constant 0x9E3779B97F4A7C15, with each output finalized by two
xor-shift/multiply rounds.  The algorithm is small enough to restate
completely, which keeps fixtures portable across implementations:

    state  := (state + 0x9E3779B97F4A7C15) mod 2**64
    z      := state
    z      := ((z XOR (z >> 30)) * 0xBF58476D1CE4E5B9) mod 2**64
    z      := ((z XOR (z >> 27)) * 0x94D049BB133111EB) mod 2**64
    output := z XOR (z >> 31)

Derived draws are defined exactly on top of ``next_u64``:

* ``uniform``  -- (next_u64 >> 11) * 2**-53, in [0, 1)
* ``normal``   -- Box-Muller, two uniforms per variate (no caching):
                  sqrt(-2 ln u1) * cos(2 pi u2) with u1 in (0, 1]
* ``randint``  -- multiply-shift range reduction, (next_u64 * n) >> 64
* ``shuffle``  -- Fisher-Yates from the top index down

Independent streams are split off a seed by name: the purpose string is
hashed with FNV-1a (64 bit) into the seed and mixed once.  Each consumer
owns one stream per concern (labels, features, corruption, ...), so drawing
more values for one concern never shifts another.
"""

from __future__ import annotations

import math

MASK64 = (1 << 64) - 1

_GAMMA = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3

_TWO_NEG_53 = 2.0 ** -53


def _mix(z: int) -> int:
    z = ((z ^ (z >> 30)) * _MIX1) & MASK64
    z = ((z ^ (z >> 27)) * _MIX2) & MASK64
    return z ^ (z >> 31)


def _fnv1a64(text: str) -> int:
    h = _FNV_OFFSET
    for byte in text.encode("utf-8"):
        h = ((h ^ byte) * _FNV_PRIME) & MASK64
    return h


class SplitMix64:
    """SplitMix64 stream; state is the full generator state."""

    __slots__ = ("state",)

    def __init__(self, seed: int):
        self.state = seed & MASK64

    def next_u64(self) -> int:
        self.state = (self.state + _GAMMA) & MASK64
        return _mix(self.state)

    def uniform(self) -> float:
        """Uniform double in [0, 1) with 53 random bits."""
        return (self.next_u64() >> 11) * _TWO_NEG_53

    def normal(self) -> float:
        """Standard normal via Box-Muller; consumes exactly two draws."""
        u1 = ((self.next_u64() >> 11) + 1) * _TWO_NEG_53  # (0, 1], ln stays finite
        u2 = (self.next_u64() >> 11) * _TWO_NEG_53
        return math.sqrt(-2.0 * math.log(u1)) * math.cos(2.0 * math.pi * u2)

    def randint(self, n: int) -> int:
        """Integer in [0, n) by multiply-shift reduction."""
        if n <= 0:
            raise ValueError("randint bound must be positive")
        return (self.next_u64() * n) >> 64

    def shuffle(self, items: list) -> None:
        """In-place Fisher-Yates permutation."""
        for i in range(len(items) - 1, 0, -1):
            j = self.randint(i + 1)
            items[i], items[j] = items[j], items[i]


def stream(seed: int, purpose: str) -> SplitMix64:
    """Named sub-stream of ``seed``: mix(seed XOR fnv1a64(purpose))."""
    return SplitMix64(_mix((seed & MASK64) ^ _fnv1a64(purpose)))
