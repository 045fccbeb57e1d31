"""Deterministic 64-bit RNG shared by both kernel backends.

The generator is SplitMix64. The native kernel reimplements exactly the same
update and rejection logic in C, so a given stream seed yields bit-identical
draw sequences on either backend; everything downstream (constructions, check
reports) is therefore backend independent for a fixed seed.
"""

from __future__ import annotations

MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB


def mix64(z: int) -> int:
    """SplitMix64 finalizer: a bijective scramble of a 64-bit word."""
    z &= MASK64
    z = ((z ^ (z >> 30)) * _MIX1) & MASK64
    z = ((z ^ (z >> 27)) * _MIX2) & MASK64
    return z ^ (z >> 31)


def substream_seed(seed: int, index: int) -> int:
    """Derive the seed of logical substream `index` from a user seed.

    Used to give independent streams to direction search, base-point sampling
    and each fixed-size trial shard of the sampled checks, so results do not
    depend on thread count.
    """
    return mix64(mix64(seed & MASK64) ^ (((index + 1) * _GOLDEN) & MASK64))


class SplitMix64:
    """Sequential SplitMix64 stream with unbiased bounded draws."""

    __slots__ = ("_state",)

    def __init__(self, seed: int):
        self._state = seed & MASK64

    def next_u64(self) -> int:
        self._state = (self._state + _GOLDEN) & MASK64
        return mix64(self._state)

    def below(self, bound: int) -> int:
        """Uniform integer in [0, bound) via rejection (no modulo bias)."""
        if bound <= 0:
            raise ValueError("bound must be positive")
        if bound & (bound - 1) == 0:
            return self.next_u64() & (bound - 1)
        # Largest multiple of bound that fits in 64 bits; reject above it.
        limit = ((1 << 64) // bound) * bound
        while True:
            u = self.next_u64()
            if u < limit:
                return u % bound
