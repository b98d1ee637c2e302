"""Deterministic shuffling primitives.

Dataset splits and epoch shuffles must be reproducible from a seed alone,
independent of any library's RNG stream guarantees.  We pin the exact
algorithm here: a splitmix64 generator driving an in-place Fisher-Yates
shuffle.  Both are small enough to re-implement bit-for-bit in any language.
"""

from __future__ import annotations

from typing import List, Sequence, TypeVar

_MASK64 = (1 << 64) - 1

T = TypeVar("T")


class SplitMix64:
    """splitmix64 as published by Steele et al.; state advances by the golden gamma."""

    def __init__(self, seed: int):
        self._state = seed & _MASK64

    def next_u64(self) -> int:
        self._state = (self._state + 0x9E3779B97F4A7C15) & _MASK64
        z = self._state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        return z ^ (z >> 31)

    def below(self, bound: int) -> int:
        """Uniform integer in [0, bound) via rejection sampling (no modulo bias)."""
        if bound <= 0:
            raise ValueError("bound must be positive")
        limit = _MASK64 - (_MASK64 + 1) % bound
        while True:
            v = self.next_u64()
            if v <= limit:
                return v % bound


def derive_seed(*parts: int) -> int:
    """Mix integer parts into a single 64-bit seed, order-sensitive."""
    mixer = SplitMix64(0x5DEECE66D)
    acc = 0
    for p in parts:
        acc ^= SplitMix64((p & _MASK64) ^ mixer.next_u64()).next_u64()
    return acc & _MASK64


def shuffled(items: Sequence[T], seed: int) -> List[T]:
    """Return a seeded Fisher-Yates permutation of items (input untouched)."""
    out = list(items)
    rng = SplitMix64(seed)
    for i in range(len(out) - 1, 0, -1):
        j = rng.below(i + 1)
        out[i], out[j] = out[j], out[i]
    return out
