"""Seeded pseudo-random numbers used everywhere reproducibility matters.

The generator is splitmix64 (Vigna's public-domain mixer): a 64-bit
counter advanced by the golden-gamma constant and scrambled by two
multiply-xorshift rounds. It is trivially portable -- the whole state is
one integer and the output stream is fixed by the algorithm, so traces,
centroids and payloads regenerate identically on any platform.

Independent streams are derived by hashing a parent seed with integer
tags through the same mixer (``derive_seed``), the usual split-by-hash
construction. Gaussians come from the Box-Muller transform and consume
exactly two raw draws each, keeping call counts predictable.
"""

import math

_MASK64 = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB


def mix64(z: int) -> int:
    """The splitmix64 output scrambler (finalizer) on its own."""
    z &= _MASK64
    z = ((z ^ (z >> 30)) * _MIX1) & _MASK64
    z = ((z ^ (z >> 27)) * _MIX2) & _MASK64
    return z ^ (z >> 31)


def derive_seed(seed: int, *tags: int) -> int:
    """Derive a child seed from ``seed`` and a tuple of integer tags.

    Each tag is folded in with an odd offset before mixing so that
    (seed, 0) and (seed,) cannot collide.
    """
    h = seed & _MASK64
    for t in tags:
        h = mix64((h + _GAMMA) ^ (t & _MASK64))
    return h


class SplitMix64:
    """splitmix64 stream starting from ``seed``."""

    __slots__ = ("_state",)

    def __init__(self, seed: int):
        self._state = seed & _MASK64

    def next_u64(self) -> int:
        self._state = (self._state + _GAMMA) & _MASK64
        return mix64(self._state)

    def uniform(self) -> float:
        """Uniform double in [0, 1) built from the top 53 bits."""
        return (self.next_u64() >> 11) * 2.0**-53

    def gauss(self) -> float:
        """Standard normal via Box-Muller; consumes two raw draws."""
        u1 = self.uniform()
        u2 = self.uniform()
        if u1 == 0.0:
            u1 = 2.0**-53
        return math.sqrt(-2.0 * math.log(u1)) * math.cos(2.0 * math.pi * u2)

    def exponential(self, mean: float) -> float:
        """Exponential with the given mean; consumes one raw draw."""
        u = self.uniform()
        return -mean * math.log(1.0 - u)

    def bytes(self, n: int) -> bytes:
        """``n`` deterministic bytes from consecutive draws."""
        out = bytearray()
        for _ in range((n + 7) // 8):
            out += self.next_u64().to_bytes(8, "big")
        return bytes(out[:n])
