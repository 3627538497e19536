"""Seeded, language-pinnable randomness.

All stochastic parts of the toolkit (weight init, dataset synthesis, SGD
shuffling) draw from SplitMix64 so that the exact same bytes can be
reproduced from any language given the seed.  The generator and the
mappings below (uniform, Box-Muller normal, bounded int) are documented
in FORMATS.md.
"""

import math

_MASK = 0xFFFFFFFFFFFFFFFF
_GOLDEN = 0x9E3779B97F4A7C15


class SplitMix64:
    """SplitMix64 PRNG (Steele, Lea, Flood 2014 constants)."""

    def __init__(self, seed: int):
        self._state = seed & _MASK
        self._spare_normal = None

    def next_u64(self) -> int:
        self._state = (self._state + _GOLDEN) & _MASK
        z = self._state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
        return z ^ (z >> 31)

    def uniform01(self) -> float:
        """Uniform in [0, 1) with 53 random bits."""
        return (self.next_u64() >> 11) * 2.0**-53

    def uniform(self, low: float, high: float) -> float:
        return low + (high - low) * self.uniform01()

    def normal(self) -> float:
        """Standard normal via Box-Muller; generates pairs, caches the second."""
        if self._spare_normal is not None:
            value = self._spare_normal
            self._spare_normal = None
            return value
        # +1 keeps u1 in (0, 1] so the log is finite.
        u1 = ((self.next_u64() >> 11) + 1) * 2.0**-53
        u2 = (self.next_u64() >> 11) * 2.0**-53
        radius = math.sqrt(-2.0 * math.log(u1))
        theta = 2.0 * math.pi * u2
        self._spare_normal = radius * math.sin(theta)
        return radius * math.cos(theta)

    def below(self, n: int) -> int:
        """Integer in [0, n)."""
        return self.next_u64() % n

    def shuffle(self, items: list) -> None:
        """In-place Fisher-Yates using `below` for the index draws."""
        for i in range(len(items) - 1, 0, -1):
            j = self.below(i + 1)
            items[i], items[j] = items[j], items[i]


def fnv1a64(data: bytes) -> int:
    """64-bit FNV-1a hash; used for model/profile identity, not security."""
    h = 0xCBF29CE484222325
    for byte in data:
        h ^= byte
        h = (h * 0x100000001B3) & _MASK
    return h


def fnv1a64_hex(data: bytes) -> str:
    return format(fnv1a64(data), "016x")
