"""Portable 64-bit PRNG: xoshiro256** seeded through splitmix64.

Integer state only, so streams are identical on every platform.  Variates
are built from the uniform stream with fixed algorithms (inverse CDF,
Marsaglia polar, Marsaglia-Tsang) rather than any library sampler.
"""

from __future__ import annotations

import math

__all__ = ["SplitMix64", "Xoshiro256StarStar", "derive_seed"]

MASK64 = (1 << 64) - 1


def _rotl(x: int, k: int) -> int:
    return ((x << k) | (x >> (64 - k))) & MASK64


def _mix64(z: int) -> int:
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


class SplitMix64:
    GOLDEN = 0x9E3779B97F4A7C15

    def __init__(self, state: int):
        self.state = int(state) & MASK64

    def next(self) -> int:
        self.state = (self.state + self.GOLDEN) & MASK64
        return _mix64(self.state)


def derive_seed(base_seed: int, index: int) -> int:
    """Stream seed for replicate ``index``: two splitmix rounds over (base, index)."""
    z = _mix64((int(base_seed) + SplitMix64.GOLDEN) & MASK64)
    return _mix64(((z ^ (int(index) & MASK64)) + SplitMix64.GOLDEN) & MASK64)


class Xoshiro256StarStar:
    def __init__(self, seed: int):
        sm = SplitMix64(seed)
        self.s = [sm.next() for _ in range(4)]
        if not any(self.s):
            self.s[0] = 1
        self._spare = None

    def next_u64(self) -> int:
        s = self.s
        result = (_rotl((s[1] * 5) & MASK64, 7) * 9) & MASK64
        t = (s[1] << 17) & MASK64
        s[2] ^= s[0]
        s[3] ^= s[1]
        s[1] ^= s[2]
        s[0] ^= s[3]
        s[2] ^= t
        s[3] = _rotl(s[3], 45)
        return result

    def uniform(self) -> float:
        """Uniform on [0, 1) with 53 random bits."""
        return (self.next_u64() >> 11) * (1.0 / (1 << 53))

    def uniform_open(self) -> float:
        """Uniform on (0, 1)."""
        return ((self.next_u64() >> 11) + 0.5) * (1.0 / (1 << 53))

    def exponential(self, mean: float = 1.0) -> float:
        return -mean * math.log1p(-self.uniform())

    def normal(self) -> float:
        """Standard normal by the Marsaglia polar method."""
        if self._spare is not None:
            z, self._spare = self._spare, None
            return z
        while True:
            u = 2.0 * self.uniform() - 1.0
            v = 2.0 * self.uniform() - 1.0
            s = u * u + v * v
            if 0.0 < s < 1.0:
                break
        f = math.sqrt(-2.0 * math.log(s) / s)
        self._spare = v * f
        return u * f

    def gamma(self, shape: float) -> float:
        """Gamma(shape, 1) by Marsaglia-Tsang, boosted for shape < 1."""
        if shape <= 0.0:
            raise ValueError(f"gamma shape must be positive, got {shape!r}")
        if shape < 1.0:
            return self.gamma(shape + 1.0) * self.uniform_open() ** (1.0 / shape)
        d = shape - 1.0 / 3.0
        c = 1.0 / math.sqrt(9.0 * d)
        while True:
            z = self.normal()
            v = 1.0 + c * z
            if v <= 0.0:
                continue
            v = v * v * v
            u = self.uniform_open()
            if math.log(u) < 0.5 * z * z + d - d * v + d * math.log(v):
                return d * v

    def student_t(self, nu: float) -> float:
        z = self.normal()
        return z / math.sqrt(2.0 * self.gamma(0.5 * nu) / nu)
