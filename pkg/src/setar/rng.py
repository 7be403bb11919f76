"""Deterministic counter-based pseudorandom generator.

Every stochastic feature of the package (simulators, bagging, ensemble
hyperparameter draws) derives from the one generator defined here so that
runs are reproducible bit-for-bit from a single 64-bit seed, independent
of platform, thread count and library versions.

The algorithm, written out in full (all arithmetic modulo 2**64):

    GAMMA = 0x9E3779B97F4A7C15

    mix64(z):
        z = z XOR (z >> 30);  z = z * 0xBF58476D1CE4E5B9
        z = z XOR (z >> 27);  z = z * 0x94D049BB133111EB
        z = z XOR (z >> 31)
        return z

    raw value k of the stream with seed s (k = 0, 1, 2, ...):
        u_k = mix64(s + (k + 1) * GAMMA)

Derived quantities:

    uniform in [0, 1):        (u_k >> 11) / 2**53
    uniform in (0, 1):        ((u_k >> 11) + 0.5) / 2**53
    standard normal:          sqrt(-2 ln a) * cos(2 pi b) with a, b two
                              consecutive open-interval uniforms
    integer below n:          u_k mod n
    k-subset of range(n):     partial Fisher-Yates using "integer below",
                              result sorted ascending
    sub-stream i of seed s:   a new stream seeded with raw value i of s

A stream never reuses counters: each draw consumes one raw value (two for
a normal deviate).
"""

from __future__ import annotations

import math

import numpy as np

MASK64 = (1 << 64) - 1
GAMMA = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB


def mix64(z: int) -> int:
    """Finalizing bit-mix of a 64-bit integer."""
    z &= MASK64
    z ^= z >> 30
    z = (z * _MIX1) & MASK64
    z ^= z >> 27
    z = (z * _MIX2) & MASK64
    z ^= z >> 31
    return z


def mix64_array(z: np.ndarray) -> np.ndarray:
    """Vectorized ``mix64`` over a uint64 array."""
    z = z.astype(np.uint64, copy=True)
    with np.errstate(over="ignore"):
        z ^= z >> np.uint64(30)
        z *= np.uint64(_MIX1)
        z ^= z >> np.uint64(27)
        z *= np.uint64(_MIX2)
        z ^= z >> np.uint64(31)
    return z


class Rng:
    """Counter-based stream of pseudorandom draws for one seed."""

    def __init__(self, seed: int):
        self.seed = seed & MASK64
        self.counter = 0

    def u64(self) -> int:
        value = mix64((self.seed + (self.counter + 1) * GAMMA) & MASK64)
        self.counter += 1
        return value

    def uniform(self) -> float:
        """Uniform draw in [0, 1)."""
        return (self.u64() >> 11) / float(1 << 53)

    def uniform_open(self) -> float:
        """Uniform draw in (0, 1), safe as a log argument."""
        return ((self.u64() >> 11) + 0.5) / float(1 << 53)

    def uniform_range(self, lo: float, hi: float) -> float:
        return lo + (hi - lo) * self.uniform()

    def gauss(self) -> float:
        a = self.uniform_open()
        b = self.uniform_open()
        return math.sqrt(-2.0 * math.log(a)) * math.cos(2.0 * math.pi * b)

    def randint(self, n: int) -> int:
        """Integer in [0, n)."""
        if n <= 0:
            raise ValueError("n must be positive")
        return self.u64() % n

    def sample_indices(self, n: int, k: int) -> np.ndarray:
        """k distinct indices from range(n), sorted ascending."""
        if not 0 <= k <= n:
            raise ValueError(f"cannot sample {k} of {n}")
        pool = np.arange(n, dtype=np.int64)
        for i in range(k):
            j = i + self.randint(n - i)
            pool[i], pool[j] = pool[j], pool[i]
        picked = pool[:k].copy()
        picked.sort()
        return picked

    def uniform_block(self, count: int) -> np.ndarray:
        """``count`` consecutive [0, 1) uniforms, vectorized.

        Identical to calling :meth:`uniform` ``count`` times.
        """
        counters = self.counter + 1 + np.arange(count, dtype=np.uint64)
        with np.errstate(over="ignore"):
            raw = mix64_array(np.uint64(self.seed) + counters * np.uint64(GAMMA))
        self.counter += count
        return (raw >> np.uint64(11)).astype(np.float64) / float(1 << 53)

    def gauss_block(self, count: int) -> np.ndarray:
        """``count`` consecutive standard normals, vectorized.

        Identical to calling :meth:`gauss` ``count`` times.
        """
        counters = self.counter + 1 + np.arange(2 * count, dtype=np.uint64)
        with np.errstate(over="ignore"):
            raw = mix64_array(np.uint64(self.seed) + counters * np.uint64(GAMMA))
        self.counter += 2 * count
        u = ((raw >> np.uint64(11)).astype(np.float64) + 0.5) / float(1 << 53)
        a, b = u[0::2], u[1::2]
        return np.sqrt(-2.0 * np.log(a)) * np.cos(2.0 * np.pi * b)

    def substream(self, index: int) -> "Rng":
        """Independent stream ``index`` derived from this stream's seed."""
        return Rng(mix64((self.seed + (index + 1) * GAMMA) & MASK64))


def substream_seed(seed: int, index: int) -> int:
    """Seed of sub-stream ``index`` of ``seed`` (raw stream value ``index``)."""
    return mix64((seed + (index + 1) * GAMMA) & MASK64)
