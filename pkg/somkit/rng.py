"""Seeded random stream used by every stochastic algorithm.

The generator is xoshiro256** seeded through SplitMix64, so a stream can be
replayed from its recurrence alone:

    SplitMix64:  z = (state += 0x9E3779B97F4A7C15)
                 z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
                 z = (z ^ (z >> 27)) * 0x94D049BB133111EB
                 out = z ^ (z >> 31)
    xoshiro256**: out = rotl(s1 * 5, 7) * 9
                  t = s1 << 17
                  s2 ^= s0; s3 ^= s1; s1 ^= s2; s0 ^= s3
                  s2 ^= t;  s3 = rotl(s3, 45)

All arithmetic is modulo 2**64. Floats take the top 53 bits; bounded
integers use Lemire's multiply-shift with rejection.
"""

from __future__ import annotations

from typing import List, Tuple

import numpy as np

from .errors import ValidationError

_MASK64 = (1 << 64) - 1


def _rotl(x: int, k: int) -> int:
    return ((x << k) | (x >> (64 - k))) & _MASK64


def splitmix64(state: int) -> Tuple[int, int]:
    """Advance a SplitMix64 state; return ``(new_state, output)``."""
    state = (state + 0x9E3779B97F4A7C15) & _MASK64
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return state, z ^ (z >> 31)


class Stream:
    """xoshiro256** generator; one instance per training run."""

    def __init__(self, seed: int) -> None:
        if seed < 0:
            raise ValidationError(f"seed must be non-negative, got {seed}")
        state = seed & _MASK64
        words: List[int] = []
        for _ in range(4):
            state, out = splitmix64(state)
            words.append(out)
        self._s = words
        self.seed = seed

    def next_u64(self) -> int:
        s = self._s
        result = (_rotl((s[1] * 5) & _MASK64, 7) * 9) & _MASK64
        t = (s[1] << 17) & _MASK64
        s[2] ^= s[0]
        s[3] ^= s[1]
        s[1] ^= s[2]
        s[0] ^= s[3]
        s[2] ^= t
        s[3] = _rotl(s[3], 45)
        return result

    def random(self) -> float:
        """Uniform float in [0, 1)."""
        return (self.next_u64() >> 11) * (1.0 / (1 << 53))

    def randbelow(self, n: int) -> int:
        """Uniform integer in [0, n)."""
        if n <= 0:
            raise ValidationError(f"randbelow needs n > 0, got {n}")
        m = self.next_u64() * n
        low = m & _MASK64
        if low < n:
            threshold = ((1 << 64) - n) % n
            while low < threshold:
                m = self.next_u64() * n
                low = m & _MASK64
        return m >> 64

    def uniform(self, low: np.ndarray, high: np.ndarray, rows: int) -> np.ndarray:
        """Draw ``rows`` vectors coordinate-wise uniform in ``[low, high]``, row-major."""
        low = np.asarray(low, dtype=float)
        high = np.asarray(high, dtype=float)
        u = np.array(
            [[self.random() for _ in range(low.shape[0])] for _ in range(rows)],
            dtype=float,
        ).reshape(rows, low.shape[0])
        return low + (high - low) * u

    def sample(self, population: int, k: int) -> List[int]:
        """``k`` distinct indices from ``range(population)`` by partial Fisher-Yates."""
        if k > population:
            raise ValidationError(f"cannot sample {k} items from {population}")
        pool = list(range(population))
        for i in range(k):
            j = i + self.randbelow(population - i)
            pool[i], pool[j] = pool[j], pool[i]
        return pool[:k]

    def spawn_seeds(self, count: int) -> List[int]:
        """Seeds for ``count`` child streams, so one run seed can feed separate stages."""
        return [self.next_u64() for _ in range(count)]


__all__ = ["Stream", "splitmix64"]
