"""Deterministic counter-based random generator.

Keyed BLAKE2 of an incrementing counter. Slower than numpy's bit
generators but bit-stable across platforms and library versions, which
the reproducibility contract (same seed, identical model) requires.
Streams are derived from a seed plus arbitrary string labels, so e.g.
each building block samples from its own independent stream.
"""

from __future__ import annotations

import hashlib


class CounterRng:
    """Uniform draws from blake2b(key=derive(seed, *labels), data=counter)."""

    def __init__(self, seed: int, *labels: str):
        material = str(seed & 0xFFFFFFFFFFFFFFFF)
        for label in labels:
            material += "\x1f" + label
        self._key = hashlib.blake2b(material.encode("utf-8"), digest_size=32).digest()
        self._counter = 0

    def u64(self) -> int:
        digest = hashlib.blake2b(
            self._counter.to_bytes(8, "little"), key=self._key, digest_size=8
        ).digest()
        self._counter += 1
        return int.from_bytes(digest, "little")

    def below(self, n: int) -> int:
        """Uniform integer in [0, n), unbiased via rejection."""
        if n <= 0:
            raise ValueError("bound must be positive")
        limit = (1 << 64) - ((1 << 64) % n)
        while True:
            v = self.u64()
            if v < limit:
                return v % n

    def unit(self) -> float:
        """Uniform float in [0, 1) with 53 random bits."""
        return (self.u64() >> 11) * (1.0 / (1 << 53))

    def sample_without_replacement(self, n: int, k: int) -> list[int]:
        """k distinct indices from range(n), uniform over k-subsets.

        Partial Fisher-Yates; the returned order is the draw order.
        """
        if not 0 <= k <= n:
            raise ValueError(f"cannot draw {k} from {n}")
        idx = list(range(n))
        for i in range(k):
            j = i + self.below(n - i)
            idx[i], idx[j] = idx[j], idx[i]
        return idx[:k]
