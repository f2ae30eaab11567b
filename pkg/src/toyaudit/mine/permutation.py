"""Seeded bijection on [0, n) without materializing the domain.

A numeric Feistel network on Z_a x Z_b (a*b >= n, both near sqrt(n)) with
cycle walking back into [0, n). Suitable for shuffling enumeration order,
not for cryptography.
"""

from __future__ import annotations

import hashlib
import math

_MASK64 = (1 << 64) - 1


def _mix64(x: int) -> int:
    # splitmix64 finalizer
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x ^ (x >> 31)


class IndexPermutation:
    def __init__(self, n: int, key: bytes, rounds: int = 6):
        if n < 1:
            raise ValueError("domain must be non-empty")
        if rounds % 2:
            raise ValueError("rounds must be even")
        self.n = n
        self.a = math.isqrt(n - 1) + 1 if n > 1 else 1
        self.b = -(-n // self.a)
        digest = hashlib.blake2b(key, digest_size=8 * rounds).digest()
        self._round_keys = [int.from_bytes(digest[8 * r:8 * r + 8], "little") for r in range(rounds)]

    def __len__(self) -> int:
        return self.n

    def _feistel(self, x: int) -> int:
        left, right = divmod(x, self.b)
        m_left, m_right = self.a, self.b
        for rk in self._round_keys:
            left, right = right, (left + _mix64(rk ^ right)) % m_left
            m_left, m_right = m_right, m_left
        return left * self.b + right

    def __call__(self, index: int) -> int:
        if not 0 <= index < self.n:
            raise IndexError(index)
        x = self._feistel(index)
        while x >= self.n:
            x = self._feistel(x)
        return x


def derive_key(seed: int, label: str) -> bytes:
    return (seed & _MASK64).to_bytes(8, "little") + label.encode("utf-8")
