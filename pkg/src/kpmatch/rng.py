"""Portable seeded randomness.

A splitmix64 stream: the state advances by the golden-ratio increment and each
output is the standard splitmix64 finalizer of the new state.  Derived
draws are defined exactly so another implementation can reproduce them:

* Bernoulli(p) with ``p = num/den`` consumes one word ``x`` and succeeds iff
  ``x * den < num * 2**64``.
* ``below(m)`` draws words until ``x < 2**64 - (2**64 % m)`` and returns
  ``x % m`` (rejection sampling, no modulo bias).
"""

from __future__ import annotations

from fractions import Fraction

MASK = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15


class SplitMix64:
    __slots__ = ("state",)

    def __init__(self, seed: int):
        self.state = int(seed) & MASK

    def next(self) -> int:
        self.state = (self.state + GOLDEN) & MASK
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK
        return z ^ (z >> 31)

    def bernoulli(self, p: Fraction) -> bool:
        return self.next() * p.denominator < p.numerator << 64

    def below(self, m: int) -> int:
        if m <= 0:
            raise ValueError("below() needs a positive bound")
        limit = (1 << 64) - ((1 << 64) % m)
        while True:
            x = self.next()
            if x < limit:
                return x % m

    def sample(self, items: list, count: int) -> list:
        """First ``count`` entries of a partial Fisher-Yates shuffle of a copy of ``items``."""
        pool = list(items)
        for i in range(count):
            j = i + self.below(len(pool) - i)
            pool[i], pool[j] = pool[j], pool[i]
        return pool[:count]


def derive_seed(seed: int, *salt: int) -> int:
    """Deterministic child seed, used to give each retry or instance its own stream."""
    r = SplitMix64(seed)
    for s in salt:
        r.state ^= int(s) & MASK
        r.next()
    return r.next()
