"""Portable deterministic random number generation.

Every stochastic stage draws from one of two documented constructions so
that a (seed, index) pair produces the same value in any implementation:

* ``SplitMix64`` — the standard 64-bit mixer-based generator.  Output k of
  a stream seeded with s is ``mix64(s + (k+1)*GOLDEN)``, which makes the
  stream usable as a counter-based source: per-item noise is computed from
  the item index directly, so results never depend on evaluation order.
* ``Xoshiro256StarStar`` — the reference xoshiro256** generator, seeded
  from four successive SplitMix64 outputs.  Used for inherently sequential
  draws (Poisson counts, shuffles).

Gaussian deviates use Box-Muller on two stream slots; uniform doubles use
the top 53 bits of a 64-bit word.
"""

from __future__ import annotations

import math

import numpy as np

MASK64 = 0xFFFFFFFFFFFFFFFF
GOLDEN = 0x9E3779B97F4A7C15
_M1 = 0xBF58476D1CE4E5B9
_M2 = 0x94D049BB133111EB

_U64 = np.uint64
_NP_GOLDEN = _U64(GOLDEN)
_NP_M1 = _U64(_M1)
_NP_M2 = _U64(_M2)


def mix64(x: int) -> int:
    """SplitMix64 finalizer (Stafford variant 13)."""
    z = x & MASK64
    z = ((z ^ (z >> 30)) * _M1) & MASK64
    z = ((z ^ (z >> 27)) * _M2) & MASK64
    return z ^ (z >> 31)


def mix64_array(x: np.ndarray) -> np.ndarray:
    z = x.astype(np.uint64, copy=True)
    z = (z ^ (z >> _U64(30))) * _NP_M1
    z = (z ^ (z >> _U64(27))) * _NP_M2
    return z ^ (z >> _U64(31))


def unit_from_u64(u: int) -> float:
    """Map a 64-bit word to a double in [0, 1) using its top 53 bits."""
    return (u >> 11) * 2.0**-53


class SplitMix64:
    """Sequential view of the SplitMix64 stream."""

    def __init__(self, seed: int):
        self._state = seed & MASK64

    def next_u64(self) -> int:
        self._state = (self._state + GOLDEN) & MASK64
        return mix64(self._state)


def stream_u64(seed: int, indices: np.ndarray) -> np.ndarray:
    """Counter-based access to the SplitMix64 stream started at ``seed``.

    ``indices`` are 0-based output positions; order of evaluation is
    irrelevant by construction.
    """
    idx = indices.astype(np.uint64, copy=False)
    return mix64_array(_U64(seed & MASK64) + (idx + _U64(1)) * _NP_GOLDEN)


def stream_unit(seed: int, indices: np.ndarray) -> np.ndarray:
    return (stream_u64(seed, indices) >> _U64(11)).astype(np.float64) * 2.0**-53


def substream_seed(master_seed: int, tag: int) -> int:
    """Derive an independent stream seed for one pipeline stage."""
    return mix64((master_seed & MASK64) ^ mix64(tag))


def gaussian_stream(seed: int, n: int, slots_per_item: int, first_slot: int) -> np.ndarray:
    """One standard-normal deviate per item via Box-Muller.

    Item i consumes stream slots ``i*slots_per_item + first_slot`` and
    ``+ first_slot + 1``.
    """
    base = np.arange(n, dtype=np.uint64) * _U64(slots_per_item)
    u1 = stream_unit(seed, base + _U64(first_slot))
    u2 = stream_unit(seed, base + _U64(first_slot + 1))
    # 1-u1 keeps the log argument in (0, 1]
    return np.sqrt(-2.0 * np.log1p(-u1)) * np.cos(2.0 * math.pi * u2)


def _rotl(x: int, k: int) -> int:
    return ((x << k) | (x >> (64 - k))) & MASK64


class Xoshiro256StarStar:
    """Reference xoshiro256** generator (Blackman & Vigna)."""

    def __init__(self, seed: int):
        sm = SplitMix64(seed)
        self._s = [sm.next_u64() for _ in range(4)]

    def next_u64(self) -> int:
        s = self._s
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
        return unit_from_u64(self.next_u64())

    def randbelow(self, n: int) -> int:
        """Uniform integer in [0, n). Modulo bias is negligible for n << 2^64."""
        if n <= 0:
            raise ValueError("randbelow needs n >= 1")
        return self.next_u64() % n

    def shuffle(self, items: list) -> None:
        """In-place Fisher-Yates."""
        for i in range(len(items) - 1, 0, -1):
            j = self.randbelow(i + 1)
            items[i], items[j] = items[j], items[i]

    def sample(self, items: list, k: int) -> list:
        pool = list(items)
        self.shuffle(pool)
        return pool[:k]


def poisson(lam: float, rng: Xoshiro256StarStar) -> int:
    """Poisson deviate by chunked Knuth multiplication.

    Splitting lambda into chunks <= 16 keeps the uniform product well away
    from double underflow; the chunk sum is exactly Poisson(lambda).
    """
    if lam < 0:
        raise ValueError("lambda must be >= 0")
    total = 0
    remaining = lam
    while remaining > 0:
        chunk = min(remaining, 16.0)
        limit = math.exp(-chunk)
        count = 0
        prod = 1.0
        while True:
            prod *= rng.uniform()
            if prod <= limit:
                break
            count += 1
        total += count
        remaining -= chunk
    return total
