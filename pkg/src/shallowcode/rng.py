"""Seeded random streams.

Every random draw in the package flows from an integer seed. Substreams are
derived with splitmix64 so that trial ``i`` of a run sees the same numbers no
matter how trials are scheduled across threads.
"""

from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1


def splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & MASK64
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def derive_seed(seed: int, index: int) -> int:
    return splitmix64(splitmix64(seed & MASK64) ^ (index & MASK64))


class Stream:
    """A deterministic stream of 64-bit draws (PCG64 keyed by splitmix64)."""

    def __init__(self, seed: int = 0):
        self.seed = int(seed) & MASK64
        self._bits = np.random.PCG64(splitmix64(self.seed))

    def substream(self, index: int) -> "Stream":
        return Stream(derive_seed(self.seed, index))

    def raw(self, size: int) -> np.ndarray:
        """``size`` uniform uint64 draws."""
        return self._bits.random_raw(size).astype(np.uint64, copy=False)

    def integers(self, bound: int, size: int | None = None):
        """Exactly uniform integers in ``[0, bound)`` by rejection on 64-bit draws."""
        if bound < 1:
            raise ValueError("bound must be positive")
        count = 1 if size is None else int(size)
        limit = np.uint64((1 << 64) - ((1 << 64) % bound)) if (1 << 64) % bound else None
        out = np.empty(count, dtype=np.int64)
        filled = 0
        while filled < count:
            draws = self.raw(max(count - filled, 16))
            if limit is not None:
                draws = draws[draws < limit]
            vals = (draws % np.uint64(bound)).astype(np.int64)
            take = min(count - filled, vals.size)
            out[filled:filled + take] = vals[:take]
            filled += take
        return int(out[0]) if size is None else out

    def random(self, size: int | None = None):
        """Uniform doubles in [0, 1) built from the top 53 bits of each draw."""
        count = 1 if size is None else int(size)
        vals = (self.raw(count) >> np.uint64(11)).astype(np.float64) * (1.0 / (1 << 53))
        return float(vals[0]) if size is None else vals

    def sample_distinct(self, population: int, k: int) -> list[int]:
        """Floyd's algorithm: ``k`` distinct values from ``range(population)``."""
        if not 0 <= k <= population:
            raise ValueError("k out of range")
        if k == 0:
            return []
        bounds = np.arange(population - k + 1, population + 1, dtype=np.uint64)
        draws = self.raw(k)
        # 2**64 mod b; draws at or above 2**64 - rem would bias the residue
        rem = (np.uint64(MASK64) % bounds + np.uint64(1)) % bounds
        bad = (rem != 0) & (draws >= np.uint64(0) - rem)
        ts = (draws % bounds).astype(np.int64)
        for i in np.flatnonzero(bad):
            ts[i] = self.integers(int(bounds[i]))
        chosen: set[int] = set()
        order: list[int] = []
        for j, t in zip(range(population - k, population), ts.tolist()):
            pick = j if t in chosen else t
            chosen.add(pick)
            order.append(pick)
        return sorted(order)
