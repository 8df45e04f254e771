"""Platform-independent xoshiro256** generator seeded through SplitMix64.

Pure integer arithmetic, so a given seed yields the same stream on every
platform and every numpy version. Used wherever a sampled sequence has to
be reproducible byte for byte (random pair baselines, occurrence sampling).
Bulk float arrays (weights, synthetic frames) come from numpy's PCG64.
"""

from __future__ import annotations

_MASK = (1 << 64) - 1


def splitmix64(state: int) -> tuple[int, int]:
    """Advance a SplitMix64 state; return ``(new_state, output)``."""
    state = (state + 0x9E3779B97F4A7C15) & _MASK
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return state, z ^ (z >> 31)


def _rotl(x: int, k: int) -> int:
    return ((x << k) | (x >> (64 - k))) & _MASK


class Xoshiro256:
    def __init__(self, seed: int):
        sm = int(seed) & _MASK
        s = []
        for _ in range(4):
            sm, out = splitmix64(sm)
            s.append(out)
        self._s = s

    def next_u64(self) -> int:
        s0, s1, s2, s3 = self._s
        result = (_rotl((s1 * 5) & _MASK, 7) * 9) & _MASK
        t = (s1 << 17) & _MASK
        s2 ^= s0
        s3 ^= s1
        s1 ^= s2
        s0 ^= s3
        s2 ^= t
        s3 = _rotl(s3, 45)
        self._s = [s0, s1, s2, s3]
        return result

    def randbelow(self, n: int) -> int:
        """Uniform integer in ``[0, n)`` by rejection on the top bits."""
        if n <= 0:
            raise ValueError("n must be positive")
        k = n.bit_length()
        if k > 64:
            raise ValueError("n exceeds 64 bits")
        shift = 64 - k
        while True:
            r = self.next_u64() >> shift
            if r < n:
                return r

    def random(self) -> float:
        return (self.next_u64() >> 11) * (1.0 / (1 << 53))

    def sample_indices(self, population: int, n: int) -> list[int]:
        """Draw ``n`` distinct integers from ``range(population)``.

        Floyd's algorithm: exactly uniform over subsets, O(n) memory, so it
        works when ``population`` is far too large to materialize.
        """
        if not 0 <= n <= population:
            raise ValueError("cannot sample %d of %d" % (n, population))
        chosen: set[int] = set()
        order: list[int] = []
        for j in range(population - n, population):
            t = self.randbelow(j + 1)
            pick = j if t in chosen else t
            chosen.add(pick)
            order.append(pick)
        return order

    def shuffle(self, items: list) -> None:
        for i in range(len(items) - 1, 0, -1):
            j = self.randbelow(i + 1)
            items[i], items[j] = items[j], items[i]
