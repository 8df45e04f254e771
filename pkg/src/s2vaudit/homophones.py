"""Homophone inspection of an embedding table.

A model that reads audio cannot tell homophones apart from a single spoken
word, so their embeddings should be *more* similar than arbitrary word
pairs. A table where homophones are less similar than random pairs was
most likely learned from spelling, not sound.
"""

from __future__ import annotations

import enum
import io
import math
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field
from typing import TextIO

import numpy as np

from .embed_store import EmbeddingTable
from .errors import FormatError, InvalidN, InvalidPairs, NoEvaluablePairs, WordNotFound
from .rng import Xoshiro256

DEFAULT_MARGIN = 0.02


class HomophonePairSet:
    """Ordered list of distinct-spelling word pairs, no unordered duplicates."""

    def __init__(self, pairs: Iterable[tuple[str, str]]):
        seen = set()
        out = []
        for a, b in pairs:
            a, b = a.strip().lower(), b.strip().lower()
            if not a or not b:
                raise InvalidPairs("empty word in pair")
            if a == b:
                raise InvalidPairs(f"pair of identical words: {a!r}")
            key = (a, b) if a < b else (b, a)
            if key in seen:
                raise InvalidPairs(f"duplicate pair: {a!r}, {b!r}")
            seen.add(key)
            out.append((a, b))
        self.pairs: tuple[tuple[str, str], ...] = tuple(out)

    def __len__(self):
        return len(self.pairs)

    def __iter__(self):
        return iter(self.pairs)

    def __repr__(self):
        return f"HomophonePairSet({len(self.pairs)} pairs)"


def load_homophones(source: TextIO | str) -> HomophonePairSet:
    """One pair per line, comma- or tab-separated; ``#`` starts a comment line."""
    if isinstance(source, str):
        source = io.StringIO(source)
    pairs = []
    for lineno, raw in enumerate(source, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        sep = "\t" if "\t" in line else ","
        parts = [p.strip() for p in line.split(sep)]
        if len(parts) != 2 or not all(parts):
            raise FormatError(lineno, "expected two words separated by comma or tab")
        pairs.append((parts[0], parts[1]))
    return HomophonePairSet(pairs)


def load_homophones_file(path) -> HomophonePairSet:
    with open(path, encoding="utf-8") as fh:
        return load_homophones(fh)


def save_homophones(pairs: HomophonePairSet, sink: TextIO) -> None:
    for a, b in pairs:
        sink.write(f"{a},{b}\n")


@dataclass(frozen=True)
class PairStats:
    n_evaluated: int
    n_skipped_oov: int
    mean: float
    std: float


def _stats(values: Sequence[float], n_skipped: int) -> PairStats:
    n = len(values)
    if n == 0:
        raise NoEvaluablePairs("no pair has both words in the vocabulary")
    # fsum is exactly rounded, hence independent of pair order
    mean = math.fsum(values) / n
    var = math.fsum((v - mean) ** 2 for v in values) / n
    return PairStats(n, n_skipped, mean, math.sqrt(var))


def pair_similarity_stats(table: EmbeddingTable, pairs: HomophonePairSet | Iterable) -> PairStats:
    if len(table) == 0:
        raise NoEvaluablePairs("empty table")
    if not isinstance(pairs, HomophonePairSet):
        pairs = HomophonePairSet(pairs)
    sims = []
    skipped = 0
    for a, b in sorted(pairs.pairs):
        if a in table and b in table:
            sims.append(table.cosine(a, b))
        else:
            skipped += 1
    return _stats(sims, skipped)


def _unrank_pair(k: int, n: int) -> tuple[int, int]:
    """Map ``k`` in ``[0, n*(n-1)/2)`` to the k-th pair ``(i, j)``, ``i < j``, in lexicographic order."""
    # number of pairs with first index < i is i*(2n-i-1)/2
    lo, hi = 0, n - 1
    while lo < hi:
        mid = (lo + hi + 1) // 2
        if mid * (2 * n - mid - 1) // 2 <= k:
            lo = mid
        else:
            hi = mid - 1
    i = lo
    j = k - i * (2 * n - i - 1) // 2 + i + 1
    return i, j


def random_pairs(table: EmbeddingTable, n: int, seed: int) -> list[tuple[str, str]]:
    """``n`` distinct unordered word pairs, uniform over all pairs of the table."""
    v = len(table)
    if v < 2:
        raise InvalidN("need at least two words")
    total = v * (v - 1) // 2
    if n < 1 or n > total:
        raise InvalidN(f"n must be in [1, {total}], got {n}")
    rng = Xoshiro256(seed)
    words = table.words
    out = []
    for k in rng.sample_indices(total, n):
        i, j = _unrank_pair(k, v)
        out.append((words[i], words[j]))
    return out


def random_pair_baseline(table: EmbeddingTable, n: int, seed: int) -> PairStats:
    sims = [table.cosine(a, b) for a, b in random_pairs(table, n, seed)]
    return _stats(sims, 0)


def homophone_rank(table: EmbeddingTable, w1: str, w2: str) -> int:
    """1-based position of ``w2`` in ``w1``'s similarity-descending neighbor list."""
    i = table.index(w1)
    j = table.index(w2)
    if i == j:
        raise ValueError("homophone_rank needs two different words")
    sims = table.similarities(w1)
    target = sims[j]
    words = table._word_array
    better = (sims > target) | ((sims == target) & (words < w2))
    better[i] = False
    return int(np.count_nonzero(better)) + 1


class Verdict(enum.Enum):
    PHONETICALLY_CONSISTENT = "PhoneticallyConsistent"
    PHONETICALLY_INCONSISTENT = "PhoneticallyInconsistent"
    INCONCLUSIVE = "Inconclusive"


def verdict_for(homophone_mean: float, random_mean: float, margin: float) -> Verdict:
    if margin <= 0:
        raise ValueError("margin must be positive")
    if homophone_mean >= random_mean + margin:
        return Verdict.PHONETICALLY_CONSISTENT
    if homophone_mean <= random_mean - margin:
        return Verdict.PHONETICALLY_INCONSISTENT
    return Verdict.INCONCLUSIVE


@dataclass(frozen=True)
class PairResult:
    word_a: str
    word_b: str
    similarity: float
    homophone_rank: int


@dataclass(frozen=True)
class ForensicReport:
    homophone: PairStats
    random_baseline: PairStats
    per_pair: tuple[PairResult, ...]
    verdict: Verdict
    margin: float
    seed: int
    n_random: int
    missing: tuple[tuple[str, str], ...] = field(default=())

    def summary_lines(self) -> list[str]:
        """Machine-readable ``key=value`` summary."""
        h, r = self.homophone, self.random_baseline
        return [
            f"verdict={self.verdict.value}",
            f"margin={self.margin!r}",
            f"seed={self.seed}",
            f"homophone_mean={h.mean:.6f}",
            f"homophone_std={h.std:.6f}",
            f"homophone_n_evaluated={h.n_evaluated}",
            f"homophone_n_skipped_oov={h.n_skipped_oov}",
            f"random_n={self.n_random}",
            f"random_mean={r.mean:.6f}",
            f"random_std={r.std:.6f}",
        ]

    def table_text(self) -> str:
        """Aligned human-readable summary and per-pair table."""
        h, r = self.homophone, self.random_baseline
        lines = [
            f"{'':<10}{'pairs':>8}{'mean':>10}{'std':>10}",
            f"{'homophone':<10}{h.n_evaluated:>8}{h.mean:>10.4f}{h.std:>10.4f}",
            f"{'random':<10}{r.n_evaluated:>8}{r.mean:>10.4f}{r.std:>10.4f}",
            f"verdict: {self.verdict.value} (margin {self.margin})",
            "",
        ]
        wa = max([len("word_a")] + [len(p.word_a) for p in self.per_pair])
        wb = max([len("word_b")] + [len(p.word_b) for p in self.per_pair])
        lines.append(f"{'word_a':<{wa}}  {'word_b':<{wb}}  {'similarity':>10}  {'rank':>8}")
        for p in self.per_pair:
            lines.append(f"{p.word_a:<{wa}}  {p.word_b:<{wb}}  {p.similarity:>10.4f}  {p.homophone_rank:>8}")
        return "\n".join(lines) + "\n"

    def pairs_csv(self) -> str:
        rows = ["word_a,word_b,similarity,homophone_rank"]
        rows += [f"{p.word_a},{p.word_b},{p.similarity:.6f},{p.homophone_rank}" for p in self.per_pair]
        return "\n".join(rows) + "\n"


def forensic_report(
    table: EmbeddingTable,
    pairs: HomophonePairSet,
    n_random: int,
    seed: int,
    margin: float = DEFAULT_MARGIN,
) -> ForensicReport:
    if margin <= 0:
        raise ValueError("margin must be positive")
    homo = pair_similarity_stats(table, pairs)
    rand = random_pair_baseline(table, n_random, seed)
    per_pair = []
    missing = []
    for a, b in pairs:
        if a in table and b in table:
            per_pair.append(PairResult(a, b, table.cosine(a, b), homophone_rank(table, a, b)))
        else:
            missing.append((a, b))
    return ForensicReport(
        homophone=homo,
        random_baseline=rand,
        per_pair=tuple(per_pair),
        verdict=verdict_for(homo.mean, rand.mean, margin),
        margin=margin,
        seed=seed,
        n_random=n_random,
        missing=tuple(missing),
    )


__all__ = [
    "DEFAULT_MARGIN",
    "ForensicReport",
    "HomophonePairSet",
    "PairResult",
    "PairStats",
    "Verdict",
    "WordNotFound",
    "forensic_report",
    "homophone_rank",
    "load_homophones",
    "load_homophones_file",
    "pair_similarity_stats",
    "random_pair_baseline",
    "random_pairs",
    "verdict_for",
]
