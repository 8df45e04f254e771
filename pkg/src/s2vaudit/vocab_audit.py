"""Vocabulary composition: transcript word counts, frequency filters, diffs."""

from __future__ import annotations

import io
import re
from collections import Counter
from collections.abc import Iterable
from dataclasses import dataclass
from pathlib import Path
from typing import TextIO

_UTTERANCE_ID = re.compile(r"^\d+-\d+-\d+$")


@dataclass(frozen=True)
class WordFrequency:
    counts: dict[str, int]
    total_tokens: int

    def merge(self, other: "WordFrequency") -> "WordFrequency":
        c = Counter(self.counts)
        c.update(other.counts)
        return WordFrequency(dict(c), self.total_tokens + other.total_tokens)

    def __len__(self):
        return len(self.counts)


@dataclass(frozen=True)
class VocabDiff:
    reference_size: int
    corpus_size: int
    missing: tuple[str, ...]


def count_words(transcripts: TextIO | str, strip_ids: bool = False) -> WordFrequency:
    """Count lowercased whitespace tokens, one sentence per line.

    With ``strip_ids`` a leading LibriSpeech utterance id (``123-456-0007``)
    is dropped from each line before counting.
    """
    if isinstance(transcripts, str):
        transcripts = io.StringIO(transcripts)
    counts: Counter[str] = Counter()
    total = 0
    for line in transcripts:
        tokens = line.lower().split()
        if strip_ids and tokens and _UTTERANCE_ID.match(tokens[0]):
            tokens = tokens[1:]
        counts.update(tokens)
        total += len(tokens)
    return WordFrequency(dict(counts), total)


def transcript_files(path) -> list[Path]:
    """Expand a file or a directory (searched for ``*.trans.txt``/``*.txt``) into sorted files."""
    p = Path(path)
    if p.is_file():
        return [p]
    if not p.is_dir():
        raise FileNotFoundError(path)
    found = sorted(p.rglob("*.trans.txt"))
    if not found:
        found = sorted(p.rglob("*.txt"))
    return found


def count_paths(paths: Iterable, strip_ids: bool | None = None) -> WordFrequency:
    """Count words over files/directories; ids stripped automatically for ``.trans.txt``."""
    freq = WordFrequency({}, 0)
    for path in paths:
        for f in transcript_files(path):
            strip = f.name.endswith(".trans.txt") if strip_ids is None else strip_ids
            with open(f, encoding="utf-8") as fh:
                freq = freq.merge(count_words(fh, strip_ids=strip))
    return freq


def filter_min_count(freq: WordFrequency, k: int) -> set[str]:
    if k < 1:
        raise ValueError("k must be >= 1")
    return {w for w, c in freq.counts.items() if c >= k}


def vocab_diff(reference: Iterable[str], corpus: Iterable[str]) -> VocabDiff:
    reference = set(reference)
    corpus = set(corpus)
    return VocabDiff(len(reference), len(corpus), tuple(sorted(reference - corpus)))


def benchmark_oov(benchmark, vocab) -> int:
    """Number of benchmark pairs with at least one word outside ``vocab``."""
    pairs = benchmark.pairs if hasattr(benchmark, "pairs") else benchmark
    return sum(1 for w1, w2, *_ in pairs if w1 not in vocab or w2 not in vocab)


def load_vocab(source: TextIO | str) -> set[str]:
    if isinstance(source, str):
        source = io.StringIO(source)
    return {line.strip().lower() for line in source if line.strip()}


def save_vocab(words: Iterable[str], sink: TextIO) -> None:
    for w in sorted(words):
        sink.write(w + "\n")


def save_vocab_file(words: Iterable[str], path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        save_vocab(words, fh)
