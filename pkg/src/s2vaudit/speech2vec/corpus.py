"""Spoken-word corpora: data types, text file format, synthetic generator."""

from __future__ import annotations

import io
import math
from collections import Counter
from dataclasses import dataclass, field
from typing import TextIO

import numpy as np

from ..errors import FormatError, InvalidConfig

N_MFCC = 13


@dataclass(frozen=True, eq=False)
class SpokenWord:
    label: str
    frames: np.ndarray  # (T, 13)

    def __post_init__(self):
        if not self.label:
            raise ValueError("empty label")
        f = np.asarray(self.frames, dtype=np.float64)
        if f.ndim != 2 or f.shape[0] < 1 or f.shape[1] != N_MFCC:
            raise ValueError(f"frames must be (T>=1, {N_MFCC}), got {f.shape}")
        object.__setattr__(self, "frames", f)

    @property
    def n_frames(self) -> int:
        return self.frames.shape[0]


@dataclass
class SpokenCorpus:
    sentences: list[list[SpokenWord]]
    homophone_pairs: list[tuple[str, str]] = field(default_factory=list)
    topics: dict[str, int] = field(default_factory=dict)
    unigram_target: dict[str, float] = field(default_factory=dict)

    @property
    def vocabulary(self) -> Counter:
        return Counter(w.label for s in self.sentences for w in s)

    def n_tokens(self) -> int:
        return sum(len(s) for s in self.sentences)

    def filter_min_count(self, min_count: int) -> "SpokenCorpus":
        """Drop occurrences of words seen fewer than ``min_count`` times."""
        counts = self.vocabulary
        keep = {w for w, c in counts.items() if c >= min_count}
        sents = [[w for w in s if w.label in keep] for s in self.sentences]
        sents = [s for s in sents if s]
        pairs = [(a, b) for a, b in self.homophone_pairs if a in keep and b in keep]
        return SpokenCorpus(sents, pairs, self.topics, self.unigram_target)


def pad_or_truncate(frames, fixed_frames: int) -> tuple[np.ndarray, int]:
    """Zero-pad or cut a (T, 13) sequence to ``fixed_frames`` rows."""
    if fixed_frames < 1:
        raise ValueError("fixed_frames must be >= 1")
    f = np.asarray(frames, dtype=np.float64)
    T = f.shape[0]
    if T >= fixed_frames:
        return f[:fixed_frames].copy(), fixed_frames
    out = np.zeros((fixed_frames, f.shape[1]))
    out[:T] = f
    return out, T


def write_corpus(corpus: SpokenCorpus, sink: TextIO) -> None:
    for sent in corpus.sentences:
        for w in sent:
            sink.write(f"WORD {w.label} {w.n_frames}\n")
            for row in w.frames.tolist():
                sink.write(",".join(repr(x) for x in row))
                sink.write("\n")
        sink.write("\n")


def dumps_corpus(corpus: SpokenCorpus) -> str:
    buf = io.StringIO()
    write_corpus(corpus, buf)
    return buf.getvalue()


def read_corpus(source: TextIO | str) -> SpokenCorpus:
    """Parse ``WORD <label> <T>`` blocks; a blank line ends a sentence."""
    if isinstance(source, str):
        source = io.StringIO(source)
    sentences: list[list[SpokenWord]] = []
    current: list[SpokenWord] = []
    lines = iter(enumerate(source, start=1))
    for lineno, raw in lines:
        line = raw.strip()
        if not line:
            if current:
                sentences.append(current)
                current = []
            continue
        parts = line.split()
        if len(parts) != 3 or parts[0] != "WORD":
            raise FormatError(lineno, "expected 'WORD <label> <T>'")
        try:
            T = int(parts[2])
        except ValueError:
            raise FormatError(lineno, "frame count is not an integer") from None
        if T < 1:
            raise FormatError(lineno, "frame count must be >= 1")
        rows = []
        for _ in range(T):
            try:
                fl, fraw = next(lines)
            except StopIteration:
                raise FormatError(lineno, "truncated word block") from None
            vals = fraw.strip().split(",")
            if len(vals) != N_MFCC:
                raise FormatError(fl, f"expected {N_MFCC} coefficients")
            try:
                rows.append([float(v) for v in vals])
            except ValueError:
                raise FormatError(fl, "non-numeric coefficient") from None
        current.append(SpokenWord(parts[1].lower(), np.array(rows)))
    if current:
        sentences.append(current)
    return SpokenCorpus(sentences)


def read_corpus_file(path) -> SpokenCorpus:
    with open(path, encoding="utf-8") as fh:
        return read_corpus(fh)


def write_corpus_file(corpus: SpokenCorpus, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        write_corpus(corpus, fh)


_CONSONANTS = "bdfgklmnprstvz"
_VOWELS = "aeiou"


def _make_labels(rng: np.random.Generator, n: int) -> list[str]:
    labels: list[str] = []
    seen: set[str] = set()
    while len(labels) < n:
        k = int(rng.integers(2, 4))
        w = "".join(_CONSONANTS[rng.integers(len(_CONSONANTS))] + _VOWELS[rng.integers(len(_VOWELS))] for _ in range(k))
        if w not in seen:
            seen.add(w)
            labels.append(w)
    return labels


def make_synthetic_corpus(
    vocab_size: int = 100,
    homophone_fraction: float = 0.1,
    sentences: int = 5000,
    sentence_len: int = 8,
    noise_std: float = 0.1,
    seed: int = 0,
    n_topics: int | None = None,
    topic_weight: float = 0.8,
    min_frames: int = 6,
    max_frames: int = 14,
) -> SpokenCorpus:
    """Generate a seeded spoken corpus with homophones and topical context.

    Every word type gets a base frame sequence; ``round(homophone_fraction *
    vocab_size)`` pairs of types share one base under two spellings and sit
    in different topics. Each sentence picks a topic; each token comes from
    that topic with probability ``topic_weight``, otherwise from the whole
    vocabulary, both weighted by a Zipf-like prior. Occurrences add
    Gaussian noise of std ``noise_std`` to the base frames.
    """
    if vocab_size < 4:
        raise InvalidConfig("vocab_size must be >= 4")
    if not 0.0 <= homophone_fraction <= 0.5:
        raise InvalidConfig("homophone_fraction must be in [0, 0.5]")
    if sentences < 1 or sentence_len < 1:
        raise InvalidConfig("sentences and sentence_len must be >= 1")
    if noise_std < 0 or not math.isfinite(noise_std):
        raise InvalidConfig("noise_std must be a finite non-negative number")
    if not 0.0 <= topic_weight <= 1.0:
        raise InvalidConfig("topic_weight must be in [0, 1]")
    if not 1 <= min_frames <= max_frames:
        raise InvalidConfig("need 1 <= min_frames <= max_frames")
    if n_topics is None:
        n_topics = max(2, vocab_size // 20)
    if n_topics < 2:
        raise InvalidConfig("n_topics must be >= 2")

    rng = np.random.Generator(np.random.PCG64(seed))
    labels = _make_labels(rng, vocab_size)
    n_pairs = int(round(homophone_fraction * vocab_size))

    topic = rng.permutation(np.arange(vocab_size) % n_topics)
    # words 2k and 2k+1 (k < n_pairs) are homophones: separate their topics
    for k in range(n_pairs):
        a, b = 2 * k, 2 * k + 1
        if topic[a] == topic[b]:
            topic[b] = (topic[b] + 1 + rng.integers(n_topics - 1)) % n_topics

    n_bases = vocab_size - n_pairs
    base_of = np.empty(vocab_size, dtype=np.int64)
    for k in range(n_pairs):
        base_of[2 * k] = base_of[2 * k + 1] = k
    base_of[2 * n_pairs :] = np.arange(n_pairs, n_bases)
    bases = []
    for _ in range(n_bases):
        T = int(rng.integers(min_frames, max_frames + 1))
        raw = rng.normal(0.0, 1.0, size=(T + 1, N_MFCC))
        bases.append(0.5 * (raw[1:] + raw[:-1]))

    prior = 1.0 / (1.0 + rng.permutation(vocab_size)) ** 0.8
    global_p = prior / prior.sum()
    topic_p = []
    for z in range(n_topics):
        w = np.where(topic == z, prior, 0.0)
        topic_p.append(w / w.sum())
    target = topic_weight * np.mean(topic_p, axis=0) + (1.0 - topic_weight) * global_p

    cdf_global = np.cumsum(global_p)
    cdf_topic = [np.cumsum(p) for p in topic_p]
    out_sents = []
    for _ in range(sentences):
        z = int(rng.integers(n_topics))
        use_topic = rng.random(sentence_len) < topic_weight
        u = rng.random(sentence_len)
        sent = []
        for pos in range(sentence_len):
            cdf = cdf_topic[z] if use_topic[pos] else cdf_global
            wi = min(int(np.searchsorted(cdf, u[pos] * cdf[-1], side="right")), vocab_size - 1)
            base = bases[base_of[wi]]
            frames = base + rng.normal(0.0, noise_std, size=base.shape) if noise_std > 0 else base
            sent.append(SpokenWord(labels[wi], frames))
        out_sents.append(sent)

    return SpokenCorpus(
        out_sents,
        homophone_pairs=[(labels[2 * k], labels[2 * k + 1]) for k in range(n_pairs)],
        topics={labels[i]: int(topic[i]) for i in range(vocab_size)},
        unigram_target={labels[i]: float(target[i]) for i in range(vocab_size)},
    )


_BENCH_SIZES = {
    "MC-30": 30,
    "MEN": 3000,
    "MTurk-287": 287,
    "MTurk-771": 771,
    "RG-65": 65,
    "Rare-Word": 2034,
    "SimLex-999": 999,
    "SimVerb-3500": 3500,
    "Verb-143": 143,
    "WS-353": 353,
    "WS-353-REL": 252,
    "WS-353-SIM": 203,
    "YP-130": 130,
}


def make_synthetic_benchmarks(corpus: SpokenCorpus, seed: int = 0):
    """Thirteen topic-based similarity benchmarks over a synthetic vocabulary.

    Gold scores are 8 for same-topic pairs and 2 otherwise plus seeded
    noise, rounded to one decimal so ties occur as in human-rated sets.
    """
    from ..simbench import BENCHMARK_NAMES, WordPairBenchmark

    words = sorted(corpus.topics)
    n = len(words)
    if n < 2:
        raise InvalidConfig("corpus carries no topic metadata")
    all_pairs = [(words[i], words[j]) for i in range(n) for j in range(i + 1, n)]
    rng = np.random.Generator(np.random.PCG64(seed))
    out = []
    for name in BENCHMARK_NAMES:
        size = min(_BENCH_SIZES[name], len(all_pairs))
        idx = rng.choice(len(all_pairs), size=size, replace=False)
        pairs = []
        for k in idx.tolist():
            a, b = all_pairs[k]
            base = 8.0 if corpus.topics[a] == corpus.topics[b] else 2.0
            gold = round(base + float(rng.normal(0.0, 1.0)), 1)
            pairs.append((a, b, gold))
        out.append(WordPairBenchmark(name, tuple(pairs)))
    return out
