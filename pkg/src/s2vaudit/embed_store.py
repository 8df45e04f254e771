"""Word-embedding tables: text-format IO, cosine similarity, exact k-NN."""

from __future__ import annotations

import io
from collections.abc import Iterable, Mapping
from typing import TextIO

import numpy as np

from .errors import DegenerateVector, DuplicateWord, FormatError, InvalidK, WordNotFound


def _is_header(tokens: list[str]) -> bool:
    if len(tokens) != 2:
        return False
    try:
        int(tokens[0])
        int(tokens[1])
    except ValueError:
        return False
    return True


class EmbeddingTable:
    """Immutable word -> vector map with unit-normalized rows cached.

    Row order is insertion (file) order. Similarities are dot products of
    the cached unit rows, reduced with numpy's row-wise sum so a single
    pair and a full scan produce bit-identical values. Zero rows stay zero
    in the unit cache: they score 0.0 in scans and raise
    :class:`DegenerateVector` when queried directly.
    """

    def __init__(self, words: Iterable[str], vectors):
        words = list(words)
        vectors = np.array(vectors, dtype=np.float64)
        if vectors.ndim != 2 or vectors.shape[0] != len(words):
            raise ValueError("vectors must be a (len(words), dim) array")
        if vectors.shape[1] < 1:
            raise ValueError("dim must be positive")
        index: dict[str, int] = {}
        for i, w in enumerate(words):
            if not w:
                raise ValueError("empty word")
            if w in index:
                raise DuplicateWord(w)
            index[w] = i
        self._words = tuple(words)
        self._index = index
        self._vectors = vectors
        self._vectors.flags.writeable = False
        # rescale rows by an exact power of two first so the squared norm
        # neither underflows nor overflows
        peak = np.max(np.abs(vectors), axis=1) if vectors.shape[1] else np.zeros(len(vectors))
        self._zero = peak == 0.0
        _, exps = np.frexp(np.where(self._zero, 1.0, peak))
        scaled = np.ldexp(vectors, -exps[:, None])
        norms = np.sqrt(np.sum(scaled * scaled, axis=1))
        unit = scaled / np.where(self._zero, 1.0, norms)[:, None]
        unit[self._zero] = 0.0
        unit.flags.writeable = False
        self._unit = unit
        self._word_array = np.array(self._words) if words else np.array([], dtype=str)

    @classmethod
    def from_dict(cls, entries: Mapping[str, Iterable[float]]) -> "EmbeddingTable":
        words = list(entries)
        return cls(words, [list(entries[w]) for w in words])

    @property
    def dim(self) -> int:
        return self._vectors.shape[1]

    @property
    def words(self) -> tuple[str, ...]:
        return self._words

    @property
    def vectors(self) -> np.ndarray:
        return self._vectors

    def __len__(self):
        return len(self._words)

    def __contains__(self, word):
        return word in self._index

    def __iter__(self):
        return iter(self._words)

    def __getitem__(self, word) -> np.ndarray:
        return self._vectors[self.index(word)]

    def __eq__(self, other):
        if not isinstance(other, EmbeddingTable):
            return NotImplemented
        return self._words == other._words and np.array_equal(self._vectors, other._vectors)

    def __repr__(self):
        return f"EmbeddingTable(n={len(self)}, dim={self.dim})"

    def index(self, word: str) -> int:
        try:
            return self._index[word]
        except KeyError:
            raise WordNotFound(word) from None

    def vocabulary(self) -> set[str]:
        return set(self._words)

    def unit(self, word: str) -> np.ndarray:
        i = self.index(word)
        if self._zero[i]:
            raise DegenerateVector(word)
        return self._unit[i]

    def cosine(self, w1: str, w2: str) -> float:
        i, j = self.index(w1), self.index(w2)
        for k, w in ((i, w1), (j, w2)):
            if self._zero[k]:
                raise DegenerateVector(w)
        i, j = min(i, j), max(i, j)
        # same reduction as the row-wise scan in similarities()
        val = float(np.sum((self._unit[i] * self._unit[j])[None, :], axis=1)[0])
        return min(1.0, max(-1.0, val))

    def similarities(self, word: str) -> np.ndarray:
        """Cosine of ``word`` against every row, in table order."""
        q = self.unit(word)
        sims = np.sum(self._unit * q, axis=1)
        return np.clip(sims, -1.0, 1.0)

    def ranked_neighbors(self, word: str) -> np.ndarray:
        """Row indices of all non-query words, most similar first.

        Ties are broken by ascending word string.
        """
        sims = self.similarities(word)
        order = np.lexsort((self._word_array, -sims))
        return order[order != self._index[word]]

    def knn(self, query: str, k: int) -> list[tuple[str, float]]:
        n = len(self)
        if query not in self._index:
            raise WordNotFound(query)
        if not isinstance(k, (int, np.integer)) or k < 1 or k >= n:
            raise InvalidK(f"k must be in [1, {n - 1}], got {k}")
        sims = self.similarities(query)
        order = self.ranked_neighbors(query)[:k]
        return [(self._words[i], float(sims[i])) for i in order]


def cosine(table: EmbeddingTable, w1: str, w2: str) -> float:
    return table.cosine(w1, w2)


def knn(table: EmbeddingTable, query: str, k: int) -> list[tuple[str, float]]:
    return table.knn(query, k)


def load_embeddings(source: TextIO | str) -> EmbeddingTable:
    """Parse the whitespace text format (optional ``count dim`` header).

    Words are lowercased. A header, when present, must be the first
    non-blank line; its declared count and dim are checked.
    """
    if isinstance(source, str):
        source = io.StringIO(source)
    words: list[str] = []
    rows: list[list[float]] = []
    seen: set[str] = set()
    dim = None
    declared = None
    first = True
    for lineno, raw in enumerate(source, start=1):
        tokens = raw.split()
        if not tokens:
            continue
        if first:
            first = False
            if _is_header(tokens):
                declared = (int(tokens[0]), int(tokens[1]))
                dim = declared[1]
                if dim < 1:
                    raise FormatError(lineno, "header dim must be positive")
                continue
        word = tokens[0].lower()
        if len(tokens) < 2:
            raise FormatError(lineno, "no vector components")
        try:
            vec = [float(t) for t in tokens[1:]]
        except ValueError:
            raise FormatError(lineno, "non-numeric vector component") from None
        if dim is None:
            dim = len(vec)
        elif len(vec) != dim:
            raise FormatError(lineno, f"expected {dim} components, got {len(vec)}")
        if word in seen:
            raise DuplicateWord(word)
        seen.add(word)
        words.append(word)
        rows.append(vec)
    if dim is None:
        raise FormatError(0, "no entries")
    if declared is not None and declared[0] != len(words):
        raise FormatError(0, f"header declares {declared[0]} entries, found {len(words)}")
    return EmbeddingTable(words, np.array(rows, dtype=np.float64).reshape(len(words), dim))


def load_embeddings_file(path) -> EmbeddingTable:
    with open(path, encoding="utf-8") as fh:
        return load_embeddings(fh)


def save_embeddings(table: EmbeddingTable, sink: TextIO | None = None, header: bool = True) -> str | None:
    """Write ``table`` using shortest round-trip float formatting.

    Returns the text when ``sink`` is None.
    """
    out = io.StringIO() if sink is None else sink
    if header:
        out.write(f"{len(table)} {table.dim}\n")
    vecs = table.vectors
    for i, w in enumerate(table.words):
        out.write(w)
        for x in vecs[i].tolist():
            out.write(" ")
            out.write(repr(x))
        out.write("\n")
    if sink is None:
        return out.getvalue()
    return None


def save_embeddings_file(table: EmbeddingTable, path, header: bool = True) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        save_embeddings(table, fh, header=header)
