"""Word-similarity benchmarks scored by tie-corrected Spearman correlation."""

from __future__ import annotations

import io
import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import TextIO

import numpy as np

from .embed_store import EmbeddingTable
from .errors import DegenerateRanks, FormatError, InsufficientPairs, S2VError, UnknownBenchmark

log = logging.getLogger(__name__)

BENCHMARK_NAMES = (
    "MC-30",
    "MEN",
    "MTurk-287",
    "MTurk-771",
    "RG-65",
    "Rare-Word",
    "SimLex-999",
    "SimVerb-3500",
    "Verb-143",
    "WS-353",
    "WS-353-REL",
    "WS-353-SIM",
    "YP-130",
)

_BY_KEY = {n.lower(): n for n in BENCHMARK_NAMES}


def canonical_name(name: str) -> str:
    try:
        return _BY_KEY[name.lower()]
    except KeyError:
        raise UnknownBenchmark(f"unknown benchmark {name!r}; expected one of {', '.join(BENCHMARK_NAMES)}") from None


@dataclass(frozen=True)
class WordPairBenchmark:
    name: str
    pairs: tuple[tuple[str, str, float], ...]

    def __post_init__(self):
        if not self.pairs:
            raise ValueError(f"benchmark {self.name} has no pairs")
        for w1, w2, g in self.pairs:
            if not math.isfinite(g):
                raise ValueError(f"non-finite gold score for ({w1}, {w2})")

    def __len__(self):
        return len(self.pairs)

    def dumps(self) -> str:
        return "".join(f"{w1}\t{w2}\t{g!r}\n" for w1, w2, g in self.pairs)


@dataclass(frozen=True)
class BenchmarkResult:
    name: str
    rho: float
    n_used: int
    n_oov: int
    error: str | None = None

    def csv_row(self) -> str:
        return f"{self.name},{self.rho:.6f},{self.n_used},{self.n_oov}"


def load_benchmark(name: str, source: TextIO | str) -> WordPairBenchmark:
    """Parse ``word1<sep>word2<sep>score`` lines (tab, comma or whitespace).

    A first line whose score field is non-numeric is taken as a header.
    """
    name = canonical_name(name)
    if isinstance(source, str):
        source = io.StringIO(source)
    pairs = []
    first = True
    for lineno, raw in enumerate(source, start=1):
        line = raw.strip()
        if not line:
            continue
        if "\t" in line:
            parts = line.split("\t")
        elif "," in line:
            parts = line.split(",")
        else:
            parts = line.split()
        parts = [p.strip() for p in parts]
        if len(parts) < 3:
            raise FormatError(lineno, "expected word1, word2, score")
        try:
            score = float(parts[2])
        except ValueError:
            if first:
                first = False
                continue
            raise FormatError(lineno, f"non-numeric score {parts[2]!r}") from None
        first = False
        if not math.isfinite(score):
            raise FormatError(lineno, "non-finite score")
        if not parts[0] or not parts[1]:
            raise FormatError(lineno, "empty word")
        pairs.append((parts[0].lower(), parts[1].lower(), score))
    if not pairs:
        raise FormatError(0, "no pairs")
    return WordPairBenchmark(name, tuple(pairs))


def find_benchmark_files(directory) -> dict[str, Path]:
    """Map canonical benchmark names to files whose stem names them."""
    d = Path(directory)
    if not d.is_dir():
        raise FileNotFoundError(directory)
    found = {}
    for p in sorted(d.iterdir()):
        if not p.is_file():
            continue
        key = p.name.split(".")[0].lower()
        if key in _BY_KEY:
            found[_BY_KEY[key]] = p
        else:
            log.warning("skipping %s: not a known benchmark name", p.name)
    return {n: found[n] for n in BENCHMARK_NAMES if n in found}


def load_benchmark_dir(directory) -> list[WordPairBenchmark]:
    out = []
    for name, path in find_benchmark_files(directory).items():
        with open(path, encoding="utf-8") as fh:
            out.append(load_benchmark(name, fh))
    return out


def doubled_average_ranks(values) -> np.ndarray:
    """Twice the fractional (average) rank of each value, as exact integers.

    A tie group occupying sorted positions ``s..e`` (1-based) gets average
    rank ``(s + e) / 2``; doubling keeps everything integral.
    """
    x = np.asarray(values, dtype=np.float64)
    n = x.shape[0]
    order = np.argsort(x, kind="stable")
    xs = x[order]
    starts = np.flatnonzero(np.r_[True, xs[1:] != xs[:-1]])
    ends = np.r_[starts[1:], n] - 1
    doubled_group = (starts + 1) + (ends + 1)
    sizes = ends - starts + 1
    ranks = np.empty(n, dtype=np.int64)
    ranks[order] = np.repeat(doubled_group, sizes)
    return ranks


def spearman(xs, ys) -> float:
    """Pearson correlation of average ranks.

    The rank moments are exact integers; only the final square root and
    division round, so symmetry and rank invariance hold exactly.
    """
    x = np.asarray(xs, dtype=np.float64)
    y = np.asarray(ys, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("xs and ys must be 1-d sequences of equal length")
    n = x.shape[0]
    if n < 2:
        raise ValueError("need at least two observations")
    if np.any(np.isnan(x)) or np.any(np.isnan(y)):
        raise ValueError("NaN in input")
    rx = doubled_average_ranks(x)
    ry = doubled_average_ranks(y)
    sx, sy = int(rx.sum()), int(ry.sum())
    num = n * int(np.dot(rx, ry)) - sx * sy
    dx = n * int(np.dot(rx, rx)) - sx * sx
    dy = n * int(np.dot(ry, ry)) - sy * sy
    if dx == 0 or dy == 0:
        raise DegenerateRanks("constant input has no rank variation")
    r = math.sqrt(Fraction(num * num, dx * dy))
    return math.copysign(min(r, 1.0), num) if num else 0.0


def evaluate(table: EmbeddingTable, benchmark: WordPairBenchmark) -> BenchmarkResult:
    sims = []
    golds = []
    oov = 0
    for w1, w2, g in benchmark.pairs:
        if w1 in table and w2 in table:
            sims.append(table.cosine(w1, w2))
            golds.append(g)
        else:
            oov += 1
    if len(sims) < 2:
        raise InsufficientPairs(f"{benchmark.name}: only {len(sims)} in-vocabulary pairs")
    return BenchmarkResult(benchmark.name, spearman(sims, golds), len(sims), oov)


def evaluate_suite(table: EmbeddingTable, benchmarks) -> list[BenchmarkResult]:
    results = []
    for b in benchmarks:
        try:
            results.append(evaluate(table, b))
        except S2VError as exc:
            log.warning("%s: %s", b.name, exc)
            n_oov = sum(1 for w1, w2, _ in b.pairs if w1 not in table or w2 not in table)
            results.append(BenchmarkResult(b.name, math.nan, len(b) - n_oov, n_oov, error=str(exc)))
    return results


def suite_csv(results) -> str:
    return "name,rho,n_used,n_oov\n" + "".join(r.csv_row() + "\n" for r in results)


def suite_table(results) -> str:
    w = max([len("benchmark")] + [len(r.name) for r in results])
    lines = [f"{'benchmark':<{w}}  {'rho':>9}  {'used':>6}  {'oov':>6}"]
    for r in results:
        lines.append(f"{r.name:<{w}}  {r.rho:>9.4f}  {r.n_used:>6}  {r.n_oov:>6}")
    return "\n".join(lines) + "\n"
