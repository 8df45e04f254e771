"""Embedding forensics and a desk-scale spoken-word skip-gram model."""

from .embed_store import EmbeddingTable, cosine, knn, load_embeddings, save_embeddings
from .homophones import (
    ForensicReport,
    HomophonePairSet,
    PairStats,
    Verdict,
    forensic_report,
    homophone_rank,
    pair_similarity_stats,
    random_pair_baseline,
)
from .mds import Mds2D, classical_mds
from .simbench import BenchmarkResult, WordPairBenchmark, evaluate, evaluate_suite, load_benchmark, spearman
from .vocab_audit import VocabDiff, WordFrequency, benchmark_oov, count_words, filter_min_count, vocab_diff

__version__ = "0.1.0"
