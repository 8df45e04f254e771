"""``s2vaudit`` command line: forensics reports, vocabulary audits, benchmark
suites, desk-scale training, MDS coordinates and gradient checks.

Exit codes: 0 success, 1 computation error, 2 usage or I/O error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from importlib import resources
from pathlib import Path

import numpy as np

from . import errors
from .embed_store import load_embeddings_file, save_embeddings_file
from .homophones import DEFAULT_MARGIN, HomophonePairSet, forensic_report, load_homophones_file, save_homophones
from .rng import Xoshiro256

log = logging.getLogger("s2vaudit")

EXIT_OK, EXIT_COMPUTE, EXIT_USAGE = 0, 1, 2

# errors caused by bad input rather than by the computation itself
_USAGE_ERRORS = (
    errors.FormatError,
    errors.DuplicateWord,
    errors.UnknownBenchmark,
    errors.InvalidConfig,
    errors.InvalidPairs,
    errors.TooFewPoints,
    errors.CheckpointError,
)


class UsageError(Exception):
    pass


def _write(path: Path, text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _require_file(path, what: str) -> Path:
    p = Path(path)
    if not p.is_file():
        raise UsageError(f"{what} not found: {p}")
    return p


def _require_dir(path, what: str) -> Path:
    p = Path(path)
    if not p.is_dir():
        raise UsageError(f"{what} is not a directory: {p}")
    return p


def _say(args, text: str) -> None:
    if not args.quiet:
        print(text)


def default_homophones_path() -> Path:
    return Path(str(resources.files("s2vaudit") / "data" / "homophones.txt"))


# ------------------------------------------------------------------ inspect


def cmd_inspect(args) -> int:
    emb_path = _require_file(args.embeddings, "embedding file")
    pairs_path = _require_file(args.homophones or default_homophones_path(), "homophone list")
    if args.margin <= 0:
        raise UsageError("--margin must be positive")
    table = load_embeddings_file(emb_path)
    pairs = load_homophones_file(pairs_path)
    report = forensic_report(table, pairs, args.random_n, args.seed, args.margin)
    out = args.out_dir
    _write(out / "report.txt", "\n".join(report.summary_lines()) + "\n")
    _write(out / "report_table.txt", report.table_text())
    _write(out / "pairs.csv", report.pairs_csv())
    _say(args, "\n".join(report.summary_lines()))
    return EXIT_OK


# ------------------------------------------------------------------ vocab


def cmd_vocab(args) -> int:
    from .simbench import load_benchmark_dir
    from .vocab_audit import benchmark_oov, count_paths, filter_min_count, save_vocab_file, vocab_diff

    emb_path = _require_file(args.embeddings, "embedding file")
    paths = []
    for t in args.transcripts:
        p = Path(t)
        if not p.exists():
            raise UsageError(f"transcripts not found: {p}")
        paths.append(p)
    bench_dir = _require_dir(args.benchmarks, "benchmark directory") if args.benchmarks else None
    if args.min_count < 1:
        raise UsageError("--min-count must be >= 1")

    reference = load_embeddings_file(emb_path).vocabulary()
    freq = count_paths(paths)
    corpus_vocab = filter_min_count(freq, args.min_count)
    diff = vocab_diff(reference, corpus_vocab)
    out = args.out_dir
    save_vocab_file(diff.missing, out / "missing.txt")
    lines = [
        f"reference_size={diff.reference_size}",
        f"total_tokens={freq.total_tokens}",
        f"distinct_words={len(freq.counts)}",
        f"min_count={args.min_count}",
        f"corpus_size={diff.corpus_size}",
        f"missing={len(diff.missing)}",
    ]
    if bench_dir is not None:
        rows = ["name,pairs,not_found"]
        for b in load_benchmark_dir(bench_dir):
            n_oov = benchmark_oov(b, corpus_vocab)
            rows.append(f"{b.name},{len(b.pairs)},{n_oov}")
            lines.append(f"not_found[{b.name}]={n_oov}")
        _write(out / "benchmark_oov.csv", "\n".join(rows) + "\n")
    _write(out / "vocab_report.txt", "\n".join(lines) + "\n")
    _say(args, f"Reference: {diff.reference_size}  Corpus (count >= {args.min_count}): {diff.corpus_size}  Missing: {len(diff.missing)}")
    return EXIT_OK


# ------------------------------------------------------------------ bench


def cmd_bench(args) -> int:
    from .simbench import evaluate_suite, load_benchmark_dir, suite_csv, suite_table

    emb_path = _require_file(args.embeddings, "embedding file")
    bench_dir = _require_dir(args.benchmarks, "benchmark directory")
    benchmarks = load_benchmark_dir(bench_dir)
    if not benchmarks:
        raise UsageError(f"no benchmark files found in {bench_dir}")
    table = load_embeddings_file(emb_path)
    results = evaluate_suite(table, benchmarks)
    _write(args.out_dir / "bench.csv", suite_csv(results))
    _write(args.out_dir / "bench_table.txt", suite_table(results))
    _say(args, suite_table(results).rstrip("\n"))
    return EXIT_OK


# ------------------------------------------------------------------ train


def _synthetic_kwargs(args) -> dict:
    return {
        "vocab_size": args.vocab,
        "homophone_fraction": args.homophone_fraction,
        "sentences": args.sentences,
        "sentence_len": args.sentence_len,
        "noise_std": args.noise_std,
        "seed": args.seed,
    }


def _load_corpus(args):
    """Corpus from ``--corpus`` or the ``--synthetic`` generator flags."""
    from .speech2vec.corpus import make_synthetic_corpus, read_corpus_file

    if args.corpus and args.synthetic:
        raise UsageError("use either --corpus or --synthetic, not both")
    if args.corpus:
        return read_corpus_file(_require_file(args.corpus, "corpus file")), None
    if not args.synthetic:
        raise UsageError("need --corpus PATH or --synthetic")
    kw = _synthetic_kwargs(args)
    return make_synthetic_corpus(**kw), kw


def _train_config(args):
    from .speech2vec.train import TrainConfig

    return TrainConfig.desk(
        window=args.window,
        fixed_frames=args.fixed_frames,
        batch_size=args.batch_size,
        epochs=args.epochs,
        optimizer=args.optimizer,
        learning_rate=args.lr,
        min_count=args.min_count,
        seed=args.seed,
        embedding_dim=args.dim,
        encoder_hidden=args.hidden,
        pooling=args.pooling,
        shared_decoder=args.shared_decoder,
        feed_embedding=args.feed_embedding,
        eval_every=args.eval_every,
    )


def cmd_train(args) -> int:
    from .simbench import BENCHMARK_NAMES, load_benchmark_dir
    from .speech2vec.corpus import make_synthetic_benchmarks, write_corpus_file
    from .speech2vec.train import extract_word_embeddings, metrics_csv, train

    bench_dir = _require_dir(args.benchmarks, "benchmark directory") if args.benchmarks else None
    config = _train_config(args)
    corpus, synthetic = _load_corpus(args)
    out = args.out_dir
    meta = {"train": config.to_dict(), "synthetic": synthetic, "corpus": str(args.corpus) if args.corpus else None}
    _write(out / "config.json", json.dumps(meta, indent=2, sort_keys=True) + "\n")
    _say(
        args,
        f"window={config.window} dim={config.embedding_dim} lr={config.learning_rate} "
        f"epochs={config.epochs} batch_size={config.batch_size} optimizer={config.optimizer} "
        f"min_count={config.min_count} seed={config.seed}",
    )
    if synthetic is not None:
        _write(out / "homophones.txt", _pairs_text(corpus.homophone_pairs))
    if args.save_corpus:
        write_corpus_file(corpus, out / "corpus.txt")

    benchmarks = None
    if config.eval_every:
        if bench_dir is not None:
            benchmarks = load_benchmark_dir(bench_dir)
        elif corpus.topics:
            benchmarks = make_synthetic_benchmarks(corpus, args.seed)

    def progress(row, _params):
        log.info("epoch %d/%d loss %.6f", row.epoch, config.epochs, row.loss)

    params, metrics = train(config, corpus, checkpoint_dir=out / "checkpoints", benchmarks=benchmarks, on_epoch=progress)
    if config.epochs == 0:
        return EXIT_OK
    names = [b.name for b in benchmarks] if benchmarks else []
    if benchmarks and set(names) <= set(BENCHMARK_NAMES):
        names = [n for n in BENCHMARK_NAMES if n in names]
    _write(out / "metrics.csv", metrics_csv(metrics, names))
    table = extract_word_embeddings(params, config.model_config(), corpus.filter_min_count(config.min_count), config.fixed_frames)
    save_embeddings_file(table, out / "embeddings.txt")
    _say(args, f"final loss {metrics[-1].loss:.6f}; {len(table)} word embeddings written")
    return EXIT_OK


def _pairs_text(pairs) -> str:
    import io

    buf = io.StringIO()
    save_homophones(HomophonePairSet(tuple(pairs)), buf)
    return buf.getvalue()


# ------------------------------------------------------------------ mds


def _word_list(args) -> list[str]:
    words = [w.lower() for w in (args.words or [])]
    if args.word_file:
        path = _require_file(args.word_file, "word list")
        for line in path.read_text(encoding="utf-8").splitlines():
            line = line.strip()
            if line and not line.startswith("#"):
                words.extend(w.lower() for w in line.replace(",", " ").split())
    seen = []
    for w in words:
        if w not in seen:
            seen.append(w)
    if not seen:
        raise UsageError("need at least one word (--words or --word-file)")
    return seen


def _occurrence_points(args, words):
    """Encode up to ``--per-word-cap`` sampled occurrences of each word."""
    from .speech2vec.corpus import make_synthetic_corpus, pad_or_truncate, read_corpus_file
    from .speech2vec.model import encode_batch
    from .speech2vec.train import load_checkpoint

    if args.run:
        run = _require_dir(args.run, "run directory")
        meta = json.loads(_require_file(run / "config.json", "run config").read_text(encoding="utf-8"))
        cks = sorted((run / "checkpoints").glob("epoch_*.ckpt"))
        if not cks:
            raise UsageError(f"no checkpoints in {run / 'checkpoints'}")
        ck_path = cks[-1]
        if meta.get("synthetic"):
            corpus = make_synthetic_corpus(**meta["synthetic"])
        elif meta.get("corpus"):
            corpus = read_corpus_file(_require_file(meta["corpus"], "corpus file"))
        else:
            raise UsageError("run config names no corpus")
    else:
        ck_path = _require_file(args.checkpoint, "checkpoint")
        corpus = read_corpus_file(_require_file(args.corpus, "corpus file"))
    params, config, _ = load_checkpoint(ck_path)
    occurrences = {w: [] for w in words}
    for sent in corpus.sentences:
        for sw in sent:
            if sw.label in occurrences:
                occurrences[sw.label].append(sw)
    missing = [w for w, occ in occurrences.items() if not occ]
    if missing:
        raise UsageError(f"words not in corpus: {' '.join(missing)}")
    rng = Xoshiro256(args.seed)
    labels, frames = [], []
    for w in words:
        occ = occurrences[w]
        if len(occ) > args.per_word_cap:
            picked = sorted(rng.sample_indices(len(occ), args.per_word_cap))
        else:
            picked = range(len(occ))
        for k in picked:
            labels.append((w, k))
            frames.append(pad_or_truncate(occ[k].frames, config.fixed_frames))
    X = np.stack([f for f, _ in frames])
    L = np.array([n for _, n in frames])
    return labels, encode_batch(params, config.model_config(), X, L)


def cmd_mds(args) -> int:
    from .mds import classical_mds

    words = _word_list(args)
    if args.per_word_cap < 1:
        raise UsageError("--per-word-cap must be >= 1")
    modes = sum(bool(m) for m in (args.embeddings, args.run, args.corpus or args.checkpoint))
    if modes != 1:
        raise UsageError("use exactly one of --embeddings, --run, or --corpus with --checkpoint")
    if args.embeddings:
        table = load_embeddings_file(_require_file(args.embeddings, "embedding file"))
        absent = [w for w in words if w not in table]
        if absent:
            raise UsageError(f"words not in table: {' '.join(absent)}")
        labels = [(w, 0) for w in words]
        points = np.stack([table.vectors[table.index(w)] for w in words])
    else:
        if not args.run and not (args.corpus and args.checkpoint):
            raise UsageError("--corpus and --checkpoint go together")
        labels, points = _occurrence_points(args, words)
    result = classical_mds(points, labels=labels)
    _write(args.out_dir / "mds.csv", result.to_csv())
    _say(args, f"{len(labels)} points written to {args.out_dir / 'mds.csv'}")
    return EXIT_OK


# ------------------------------------------------------------------ gradcheck


def cmd_gradcheck(args) -> int:
    from .speech2vec.gradcheck import grad_check, tiny_problem

    if args.epsilon <= 0:
        raise UsageError("--epsilon must be positive")
    rows = ["seed,max_rel_err"]
    worst = 0.0
    for s in range(args.seed, args.seed + args.models):
        params, cfg, sample = tiny_problem(
            s,
            embedding_dim=args.dim,
            fixed_frames=args.frames,
            window=args.window,
            n_words=args.words,
            pooling=args.pooling,
            shared_decoder=args.shared_decoder,
            feed_embedding=args.feed_embedding,
        )
        err = grad_check(params, cfg, sample, args.epsilon)
        worst = max(worst, err)
        rows.append(f"{s},{err:.6e}")
        log.info("seed %d max relative error %.3e", s, err)
    _write(args.out_dir / "gradcheck.csv", "\n".join(rows) + "\n")
    ok = worst < args.tol
    _say(args, f"max relative error {worst:.3e} over {args.models} models: {'PASS' if ok else 'FAIL'} (tol {args.tol:g})")
    return EXIT_OK if ok else EXIT_COMPUTE


# ------------------------------------------------------------------ parser


def _add_model_flags(p, dim: int, window: int) -> None:
    p.add_argument("--window", type=int, default=window)
    p.add_argument("--dim", type=int, default=dim, help="embedding dimension")
    p.add_argument("--pooling", choices=("final", "mean"), default="final")
    p.add_argument("--shared-decoder", action="store_true")
    p.add_argument("--feed-embedding", action="store_true", help="feed the embedding to the decoder at every step")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS, help="seed for all randomness (default 0)")
    common.add_argument("--out-dir", type=Path, default=argparse.SUPPRESS, help="output directory (default: out)")
    common.add_argument("--quiet", action="store_true", default=argparse.SUPPRESS)

    parser = argparse.ArgumentParser(prog="s2vaudit", description=__doc__.split("\n\n")[0], parents=[common])
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = sub.add_parser("inspect", parents=[common], help="homophone forensics report for an embedding table")
    p.add_argument("embeddings")
    p.add_argument("--homophones", help="pair list (default: bundled list)")
    p.add_argument("--random-n", type=int, default=307)
    p.add_argument("--margin", type=float, default=DEFAULT_MARGIN)
    p.set_defaults(func=cmd_inspect)

    p = sub.add_parser("vocab", parents=[common], help="vocabulary of an embedding table vs transcripts")
    p.add_argument("embeddings")
    p.add_argument("transcripts", nargs="+", help="transcript files or directories")
    p.add_argument("--min-count", type=int, default=1)
    p.add_argument("--benchmarks", help="also count benchmark pairs not found in the corpus vocabulary")
    p.set_defaults(func=cmd_vocab)

    p = sub.add_parser("bench", parents=[common], help="word-similarity benchmark suite")
    p.add_argument("embeddings")
    p.add_argument("benchmarks", help="directory of benchmark files")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("train", parents=[common], help="train the skip-gram encoder-decoder")
    src = p.add_argument_group("corpus")
    src.add_argument("--corpus", help="spoken corpus file")
    src.add_argument("--synthetic", action="store_true", help="generate a synthetic corpus")
    src.add_argument("--vocab", type=int, default=100)
    src.add_argument("--homophone-fraction", type=float, default=0.1)
    src.add_argument("--sentences", type=int, default=1000)
    src.add_argument("--sentence-len", type=int, default=8)
    src.add_argument("--noise-std", type=float, default=0.1)
    src.add_argument("--save-corpus", action="store_true", help="also write corpus.txt")
    _add_model_flags(p, dim=50, window=3)
    p.add_argument("--hidden", type=int, default=50, help="encoder hidden size per direction")
    p.add_argument("--fixed-frames", type=int, default=20)
    p.add_argument("--epochs", type=int, default=50)
    p.add_argument("--batch-size", type=int, default=64)
    p.add_argument("--lr", type=float, default=0.001)
    p.add_argument("--optimizer", choices=("sgd", "adam"), default="sgd")
    p.add_argument("--min-count", type=int, default=4, help="drop words seen fewer times")
    p.add_argument("--eval-every", type=int, default=0, help="benchmark suite cadence in epochs (0: never)")
    p.add_argument("--benchmarks", help="benchmark directory for --eval-every (default: synthetic)")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("mds", parents=[common], help="2-D classical MDS coordinates")
    p.add_argument("--words", nargs="+")
    p.add_argument("--word-file")
    p.add_argument("--embeddings", help="one point per word from a table")
    p.add_argument("--run", help="training output directory (final checkpoint + its corpus)")
    p.add_argument("--corpus", help="spoken corpus file, with --checkpoint")
    p.add_argument("--checkpoint")
    p.add_argument("--per-word-cap", type=int, default=50)
    p.set_defaults(func=cmd_mds)

    p = sub.add_parser("gradcheck", parents=[common], help="finite-difference gradient check on small models")
    p.add_argument("--models", type=int, default=20)
    p.add_argument("--epsilon", type=float, default=1e-4)
    p.add_argument("--tol", type=float, default=1e-4)
    p.add_argument("--frames", type=int, default=4)
    p.add_argument("--words", type=int, default=3, help="words in each sample sentence")
    _add_model_flags(p, dim=4, window=1)
    p.set_defaults(func=cmd_gradcheck)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    args.seed = getattr(args, "seed", 0)
    args.out_dir = getattr(args, "out_dir", Path("out"))
    args.quiet = getattr(args, "quiet", False)
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO, format="%(message)s", stream=sys.stderr)
    try:
        args.out_dir.mkdir(parents=True, exist_ok=True)
        return args.func(args)
    except UsageError as e:
        print(f"s2vaudit: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except _USAGE_ERRORS as e:
        print(f"s2vaudit: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, UnicodeDecodeError) as e:
        print(f"s2vaudit: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (errors.S2VError, ArithmeticError) as e:
        print(f"s2vaudit: computation failed: {e}", file=sys.stderr)
        return EXIT_COMPUTE
    except ValueError as e:  # out-of-range option values rejected by the library
        print(f"s2vaudit: error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
