"""Training loop, optimizers, checkpoints and per-word embedding extraction."""

from __future__ import annotations

import json
import logging
import math
from dataclasses import asdict, dataclass, fields
from pathlib import Path

import numpy as np

from ..embed_store import EmbeddingTable
from ..errors import CheckpointError, InvalidConfig, NumericalError
from ..rng import Xoshiro256, splitmix64
from .corpus import SpokenCorpus, pad_or_truncate
from .. import kernels
from .model import ModelConfig, encode_batch, init_params, loss_and_grad, make_batch

log = logging.getLogger(__name__)

CHECKPOINT_MAGIC = b"S2VCKPT\n"
CHECKPOINT_VERSION = 1


@dataclass(frozen=True)
class TrainConfig:
    """Training settings. Defaults are the full-scale values; see :meth:`desk`."""

    window: int = 3
    fixed_frames: int = 20
    batch_size: int = 4096
    epochs: int = 500
    optimizer: str = "sgd"
    learning_rate: float = 0.001
    min_count: int = 4
    seed: int = 0
    embedding_dim: int = 50
    encoder_hidden: int = 50
    pooling: str = "final"
    shared_decoder: bool = False
    feed_embedding: bool = False
    eval_every: int = 0

    def __post_init__(self):
        if self.window < 1:
            raise InvalidConfig("window must be >= 1")
        if self.fixed_frames < 1:
            raise InvalidConfig("fixed_frames must be >= 1")
        if self.batch_size < 1:
            raise InvalidConfig("batch_size must be >= 1")
        if self.epochs < 0:
            raise InvalidConfig("epochs must be >= 0")
        if self.optimizer not in ("sgd", "adam"):
            raise InvalidConfig(f"unknown optimizer {self.optimizer!r}")
        if not self.learning_rate >= 0 or not math.isfinite(self.learning_rate):
            raise InvalidConfig("learning_rate must be a finite non-negative number")
        if self.min_count < 1:
            raise InvalidConfig("min_count must be >= 1")

    @classmethod
    def desk(cls, **overrides) -> "TrainConfig":
        return cls(**{"batch_size": 64, "epochs": 50, **overrides})

    def model_config(self) -> ModelConfig:
        return ModelConfig(
            embedding_dim=self.embedding_dim,
            encoder_hidden=self.encoder_hidden,
            window=self.window,
            pooling=self.pooling,
            shared_decoder=self.shared_decoder,
            feed_embedding=self.feed_embedding,
        )

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "TrainConfig":
        names = {f.name for f in fields(cls)}
        return cls(**{k: v for k, v in d.items() if k in names})


class SGD:
    def __init__(self, lr: float):
        self.lr = lr

    def step(self, params, grads):
        for k, p in params.items():
            p -= self.lr * grads[k]


class Adam:
    def __init__(self, lr: float, beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
        self.lr, self.beta1, self.beta2, self.eps = lr, beta1, beta2, eps
        self.t = 0
        self.m: dict[str, np.ndarray] = {}
        self.v: dict[str, np.ndarray] = {}

    def step(self, params, grads):
        self.t += 1
        b1, b2 = self.beta1, self.beta2
        c1 = 1.0 - b1**self.t
        c2 = 1.0 - b2**self.t
        for k, p in params.items():
            g = grads[k]
            if k not in self.m:
                self.m[k] = np.zeros_like(p)
                self.v[k] = np.zeros_like(p)
            m = self.m[k]
            v = self.v[k]
            m *= b1
            m += (1.0 - b1) * g
            v *= b2
            v += (1.0 - b2) * (g * g)
            p -= self.lr * (m / c1) / (np.sqrt(v / c2) + self.eps)


def make_optimizer(cfg: TrainConfig):
    return SGD(cfg.learning_rate) if cfg.optimizer == "sgd" else Adam(cfg.learning_rate)


# ------------------------------------------------------------ checkpoints


def save_checkpoint(path, params, cfg: TrainConfig, epoch: int) -> None:
    """Binary dump: magic, one JSON header line, raw little-endian float64 arrays."""
    header = {
        "version": CHECKPOINT_VERSION,
        "epoch": epoch,
        "config": cfg.to_dict(),
        "arrays": [{"name": k, "shape": list(v.shape)} for k, v in params.items()],
    }
    with open(path, "wb") as fh:
        fh.write(CHECKPOINT_MAGIC)
        fh.write(json.dumps(header, sort_keys=True).encode("utf-8") + b"\n")
        for v in params.values():
            fh.write(np.ascontiguousarray(v, dtype="<f8").tobytes())


def load_checkpoint(path):
    """Returns ``(params, train_config, epoch)``."""
    with open(path, "rb") as fh:
        if fh.read(len(CHECKPOINT_MAGIC)) != CHECKPOINT_MAGIC:
            raise CheckpointError(f"{path}: not a checkpoint file")
        header = json.loads(fh.readline().decode("utf-8"))
        if header.get("version") != CHECKPOINT_VERSION:
            raise CheckpointError(f"{path}: unsupported version {header.get('version')}")
        params = {}
        for spec in header["arrays"]:
            shape = tuple(spec["shape"])
            n = int(np.prod(shape)) if shape else 1
            buf = fh.read(8 * n)
            if len(buf) != 8 * n:
                raise CheckpointError(f"{path}: truncated array {spec['name']}")
            params[spec["name"]] = np.frombuffer(buf, dtype="<f8").reshape(shape).astype(np.float64)
        if fh.read(1):
            raise CheckpointError(f"{path}: trailing bytes")
    return params, TrainConfig.from_dict(header["config"]), header["epoch"]


# ------------------------------------------------------------ data


def padded_corpus(corpus: SpokenCorpus, fixed_frames: int):
    """Sentences as lists of ``(padded_frames, valid_length)``."""
    return [[pad_or_truncate(w.frames, fixed_frames) for w in s] for s in corpus.sentences]


def extract_word_embeddings(params, cfg: ModelConfig, corpus: SpokenCorpus, fixed_frames: int = 20, chunk: int = 512) -> EmbeddingTable:
    """Average the encoder output over every occurrence of each word.

    Words appear in order of first occurrence; sums run in corpus order.
    """
    words = [w for s in corpus.sentences for w in s]
    order: dict[str, int] = {}
    for w in words:
        order.setdefault(w.label, len(order))
    sums = np.zeros((len(order), cfg.embedding_dim))
    counts = np.zeros(len(order), dtype=np.int64)
    for start in range(0, len(words), chunk):
        block = words[start : start + chunk]
        padded = [pad_or_truncate(w.frames, fixed_frames) for w in block]
        X = np.stack([p[0] for p in padded])
        L = np.array([p[1] for p in padded])
        emb = encode_batch(params, cfg, X, L)
        for w, e in zip(block, emb):
            idx = order[w.label]
            sums[idx] += e
            counts[idx] += 1
    return EmbeddingTable(list(order), sums / counts[:, None])


# ------------------------------------------------------------ loop


@dataclass
class EpochMetrics:
    epoch: int
    loss: float
    n_batches: int
    n_targets: int
    bench: dict | None = None


def metrics_csv(rows: list[EpochMetrics], bench_names=()) -> str:
    head = ["epoch", "loss", "n_batches", "n_targets"] + [f"rho_{n}" for n in bench_names]
    lines = [",".join(head)]
    for r in rows:
        cells = [str(r.epoch), repr(r.loss), str(r.n_batches), str(r.n_targets)]
        for n in bench_names:
            v = (r.bench or {}).get(n)
            cells.append("" if v is None else f"{v:.6f}")
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def train(
    config: TrainConfig,
    corpus: SpokenCorpus,
    checkpoint_dir=None,
    benchmarks=None,
    on_epoch=None,
):
    """Train from a seeded initialization.

    Returns ``(params, metrics)``. With ``checkpoint_dir`` the initial
    parameters are written as ``epoch_0000.ckpt`` and every epoch after.
    A non-finite loss raises :class:`NumericalError`; the checkpoints
    already written stay on disk.
    """
    kernels.tune_allocator()
    mcfg = config.model_config()
    filtered = corpus.filter_min_count(config.min_count)
    if not filtered.sentences:
        raise InvalidConfig(f"no word survives min_count={config.min_count}")
    data = padded_corpus(filtered, config.fixed_frames)
    params = init_params(mcfg, config.seed)
    opt = make_optimizer(config)
    _, shuffle_seed = splitmix64(config.seed)
    rng = Xoshiro256(shuffle_seed)
    ckdir = Path(checkpoint_dir) if checkpoint_dir is not None else None
    if ckdir is not None:
        ckdir.mkdir(parents=True, exist_ok=True)
        save_checkpoint(ckdir / "epoch_0000.ckpt", params, config, 0)

    metrics: list[EpochMetrics] = []
    for epoch in range(1, config.epochs + 1):
        order = list(range(len(data)))
        rng.shuffle(order)
        weighted = []
        n_batches = 0
        n_targets = 0
        for start in range(0, len(order), config.batch_size):
            idx = order[start : start + config.batch_size]
            batch = make_batch([data[i] for i in idx], mcfg.window)
            try:
                loss, grads = loss_and_grad(params, mcfg, batch)
            except NumericalError:
                log.error("non-finite loss at epoch %d; last checkpoint retained", epoch)
                raise
            opt.step(params, grads)
            weighted.append(loss * len(idx))
            n_batches += 1
            n_targets += batch.n_targets
        row = EpochMetrics(epoch, math.fsum(weighted) / len(data), n_batches, n_targets)
        if benchmarks and config.eval_every and epoch % config.eval_every == 0:
            from ..simbench import evaluate_suite

            table = extract_word_embeddings(params, mcfg, filtered, config.fixed_frames)
            row.bench = {r.name: r.rho for r in evaluate_suite(table, benchmarks)}
        metrics.append(row)
        log.info("epoch %d loss %.6f", epoch, row.loss)
        if ckdir is not None:
            save_checkpoint(ckdir / f"epoch_{epoch:04d}.ckpt", params, config, epoch)
        if on_epoch is not None:
            on_epoch(row, params)
    return params, metrics
