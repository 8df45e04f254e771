"""Central finite-difference verification of the analytic gradient."""

from __future__ import annotations

import numpy as np

from .model import Batch, ModelConfig, init_params, loss_and_grad, make_batch

DEFAULT_EPSILON = 1e-4


def relative_error(analytic, numeric):
    a = np.asarray(analytic, dtype=np.float64)
    n = np.asarray(numeric, dtype=np.float64)
    return np.abs(a - n) / np.maximum(np.maximum(np.abs(a), np.abs(n)), 1e-8)


def numeric_grad(params, cfg: ModelConfig, batch: Batch, epsilon: float = DEFAULT_EPSILON):
    """Central differences for every scalar parameter (perturbs in place, restores)."""
    out = {}
    for name, p in params.items():
        g = np.zeros_like(p)
        flat = p.reshape(-1)
        gflat = g.reshape(-1)
        for i in range(flat.size):
            orig = flat[i]
            flat[i] = orig + epsilon
            lp, _ = loss_and_grad(params, cfg, batch, need_grad=False)
            flat[i] = orig - epsilon
            lm, _ = loss_and_grad(params, cfg, batch, need_grad=False)
            flat[i] = orig
            gflat[i] = (lp - lm) / (2.0 * epsilon)
        out[name] = g
    return out


def grad_check(params, cfg: ModelConfig, sample, epsilon: float = DEFAULT_EPSILON, analytic=None) -> float:
    """Max relative error between analytic and central-difference gradients.

    ``sample`` is a list of sentences of padded words, or a prebuilt
    :class:`Batch`. ``analytic`` overrides the analytic gradient (used to
    check that the harness notices a wrong gradient).
    """
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    batch = sample if isinstance(sample, Batch) else make_batch(sample, cfg.window)
    if analytic is None:
        _, analytic = loss_and_grad(params, cfg, batch)
    numeric = numeric_grad(params, cfg, batch, epsilon)
    return max(float(relative_error(analytic[k], numeric[k]).max()) for k in params)


def tiny_problem(seed: int, embedding_dim: int = 4, fixed_frames: int = 4, window: int = 1, n_words: int = 3, **cfg_kw):
    """A seeded small model plus one random sentence, for gradient checks."""
    from .corpus import N_MFCC

    cfg = ModelConfig(embedding_dim=embedding_dim, encoder_hidden=embedding_dim, window=window, **cfg_kw)
    rng = np.random.Generator(np.random.PCG64(seed + 7919))
    params = {k: v * 5.0 for k, v in init_params(cfg, seed).items()}
    sentence = []
    for _ in range(n_words):
        L = int(rng.integers(1, fixed_frames + 1))
        frames = np.zeros((fixed_frames, N_MFCC))
        frames[:L] = rng.normal(0.0, 0.5, size=(L, N_MFCC))
        sentence.append((frames, L))
    return params, cfg, [sentence]
