"""Skip-gram encoder-decoder over spoken words, with a hand-written backward pass.

Encoder: bidirectional LSTM over a word's valid frames; the final forward
and backward hidden states (or their time-average) are affinely projected
to the embedding. Decoders: one LSTM per context offset, initial hidden
state = the embedding, teacher-forced on the previous true frame, with
bilinear attention over the centre word's encoder outputs. The loss is the
squared error of each emitted frame averaged over the target's valid
frames and coefficients, then over the sentence's targets, then over the
sentences of the batch.

Padded frames are zeroed and every array is cut to the longest valid length
in the batch before any arithmetic, so padding content and padding width
never reach a single floating-point operation.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .. import kernels
from ..errors import EmptyInput, InvalidConfig, NumericalError, ShapeError
from .corpus import N_MFCC

INIT_SCALE = 0.08


@dataclass(frozen=True)
class ModelConfig:
    input_dim: int = N_MFCC
    embedding_dim: int = 50
    encoder_hidden: int = 50
    window: int = 3
    pooling: str = "final"  # "final" | "mean"
    shared_decoder: bool = False
    feed_embedding: bool = False

    def __post_init__(self):
        if self.window < 1:
            raise InvalidConfig("window must be >= 1")
        if self.embedding_dim < 1 or self.encoder_hidden < 1 or self.input_dim < 1:
            raise InvalidConfig("dimensions must be positive")
        if self.pooling not in ("final", "mean"):
            raise InvalidConfig(f"unknown pooling {self.pooling!r}")

    @property
    def offsets(self) -> tuple[int, ...]:
        w = self.window
        return tuple(range(-w, 0)) + tuple(range(1, w + 1))

    @property
    def n_decoders(self) -> int:
        return 1 if self.shared_decoder else 2 * self.window

    def decoder_for(self, offset_index: int) -> int:
        return 0 if self.shared_decoder else offset_index

    def to_dict(self) -> dict:
        return asdict(self)


def param_shapes(cfg: ModelConfig) -> dict[str, tuple[int, ...]]:
    D, E, H = cfg.input_dim, cfg.embedding_dim, cfg.encoder_hidden
    din = D + E if cfg.feed_embedding else D
    shapes = {
        "enc_fwd.W": (4 * H, D + H),
        "enc_fwd.b": (4 * H,),
        "enc_bwd.W": (4 * H, D + H),
        "enc_bwd.b": (4 * H,),
        "proj.W": (E, 2 * H),
        "proj.b": (E,),
    }
    for k in range(cfg.n_decoders):
        shapes[f"dec{k}.W"] = (4 * E, din + E)
        shapes[f"dec{k}.b"] = (4 * E,)
        shapes[f"dec{k}.att"] = (E, 2 * H)
        shapes[f"dec{k}.out_W"] = (D, E + 2 * H)
        shapes[f"dec{k}.out_b"] = (D,)
    return shapes


def init_params(cfg: ModelConfig, seed: int) -> dict[str, np.ndarray]:
    """Uniform(-0.08, 0.08) initialization in canonical parameter order."""
    rng = np.random.Generator(np.random.PCG64(seed))
    return {name: rng.uniform(-INIT_SCALE, INIT_SCALE, size=shape) for name, shape in param_shapes(cfg).items()}


def zeros_like_params(params):
    return {k: np.zeros_like(v) for k, v in params.items()}


def check_params(params, cfg: ModelConfig) -> None:
    expected = param_shapes(cfg)
    if list(params) != list(expected):
        raise ShapeError(f"parameter names {list(params)} do not match config {list(expected)}")
    for name, shape in expected.items():
        if params[name].shape != shape:
            raise ShapeError(f"{name}: expected shape {shape}, got {params[name].shape}")


@dataclass
class Batch:
    """Padded words of several sentences plus their (centre, target) pairs.

    ``pairs[k]`` lists the pairs for offset index ``k`` as arrays of centre
    row, target row and loss coefficient, sorted by decreasing target length.
    """

    X: np.ndarray  # (N, T, D), rows by decreasing valid length, zero beyond it
    lengths: np.ndarray  # (N,)
    pairs: list[tuple[np.ndarray, np.ndarray, np.ndarray]]
    n_sentences: int
    n_targets: int

    @property
    def mask(self) -> np.ndarray:
        return np.arange(self.X.shape[1])[None, :] < self.lengths[:, None]


def make_batch(sentences, window: int) -> Batch:
    """Build a :class:`Batch` from sentences of ``(padded_frames, valid_length)``."""
    if not sentences:
        raise EmptyInput("empty batch")
    mats = []
    lengths = []
    for sent in sentences:
        if len(sent) == 0:
            raise EmptyInput("empty sentence")
        for frames, L in sent:
            frames = np.asarray(frames, dtype=np.float64)
            if frames.ndim != 2:
                raise ShapeError("padded word must be a 2-d array")
            L = int(L)
            if not 1 <= L <= frames.shape[0]:
                raise ShapeError(f"valid length {L} outside [1, {frames.shape[0]}]")
            mats.append(frames)
            lengths.append(L)
    dims = {m.shape[1] for m in mats}
    if len(dims) != 1:
        raise ShapeError("words have different coefficient counts")
    lengths = np.array(lengths, dtype=np.int64)
    T = int(lengths.max())
    # word rows go longest first; row[i] is where the i-th word of the input lands
    word_order = np.argsort(-lengths, kind="stable")
    row = np.empty_like(word_order)
    row[word_order] = np.arange(len(word_order))
    X = np.zeros((len(mats), T, dims.pop()))
    for i, (m, L) in enumerate(zip(mats, lengths)):
        X[row[i], :L] = m[:L]
    lengths = lengths[word_order]

    S = len(sentences)
    per_offset = {o: ([], [], []) for o in range(2 * window)}
    offsets = tuple(range(-window, 0)) + tuple(range(1, window + 1))
    n_targets = 0
    base = 0
    for sent in sentences:
        n = len(sent)
        n_pairs = sum(1 for i in range(n) for o in offsets if 0 <= i + o < n)
        n_targets += n_pairs
        if n_pairs:
            w = 1.0 / (n_pairs * S)
            for k, o in enumerate(offsets):
                cs, ts, ws = per_offset[k]
                for i in range(n):
                    if 0 <= i + o < n:
                        cs.append(base + i)
                        ts.append(base + i + o)
                        ws.append(w)
        base += n
    pairs = []
    for k in range(2 * window):
        cs, ts, ws = per_offset[k]
        ci = row[np.array(cs, dtype=np.int64)]
        ti = row[np.array(ts, dtype=np.int64)]
        # longest targets first: the rows still decoding at any step form a prefix
        order = np.argsort(-lengths[ti], kind="stable")
        ci, ti = ci[order], ti[order]
        coef = np.array(ws, dtype=np.float64)[order] / (lengths[ti] * X.shape[2]) if len(ti) else np.zeros(0)
        pairs.append((ci, ti, coef))
    return Batch(X, lengths, pairs, S, n_targets)


# ---------------------------------------------------------------- encoder


def _active_rows(lengths, T):
    """Rows still running at each step, for lengths sorted in decreasing order."""
    return np.searchsorted(-lengths, -np.arange(T), side="left")


def _lstm_packed(W, b, X, lengths, reverse):
    # rows are sorted by decreasing length, so the rows with a valid frame
    # at step t are a prefix; the rest keep their state untouched
    N, T, D = X.shape
    H = W.shape[0] // 4
    active = _active_rows(lengths, T)
    h = np.zeros((N, H))
    c = np.zeros((N, H))
    out = np.zeros((N, T, H))
    cache = []
    steps = range(T - 1, -1, -1) if reverse else range(T)
    for t in steps:
        n = active[t]
        xh = np.concatenate([X[:n, t], h[:n]], axis=1)
        z = xh @ W.T
        z += b
        c_prev = c[:n].copy()
        acts, c_new, tc, h_new = kernels.lstm_forward(z, c_prev)
        cache.append((t, n, xh, acts, c_prev, tc))
        c[:n] = c_new
        h[:n] = h_new
        out[:n, t] = h_new
    return out, h, cache


def _lstm_packed_backward(W, cache, dout, dh_final, D):
    H = W.shape[0] // 4
    dW = np.zeros_like(W)
    db = np.zeros(W.shape[0])
    dh = dh_final.copy()
    dc = np.zeros_like(dh)
    for t, n, xh, acts, c_prev, tc in reversed(cache):
        dz, dc_prev = kernels.lstm_backward(dh[:n] + dout[:n, t], dc[:n], acts, c_prev, tc)
        dW += dz.T @ xh
        db += dz.sum(axis=0)
        dh[:n] = dz @ W[:, D : D + H]
        dc[:n] = dc_prev
    return dW, db


def _encode(params, cfg: ModelConfig, X, lengths):
    """Encoder pass over words sorted by decreasing valid length."""
    fwd_out, hf, cf = _lstm_packed(params["enc_fwd.W"], params["enc_fwd.b"], X, lengths, reverse=False)
    bwd_out, hb, cb = _lstm_packed(params["enc_bwd.W"], params["enc_bwd.b"], X, lengths, reverse=True)
    enc = np.concatenate([fwd_out, bwd_out], axis=2)
    if cfg.pooling == "final":
        feat = np.concatenate([hf, hb], axis=1)
    else:
        feat = enc.sum(axis=1) / lengths[:, None]
    return project(params, feat), enc, (feat, cf, cb)


def project(params, feat):
    """Affine map from encoder features (N, 2H) to embeddings (N, E)."""
    return feat @ params["proj.W"].T + params["proj.b"]


def project_backward(params, feat, demb, grads):
    """Accumulate projection gradients into ``grads``; returns d loss / d feat."""
    grads["proj.W"] += demb.T @ feat
    grads["proj.b"] += demb.sum(axis=0)
    return demb @ params["proj.W"]


def _check_input(params, cfg, X):
    if X.ndim != 3 or X.shape[2] != cfg.input_dim:
        raise ShapeError(f"expected (N, T, {cfg.input_dim}) frames, got {X.shape}")
    check_params(params, cfg)


def encode_batch(params, cfg: ModelConfig, X, lengths) -> np.ndarray:
    """Embeddings for padded words ``X`` (N, T, D) with valid ``lengths``."""
    X = np.asarray(X, dtype=np.float64)
    lengths = np.asarray(lengths, dtype=np.int64)
    _check_input(params, cfg, X)
    if lengths.shape != (X.shape[0],) or np.any(lengths < 1) or np.any(lengths > X.shape[1]):
        raise ShapeError("lengths must lie in [1, T] for every word")
    T = int(lengths.max())
    order = np.argsort(-lengths, kind="stable")
    Ls = lengths[order]
    mask = np.arange(T)[None, :] < Ls[:, None]
    Xs = np.where(mask[:, :, None], X[order, :T], 0.0)
    emb, _, _ = _encode(params, cfg, Xs, Ls)
    out = np.empty_like(emb)
    out[order] = emb
    return out


def encode(params, cfg: ModelConfig, word) -> np.ndarray:
    """Embedding of one padded word ``(frames, valid_length)``."""
    frames, L = word
    frames = np.asarray(frames, dtype=np.float64)
    if frames.ndim != 2:
        raise ShapeError("padded word must be a 2-d array")
    return encode_batch(params, cfg, frames[None], [L])[0]


# ---------------------------------------------------------------- decoder


def _decode_forward(params, cfg, k, emb, enc, X, lengths, ci, ti, coef):
    # Teacher forcing keeps attention and the output layer off the
    # recurrence, so only the LSTM runs step by step; the rest is done for
    # all steps at once. Arrays indexed by step are time-major (S, P, ...).
    E, D = cfg.embedding_dim, cfg.input_dim
    din = D + E if cfg.feed_embedding else D
    W, b = params[f"dec{k}.W"], params[f"dec{k}.b"]
    Wa = params[f"dec{k}.att"]
    Wo, bo = params[f"dec{k}.out_W"], params[f"dec{k}.out_b"]
    P = ci.shape[0]
    Lt = lengths[ti]
    S = int(Lt.max())
    Y = X[ti, :S]
    mem = enc[ci]
    Lc = lengths[ci]
    twoH = mem.shape[2]
    memA = (mem.reshape(-1, twoH) @ Wa.T).reshape(P, -1, E)
    e0 = emb[ci]

    prev = np.zeros((S, P, D))
    prev[1:] = Y[:, : S - 1].transpose(1, 0, 2)
    Zx = (prev.reshape(-1, D) @ W[:, :D].T).reshape(S, P, 4 * E)
    Zx += b
    if cfg.feed_embedding:
        Zx += e0 @ W[:, D:din].T
    # pairs arrive sorted by decreasing target length, so step t only
    # touches the first active[t] rows
    active = np.searchsorted(-Lt, -np.arange(S), side="left")
    Wh_T = W[:, din:].T
    hs = np.zeros((S + 1, P, E))
    hs[0] = e0
    c = np.zeros((P, E))
    steps = []
    for t in range(S):
        n = active[t]
        z = Zx[t, :n] + hs[t, :n] @ Wh_T
        c_prev = c[:n]
        acts, c, tc, h_new = kernels.lstm_forward(z, c_prev)
        steps.append((acts, c_prev, tc))
        hs[t + 1, :n] = h_new

    Hp = np.ascontiguousarray(hs[1:].transpose(1, 0, 2))  # (P, S, E)
    alpha, ctx = kernels.attention_forward(memA, mem, Lc, Hp, Lt)
    pred = Hp.reshape(-1, E) @ Wo[:, :E].T
    pred += ctx.reshape(-1, twoH) @ Wo[:, E:].T
    pred += bo
    err = pred.reshape(P, S, D)
    err -= Y
    valid = np.arange(S)[None, :] < Lt[:, None]
    se = np.where(valid, coef[:, None] * np.sum(err * err, axis=2), 0.0)
    loss = float(se.sum())
    return loss, (mem, memA, Lc, Lt, e0, prev, hs, steps, Hp, alpha, ctx, err, valid)


def _decode_backward(params, cfg, k, grads, fwd, coef):
    E, D = cfg.embedding_dim, cfg.input_dim
    din = D + E if cfg.feed_embedding else D
    W = params[f"dec{k}.W"]
    Wa = params[f"dec{k}.att"]
    Wo = params[f"dec{k}.out_W"]
    mem, memA, Lc, Lt, e0, prev, hs, steps, Hp, alpha, ctx, err, valid = fwd
    P, S = valid.shape
    twoH = mem.shape[2]

    dpred = np.where(valid[:, :, None], (2.0 * coef)[:, None, None] * err, 0.0)
    dpred2 = dpred.reshape(-1, D)
    gWo = grads[f"dec{k}.out_W"]
    gWo[:, :E] += dpred2.T @ Hp.reshape(-1, E)
    gWo[:, E:] += dpred2.T @ ctx.reshape(-1, twoH)
    grads[f"dec{k}.out_b"] += dpred2.sum(axis=0)
    dctx = (dpred2 @ Wo[:, E:]).reshape(P, S, twoH)
    dmem = np.zeros_like(mem)
    dmemA = np.zeros_like(memA)
    dH = kernels.attention_backward(memA, mem, Lc, Hp, alpha, dctx, dmem, dmemA, Lt)
    dH += (dpred2 @ Wo[:, :E]).reshape(P, S, E)
    dHt = dH.transpose(1, 0, 2)

    Wh = W[:, din:]
    dZ = np.zeros((S, P, 4 * E))
    dh = np.zeros((0, E))
    dc = np.zeros((0, E))
    for t in range(S - 1, -1, -1):
        acts, c_prev, tc = steps[t]
        n, m = acts.shape[0], dh.shape[0]
        dh_t = dHt[t, :n].copy()
        dh_t[:m] += dh
        dc_t = np.zeros((n, E))
        dc_t[:m] = dc
        dz, dc = kernels.lstm_backward(dh_t, dc_t, acts, c_prev, tc)
        dZ[t, :n] = dz
        dh = dz @ Wh
    dZ2 = dZ.reshape(-1, 4 * E)
    dW = np.empty_like(W)
    dW[:, :D] = dZ2.T @ prev.reshape(-1, D)
    dW[:, din:] = dZ2.T @ hs[:S].reshape(-1, E)
    de0 = dh
    if cfg.feed_embedding:
        dzsum = dZ.sum(axis=0)
        dW[:, D:din] = dzsum.T @ e0
        de0 = de0 + dzsum @ W[:, D:din]
    grads[f"dec{k}.W"] += dW
    grads[f"dec{k}.b"] += dZ2.sum(axis=0)
    grads[f"dec{k}.att"] += dmemA.reshape(-1, E).T @ mem.reshape(-1, twoH)
    dmem += (dmemA.reshape(-1, E) @ Wa).reshape(dmem.shape)
    return de0, dmem


# ---------------------------------------------------------------- loss


def loss_and_grad(params, cfg: ModelConfig, batch: Batch, need_grad: bool = True):
    """Mean skip-gram reconstruction loss of ``batch`` and its exact gradient.

    Returns ``(loss, grads)``; ``grads`` is None when ``need_grad`` is false.
    """
    _check_input(params, cfg, batch.X)
    if len(batch.pairs) != 2 * cfg.window:
        raise ShapeError("batch was built for a different window")
    X, lengths = batch.X, batch.lengths
    emb, enc, enc_cache = _encode(params, cfg, X, lengths)

    loss = 0.0
    fwds = []
    for j, (ci, ti, coef) in enumerate(batch.pairs):
        if ci.shape[0] == 0:
            fwds.append(None)
            continue
        k = cfg.decoder_for(j)
        lj, fwd = _decode_forward(params, cfg, k, emb, enc, X, lengths, ci, ti, coef)
        loss += lj
        fwds.append(fwd)
    if not np.isfinite(loss):
        raise NumericalError(f"non-finite loss {loss}")
    if not need_grad:
        return loss, None

    grads = zeros_like_params(params)
    demb = np.zeros_like(emb)
    denc = np.zeros_like(enc)
    for j, (ci, ti, coef) in enumerate(batch.pairs):
        if fwds[j] is None:
            continue
        k = cfg.decoder_for(j)
        de0, dmem = _decode_backward(params, cfg, k, grads, fwds[j], coef)
        # each word is the centre of at most one pair per offset
        demb[ci] += de0
        denc[ci] += dmem

    feat, cf, cb = enc_cache
    dfeat = project_backward(params, feat, demb, grads)
    H = cfg.encoder_hidden
    if cfg.pooling == "final":
        dhf, dhb = dfeat[:, :H], dfeat[:, H:]
    else:
        denc = denc + (dfeat / lengths[:, None])[:, None, :]
        dhf = np.zeros((X.shape[0], H))
        dhb = np.zeros((X.shape[0], H))
    D = cfg.input_dim
    dW, db = _lstm_packed_backward(params["enc_fwd.W"], cf, denc[:, :, :H], dhf, D)
    grads["enc_fwd.W"] += dW
    grads["enc_fwd.b"] += db
    dW, db = _lstm_packed_backward(params["enc_bwd.W"], cb, denc[:, :, H:], dhb, D)
    grads["enc_bwd.W"] += dW
    grads["enc_bwd.b"] += db
    for name, g in grads.items():
        if not np.all(np.isfinite(g)):
            raise NumericalError(f"non-finite gradient for {name}")
    return loss, grads


def skipgram_loss(params, cfg: ModelConfig, sentence, window: int | None = None) -> tuple[float, int]:
    """Loss of one sentence of padded words; returns ``(loss, n_targets)``."""
    if window is not None and window != cfg.window:
        cfg = ModelConfig(**{**cfg.to_dict(), "window": window})
    if len(sentence) == 0:
        raise EmptyInput("empty sentence")
    batch = make_batch([sentence], cfg.window)
    loss, _ = loss_and_grad(params, cfg, batch, need_grad=False)
    return loss, batch.n_targets


def grad(params, cfg: ModelConfig, sentences):
    """Gradient of the mean sentence loss over ``sentences``."""
    loss, g = loss_and_grad(params, cfg, make_batch(sentences, cfg.window))
    return g
