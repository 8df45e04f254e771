"""Pure numpy reference versions of the hot kernels.

``_ckernels.pyx`` implements the same functions with the same arithmetic
order; this module is the fallback when the extension is not built.
"""

import numpy as np


def sigmoid(z):
    return 0.5 * np.tanh(0.5 * z) + 0.5


def lstm_forward(z, c_prev):
    """Gate nonlinearities and state update for one LSTM step.

    ``z`` holds the pre-activations ``[i | f | g | o]`` (B x 4H). Returns
    ``(acts, c, tanh_c, h)`` with ``acts`` the activated gates.
    """
    H = c_prev.shape[1]
    acts = np.empty_like(z)
    acts[:, : 2 * H] = sigmoid(z[:, : 2 * H])
    acts[:, 2 * H : 3 * H] = np.tanh(z[:, 2 * H : 3 * H])
    acts[:, 3 * H :] = sigmoid(z[:, 3 * H :])
    i = acts[:, :H]
    f = acts[:, H : 2 * H]
    g = acts[:, 2 * H : 3 * H]
    o = acts[:, 3 * H :]
    c = f * c_prev + i * g
    tc = np.tanh(c)
    h = o * tc
    return acts, c, tc, h


def lstm_backward(dh, dc, acts, c_prev, tc):
    """Backward of :func:`lstm_forward`; returns ``(dz, dc_prev)``."""
    H = c_prev.shape[1]
    i = acts[:, :H]
    f = acts[:, H : 2 * H]
    g = acts[:, 2 * H : 3 * H]
    o = acts[:, 3 * H :]
    dct = dc + (dh * o) * (1.0 - tc * tc)
    dz = np.empty_like(acts)
    dz[:, :H] = (dct * g) * (i * (1.0 - i))
    dz[:, H : 2 * H] = (dct * c_prev) * (f * (1.0 - f))
    dz[:, 2 * H : 3 * H] = (dct * i) * (1.0 - g * g)
    dz[:, 3 * H :] = (dh * tc) * (o * (1.0 - o))
    return dz, dct * f


def jacobi_eigh(a, tol=1e-12, max_sweeps=100):
    """Eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations.

    Stops when the off-diagonal Frobenius norm falls below ``tol`` times
    the matrix norm. Returns ``(eigenvalues, eigenvectors, sweeps)`` with
    eigenvectors in columns, unsorted.
    """
    A = np.array(a, dtype=np.float64, copy=True)
    n = A.shape[0]
    V = np.eye(n)
    scale = np.sqrt(np.sum(A * A))
    sweeps = 0
    for sweep in range(max_sweeps):
        offd = A.copy()
        np.fill_diagonal(offd, 0.0)
        off = np.sqrt(np.sum(offd * offd))
        if not off > tol * scale:
            break
        sweeps = sweep + 1
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                if apq == 0.0:
                    continue
                theta = (A[q, q] - A[p, p]) / (2.0 * apq)
                t = 1.0 / (abs(theta) + np.sqrt(theta * theta + 1.0))
                if theta < 0.0:
                    t = -t
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                cp = A[:, p].copy()
                cq = A[:, q].copy()
                A[:, p] = c * cp - s * cq
                A[:, q] = s * cp + c * cq
                rp = A[p, :].copy()
                rq = A[q, :].copy()
                A[p, :] = c * rp - s * rq
                A[q, :] = s * rp + c * rq
                A[p, q] = 0.0
                A[q, p] = 0.0
                vp = V[:, p].copy()
                vq = V[:, q].copy()
                V[:, p] = c * vp - s * vq
                V[:, q] = s * vp + c * vq
    return np.diag(A).copy(), V, sweeps


def attention_forward(memA, mem, lengths, h, steps=None):
    """Bilinear attention of every decoder step over encoder outputs.

    ``memA`` (P, T, E) is the encoder output pre-multiplied by the
    attention matrix, ``mem`` (P, T, K) the encoder output itself and ``h``
    (P, S, E) the decoder states. Encoder steps at or beyond ``lengths[p]``
    get zero weight. Decoder steps at or beyond ``steps[p]`` (default: all
    valid) are not computed and come back as zeros. Returns ``(alpha, ctx)``
    of shapes (P, S, T), (P, S, K).
    """
    T = mem.shape[1]
    valid = (np.arange(T)[None, :] < lengths[:, None])[:, None, :]
    scores = np.matmul(h, memA.transpose(0, 2, 1))
    scores = np.where(valid, scores, -np.inf)
    ex = np.exp(scores - scores.max(axis=2, keepdims=True))
    alpha = ex / ex.sum(axis=2, keepdims=True)
    if steps is not None:
        alpha = np.where((np.arange(h.shape[1])[None, :] < steps[:, None])[:, :, None], alpha, 0.0)
    ctx = np.matmul(alpha, mem)
    return alpha, ctx


def attention_backward(memA, mem, lengths, h, alpha, dctx, dmem, dmemA, steps=None):
    """Backward of :func:`attention_forward`.

    Accumulates into ``dmem`` and ``dmemA`` in place and returns the
    gradient with respect to ``h``. Skipped decoder steps carry zero
    ``alpha`` and so contribute nothing; ``steps`` is accepted for symmetry.
    """
    dalpha = np.matmul(dctx, mem.transpose(0, 2, 1))
    dscore = alpha * (dalpha - np.sum(alpha * dalpha, axis=2, keepdims=True))
    dmem += np.matmul(alpha.transpose(0, 2, 1), dctx)
    dmemA += np.matmul(dscore.transpose(0, 2, 1), h)
    return np.matmul(dscore, memA)
