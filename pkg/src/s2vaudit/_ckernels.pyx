# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the kernels in ``_pykernels``.

Same signatures and results up to rounding. The LSTM and Jacobi kernels
keep the fallback's per-element operation order (bit-identical output);
attention skips masked steps instead of weighting them by zero.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, fabs, exp

cnp.import_array()


def lstm_forward(z_in, c_prev_in):
    # transcendentals go through numpy's vectorized tanh (libm's scalar
    # tanh is several times slower); the gate arithmetic is fused here
    z_a = np.ascontiguousarray(z_in, dtype=np.float64)
    cdef double[:, ::1] cp = np.ascontiguousarray(c_prev_in, dtype=np.float64)
    cdef Py_ssize_t B = z_a.shape[0], H = cp.shape[1]
    acts_a = np.empty((B, 4 * H))
    cdef double[:, ::1] z = z_a
    cdef double[:, ::1] acts = acts_a
    cdef Py_ssize_t b, k
    with nogil:
        for b in range(B):
            for k in range(2 * H):
                acts[b, k] = 0.5 * z[b, k]
            for k in range(2 * H, 3 * H):
                acts[b, k] = z[b, k]
            for k in range(3 * H, 4 * H):
                acts[b, k] = 0.5 * z[b, k]
    np.tanh(acts_a, out=acts_a)
    c_a = np.empty((B, H))
    cdef double[:, ::1] c = c_a
    with nogil:
        for b in range(B):
            for k in range(2 * H):
                acts[b, k] = 0.5 * acts[b, k] + 0.5
            for k in range(3 * H, 4 * H):
                acts[b, k] = 0.5 * acts[b, k] + 0.5
            for k in range(H):
                c[b, k] = acts[b, H + k] * cp[b, k] + acts[b, k] * acts[b, 2 * H + k]
    tc_a = np.tanh(c_a)
    h_a = np.empty((B, H))
    cdef double[:, ::1] tc = tc_a
    cdef double[:, ::1] h = h_a
    with nogil:
        for b in range(B):
            for k in range(H):
                h[b, k] = acts[b, 3 * H + k] * tc[b, k]
    return acts_a, c_a, tc_a, h_a


def lstm_backward(dh_in, dc_in, acts_in, c_prev_in, tc_in):
    cdef double[:, ::1] dh = np.ascontiguousarray(dh_in, dtype=np.float64)
    cdef double[:, ::1] dc = np.ascontiguousarray(dc_in, dtype=np.float64)
    cdef double[:, ::1] acts = np.ascontiguousarray(acts_in, dtype=np.float64)
    cdef double[:, ::1] cp = np.ascontiguousarray(c_prev_in, dtype=np.float64)
    cdef double[:, ::1] tc = np.ascontiguousarray(tc_in, dtype=np.float64)
    cdef Py_ssize_t B = dh.shape[0], H = dh.shape[1]
    dz_a = np.empty((B, 4 * H))
    dcp_a = np.empty((B, H))
    cdef double[:, ::1] dz = dz_a
    cdef double[:, ::1] dcp = dcp_a
    cdef Py_ssize_t b, k
    cdef double i, f, g, o, t, dct
    with nogil:
        for b in range(B):
            for k in range(H):
                i = acts[b, k]
                f = acts[b, H + k]
                g = acts[b, 2 * H + k]
                o = acts[b, 3 * H + k]
                t = tc[b, k]
                dct = dc[b, k] + (dh[b, k] * o) * (1.0 - t * t)
                dz[b, k] = (dct * g) * (i * (1.0 - i))
                dz[b, H + k] = (dct * cp[b, k]) * (f * (1.0 - f))
                dz[b, 2 * H + k] = (dct * i) * (1.0 - g * g)
                dz[b, 3 * H + k] = (dh[b, k] * t) * (o * (1.0 - o))
                dcp[b, k] = dct * f
    return dz_a, dcp_a


def jacobi_eigh(a, double tol=1e-12, int max_sweeps=100):
    A_a = np.array(a, dtype=np.float64, order="C", copy=True)
    cdef double[:, ::1] A = A_a
    cdef Py_ssize_t n = A.shape[0]
    V_a = np.eye(n)
    cdef double[:, ::1] V = V_a
    cdef Py_ssize_t p, q, k
    cdef int sweep, sweeps = 0
    cdef double apq, theta, t, c, s, x, y, off, total, scale
    with nogil:
        total = 0.0
        for p in range(n):
            for q in range(n):
                total = total + A[p, q] * A[p, q]
        scale = sqrt(total)
        for sweep in range(max_sweeps):
            off = 0.0
            for p in range(n):
                for q in range(n):
                    if p != q:
                        off = off + A[p, q] * A[p, q]
            off = sqrt(off)
            if not off > tol * scale:
                break
            sweeps = sweep + 1
            for p in range(n - 1):
                for q in range(p + 1, n):
                    apq = A[p, q]
                    if apq == 0.0:
                        continue
                    theta = (A[q, q] - A[p, p]) / (2.0 * apq)
                    t = 1.0 / (fabs(theta) + sqrt(theta * theta + 1.0))
                    if theta < 0.0:
                        t = -t
                    c = 1.0 / sqrt(t * t + 1.0)
                    s = t * c
                    for k in range(n):
                        x = A[k, p]
                        y = A[k, q]
                        A[k, p] = c * x - s * y
                        A[k, q] = s * x + c * y
                    for k in range(n):
                        x = A[p, k]
                        y = A[q, k]
                        A[p, k] = c * x - s * y
                        A[q, k] = s * x + c * y
                    A[p, q] = 0.0
                    A[q, p] = 0.0
                    for k in range(n):
                        x = V[k, p]
                        y = V[k, q]
                        V[k, p] = c * x - s * y
                        V[k, q] = s * x + c * y
    return np.diag(A_a).copy(), V_a, sweeps


cdef inline double _dot(const double* a, const double* b, Py_ssize_t n) noexcept nogil:
    # four partial sums break the add dependency chain
    cdef double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0
    cdef Py_ssize_t i = 0
    while i + 4 <= n:
        s0 = s0 + a[i] * b[i]
        s1 = s1 + a[i + 1] * b[i + 1]
        s2 = s2 + a[i + 2] * b[i + 2]
        s3 = s3 + a[i + 3] * b[i + 3]
        i = i + 4
    while i < n:
        s0 = s0 + a[i] * b[i]
        i = i + 1
    return (s0 + s1) + (s2 + s3)


cdef inline void _axpy(double a, const double* x, double* y, Py_ssize_t n) noexcept nogil:
    cdef Py_ssize_t i
    for i in range(n):
        y[i] = y[i] + a * x[i]


def attention_forward(memA_in, mem_in, lengths_in, h_in, steps_in=None):
    cdef double[:, :, ::1] memA = np.ascontiguousarray(memA_in, dtype=np.float64)
    cdef double[:, :, ::1] mem = np.ascontiguousarray(mem_in, dtype=np.float64)
    cdef cnp.int64_t[::1] lengths = np.ascontiguousarray(lengths_in, dtype=np.int64)
    cdef double[:, :, ::1] h = np.ascontiguousarray(h_in, dtype=np.float64)
    cdef Py_ssize_t P = mem.shape[0], T = mem.shape[1], K = mem.shape[2]
    cdef Py_ssize_t S = h.shape[1], E = h.shape[2]
    if steps_in is None:
        steps_in = np.full(P, S, dtype=np.int64)
    cdef cnp.int64_t[::1] steps = np.minimum(np.asarray(steps_in, dtype=np.int64), S)
    alpha_a = np.zeros((P, S, T))
    ctx_a = np.zeros((P, S, K))
    cdef double[:, :, ::1] alpha = alpha_a
    cdef double[:, :, ::1] ctx = ctx_a
    cdef Py_ssize_t p, q, j, L
    cdef double s, mx, tot
    cdef double* al
    with nogil:
        for p in range(P):
            L = lengths[p]
            for q in range(steps[p]):
                al = &alpha[p, q, 0]
                mx = -1e308
                for j in range(L):
                    s = _dot(&memA[p, j, 0], &h[p, q, 0], E)
                    al[j] = s
                    if s > mx:
                        mx = s
                tot = 0.0
                for j in range(L):
                    al[j] = exp(al[j] - mx)
                    tot = tot + al[j]
                for j in range(L):
                    al[j] = al[j] / tot
                    _axpy(al[j], &mem[p, j, 0], &ctx[p, q, 0], K)
    return alpha_a, ctx_a


def attention_backward(memA_in, mem_in, lengths_in, h_in, alpha_in, dctx_in, double[:, :, ::1] dmem, double[:, :, ::1] dmemA, steps_in=None):
    cdef double[:, :, ::1] memA = np.ascontiguousarray(memA_in, dtype=np.float64)
    cdef double[:, :, ::1] mem = np.ascontiguousarray(mem_in, dtype=np.float64)
    cdef cnp.int64_t[::1] lengths = np.ascontiguousarray(lengths_in, dtype=np.int64)
    cdef double[:, :, ::1] h = np.ascontiguousarray(h_in, dtype=np.float64)
    cdef double[:, :, ::1] alpha = np.ascontiguousarray(alpha_in, dtype=np.float64)
    cdef double[:, :, ::1] dctx = np.ascontiguousarray(dctx_in, dtype=np.float64)
    cdef Py_ssize_t P = mem.shape[0], T = mem.shape[1], K = mem.shape[2]
    cdef Py_ssize_t S = h.shape[1], E = h.shape[2]
    if steps_in is None:
        steps_in = np.full(P, S, dtype=np.int64)
    cdef cnp.int64_t[::1] steps = np.minimum(np.asarray(steps_in, dtype=np.int64), S)
    dh_a = np.zeros((P, S, E))
    cdef double[:, :, ::1] dh = dh_a
    ds_a = np.zeros((S, T))
    cdef double[:, ::1] ds = ds_a
    cdef Py_ssize_t p, q, j, L, Q
    cdef double tot
    with nogil:
        for p in range(P):
            L = lengths[p]
            Q = steps[p]
            # score gradients first, then one pass per accumulated array
            for q in range(Q):
                tot = 0.0
                for j in range(L):
                    ds[q, j] = _dot(&mem[p, j, 0], &dctx[p, q, 0], K)
                    tot = tot + alpha[p, q, j] * ds[q, j]
                for j in range(L):
                    ds[q, j] = alpha[p, q, j] * (ds[q, j] - tot)
            for j in range(L):
                for q in range(Q):
                    _axpy(alpha[p, q, j], &dctx[p, q, 0], &dmem[p, j, 0], K)
                    _axpy(ds[q, j], &h[p, q, 0], &dmemA[p, j, 0], E)
            for q in range(Q):
                for j in range(L):
                    _axpy(ds[q, j], &memA[p, j, 0], &dh[p, q, 0], E)
    return dh_a
