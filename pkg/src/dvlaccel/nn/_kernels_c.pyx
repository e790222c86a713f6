# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled loops for the CNN-LSTM hot path.

Same signatures and layouts as ``_kernels_py``; all inputs must be
C-contiguous float64 (int64 for pooling indices).
"""

import numpy as np
from libc.math cimport exp, tanh

NAME = "cython"


cdef inline double _sigmoid(double z) noexcept nogil:
    cdef double e
    if z >= 0:
        return 1.0 / (1.0 + exp(-z))
    e = exp(z)
    return e / (1.0 + e)


def conv1d_forward(const double[:, :, ::1] x, const double[:, :, ::1] W, const double[::1] b):
    cdef Py_ssize_t B = x.shape[0], C = x.shape[1], N = x.shape[2]
    cdef Py_ssize_t F = W.shape[0], K = W.shape[2]
    cdef Py_ssize_t L = N - K + 1
    cdef Py_ssize_t bb, f, c, l, i
    cdef double acc
    if W.shape[1] != C or b.shape[0] != F or L < 1:
        raise ValueError("conv1d_forward: shape mismatch")
    out = np.empty((B, F, L))
    cdef double[:, :, ::1] y = out
    with nogil:
        for bb in range(B):
            for f in range(F):
                for l in range(L):
                    acc = b[f]
                    for c in range(C):
                        for i in range(K):
                            acc = acc + W[f, c, i] * x[bb, c, l + i]
                    y[bb, f, l] = acc
    return out


def conv1d_backward(const double[:, :, ::1] x, const double[:, :, ::1] W, const double[:, :, ::1] dy):
    cdef Py_ssize_t B = x.shape[0], C = x.shape[1]
    cdef Py_ssize_t F = W.shape[0], K = W.shape[2], L = dy.shape[2]
    cdef Py_ssize_t bb, f, c, l, i
    cdef double acc
    dW_arr = np.empty((F, C, K))
    db_arr = np.empty(F)
    cdef double[:, :, ::1] dW = dW_arr
    cdef double[::1] db = db_arr
    with nogil:
        for f in range(F):
            acc = 0.0
            for bb in range(B):
                for l in range(L):
                    acc = acc + dy[bb, f, l]
            db[f] = acc
            for c in range(C):
                for i in range(K):
                    acc = 0.0
                    for bb in range(B):
                        for l in range(L):
                            acc = acc + dy[bb, f, l] * x[bb, c, l + i]
                    dW[f, c, i] = acc
    return dW_arr, db_arr


def maxpool_forward(const double[:, :, ::1] y, Py_ssize_t p):
    cdef Py_ssize_t B = y.shape[0], F = y.shape[1], L = y.shape[2]
    cdef Py_ssize_t lp = L // p
    cdef Py_ssize_t bb, f, w, j, best
    cdef double m
    out_arr = np.empty((B, F, lp))
    idx_arr = np.empty((B, F, lp), dtype=np.int64)
    cdef double[:, :, ::1] out = out_arr
    cdef long long[:, :, ::1] idx = idx_arr
    with nogil:
        for bb in range(B):
            for f in range(F):
                for w in range(lp):
                    best = w * p
                    m = y[bb, f, best]
                    for j in range(w * p + 1, w * p + p):
                        if y[bb, f, j] > m:
                            m = y[bb, f, j]
                            best = j
                    out[bb, f, w] = m
                    idx[bb, f, w] = best
    return out_arr, idx_arr


def maxpool_backward(const double[:, :, ::1] dout, const long long[:, :, ::1] idx, Py_ssize_t length):
    cdef Py_ssize_t B = dout.shape[0], F = dout.shape[1], lp = dout.shape[2]
    cdef Py_ssize_t bb, f, w
    dy_arr = np.zeros((B, F, length))
    cdef double[:, :, ::1] dy = dy_arr
    with nogil:
        for bb in range(B):
            for f in range(F):
                for w in range(lp):
                    dy[bb, f, idx[bb, f, w]] += dout[bb, f, w]
    return dy_arr


cdef inline void _axpy(double a, const double* x, double* y, Py_ssize_t n) noexcept nogil:
    # y += a * x over contiguous rows; the compiler vectorises this loop
    cdef Py_ssize_t j
    for j in range(n):
        y[j] += a * x[j]


def lstm_forward(const double[:, :, ::1] x, const double[:, ::1] W, const double[::1] bias):
    cdef Py_ssize_t B = x.shape[0], T = x.shape[1], D = x.shape[2]
    cdef Py_ssize_t G = W.shape[0], H = G // 4, U = H + D
    cdef Py_ssize_t bb, t, k, j
    cdef double f, ig, g, o, c, cp
    if W.shape[1] != U or bias.shape[0] != G or G != 4 * H:
        raise ValueError("lstm_forward: shape mismatch")
    # input-major weights so each input column updates all gate sums at once
    cdef double[:, ::1] WT = np.ascontiguousarray(np.asarray(W).T)
    hs_arr = np.zeros((B, T, H))
    cs_arr = np.zeros((B, T, H))
    tc_arr = np.zeros((B, T, H))
    gates_arr = np.zeros((B, T, G))
    zbuf_arr = np.empty(G)
    cdef double[:, :, ::1] hs = hs_arr
    cdef double[:, :, ::1] cs = cs_arr
    cdef double[:, :, ::1] tc = tc_arr
    cdef double[:, :, ::1] gates = gates_arr
    cdef double[::1] zb = zbuf_arr
    with nogil:
        for bb in range(B):
            for t in range(T):
                for k in range(G):
                    zb[k] = bias[k]
                if t > 0:
                    for j in range(H):
                        _axpy(hs[bb, t - 1, j], &WT[j, 0], &zb[0], G)
                for j in range(D):
                    _axpy(x[bb, t, j], &WT[H + j, 0], &zb[0], G)
                for k in range(H):
                    f = _sigmoid(zb[k])
                    ig = _sigmoid(zb[H + k])
                    g = tanh(zb[2 * H + k])
                    o = _sigmoid(zb[3 * H + k])
                    cp = cs[bb, t - 1, k] if t > 0 else 0.0
                    c = f * cp + ig * g
                    cs[bb, t, k] = c
                    tc[bb, t, k] = tanh(c)
                    hs[bb, t, k] = o * tc[bb, t, k]
                    gates[bb, t, k] = f
                    gates[bb, t, H + k] = ig
                    gates[bb, t, 2 * H + k] = g
                    gates[bb, t, 3 * H + k] = o
    return hs_arr, cs_arr, tc_arr, gates_arr


def lstm_backward(const double[:, :, ::1] dhs, const double[:, :, ::1] x, const double[:, ::1] W,
                  const double[:, :, ::1] gates, const double[:, :, ::1] cs, const double[:, :, ::1] tc,
                  const double[:, :, ::1] hs):
    cdef Py_ssize_t B = x.shape[0], T = x.shape[1], D = x.shape[2]
    cdef Py_ssize_t G = W.shape[0], H = G // 4, U = H + D
    cdef Py_ssize_t bb, t, k, j
    cdef double dh, do, dc, f, ig, g, o, tck, cp, dzk
    dx_arr = np.zeros((B, T, D))
    dW_arr = np.zeros((G, U))
    db_arr = np.zeros(G)
    dz_arr = np.empty(G)
    du_arr = np.empty(U)
    u_arr = np.empty(U)
    dcn_arr = np.empty(H)
    cdef double[:, :, ::1] dx = dx_arr
    cdef double[:, ::1] dW = dW_arr
    cdef double[::1] db = db_arr
    cdef double[::1] dz = dz_arr
    cdef double[::1] du = du_arr
    cdef double[::1] u = u_arr
    cdef double[::1] dc_next = dcn_arr
    with nogil:
        for bb in range(B):
            for k in range(H):
                du[k] = 0.0  # du[:H] carries dL/dh_prev between steps
                dc_next[k] = 0.0
            for t in range(T - 1, -1, -1):
                for k in range(H):
                    f = gates[bb, t, k]
                    ig = gates[bb, t, H + k]
                    g = gates[bb, t, 2 * H + k]
                    o = gates[bb, t, 3 * H + k]
                    tck = tc[bb, t, k]
                    cp = cs[bb, t - 1, k] if t > 0 else 0.0
                    dh = dhs[bb, t, k] + du[k]
                    do = dh * tck
                    dc = dc_next[k] + dh * o * (1.0 - tck * tck)
                    dz[k] = dc * cp * f * (1.0 - f)
                    dz[H + k] = dc * g * ig * (1.0 - ig)
                    dz[2 * H + k] = dc * ig * (1.0 - g * g)
                    dz[3 * H + k] = do * o * (1.0 - o)
                    dc_next[k] = dc * f
                for j in range(H):
                    u[j] = hs[bb, t - 1, j] if t > 0 else 0.0
                for j in range(D):
                    u[H + j] = x[bb, t, j]
                for j in range(U):
                    du[j] = 0.0
                for k in range(G):
                    dzk = dz[k]
                    db[k] += dzk
                    _axpy(dzk, &u[0], &dW[k, 0], U)
                    _axpy(dzk, &W[k, 0], &du[0], U)
                for j in range(D):
                    dx[bb, t, j] = du[H + j]
    return dx_arr, dW_arr, db_arr
