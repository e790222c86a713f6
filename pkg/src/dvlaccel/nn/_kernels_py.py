"""Pure-NumPy kernels. Reference backend and fallback for the Cython build.

Shapes use a leading batch axis B. LSTM gate blocks are stacked in the
order forget, input, candidate, output along the first axis of ``W``,
and ``W`` multiplies the concatenation ``[h_prev, x_t]``.
"""

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

NAME = "python"


def sigmoid(z):
    e = np.exp(-np.abs(z))
    return np.where(z >= 0, 1.0 / (1.0 + e), e / (1.0 + e))


def conv1d_forward(x, W, b):
    k = W.shape[2]
    win = sliding_window_view(x, k, axis=2)  # (B, C, L, K)
    y = np.tensordot(win, W, axes=([1, 3], [1, 2]))  # (B, L, F)
    return np.ascontiguousarray(y.transpose(0, 2, 1)) + b[None, :, None]


def conv1d_backward(x, W, dy):
    k = W.shape[2]
    win = sliding_window_view(x, k, axis=2)
    dW = np.tensordot(dy, win, axes=([0, 2], [0, 2]))  # (F, C, K)
    db = dy.sum(axis=(0, 2))
    return np.ascontiguousarray(dW), db


def maxpool_forward(y, p):
    B, F, L = y.shape
    lp = L // p
    blocks = y[:, :, : lp * p].reshape(B, F, lp, p)
    am = blocks.argmax(axis=3)
    idx = am + (np.arange(lp) * p)[None, None, :]
    out = np.take_along_axis(y, idx, axis=2)
    return out, idx.astype(np.int64)


def maxpool_backward(dout, idx, length):
    B, F, _ = dout.shape
    dy = np.zeros((B, F, length))
    np.put_along_axis(dy, idx, dout, axis=2)
    return dy


def lstm_forward(x, W, bias):
    B, T, D = x.shape
    H = W.shape[0] // 4
    hs = np.zeros((B, T, H))
    cs = np.zeros((B, T, H))
    tc = np.zeros((B, T, H))
    gates = np.zeros((B, T, 4 * H))
    h = np.zeros((B, H))
    c = np.zeros((B, H))
    Wh, Wx = W[:, :H], W[:, H:]
    for t in range(T):
        z = h @ Wh.T + x[:, t, :] @ Wx.T + bias
        f = sigmoid(z[:, :H])
        i = sigmoid(z[:, H : 2 * H])
        g = np.tanh(z[:, 2 * H : 3 * H])
        o = sigmoid(z[:, 3 * H :])
        c = f * c + i * g
        tch = np.tanh(c)
        h = o * tch
        gates[:, t, :H] = f
        gates[:, t, H : 2 * H] = i
        gates[:, t, 2 * H : 3 * H] = g
        gates[:, t, 3 * H :] = o
        cs[:, t] = c
        tc[:, t] = tch
        hs[:, t] = h
    return hs, cs, tc, gates


def lstm_backward(dhs, x, W, gates, cs, tc, hs):
    B, T, D = x.shape
    H = W.shape[0] // 4
    Wh, Wx = W[:, :H], W[:, H:]
    dWh = np.zeros_like(Wh)
    dWx = np.zeros_like(Wx)
    db = np.zeros(4 * H)
    dx = np.zeros_like(x)
    dh_next = np.zeros((B, H))
    dc_next = np.zeros((B, H))
    for t in range(T - 1, -1, -1):
        f = gates[:, t, :H]
        i = gates[:, t, H : 2 * H]
        g = gates[:, t, 2 * H : 3 * H]
        o = gates[:, t, 3 * H :]
        c_prev = cs[:, t - 1] if t > 0 else np.zeros((B, H))
        h_prev = hs[:, t - 1] if t > 0 else np.zeros((B, H))
        dh = dhs[:, t] + dh_next
        do = dh * tc[:, t]
        dc = dc_next + dh * o * (1.0 - tc[:, t] ** 2)
        dz = np.concatenate(
            [
                dc * c_prev * f * (1.0 - f),
                dc * g * i * (1.0 - i),
                dc * i * (1.0 - g * g),
                do * o * (1.0 - o),
            ],
            axis=1,
        )
        dc_next = dc * f
        dWh += dz.T @ h_prev
        dWx += dz.T @ x[:, t, :]
        db += dz.sum(axis=0)
        dh_next = dz @ Wh
        dx[:, t, :] = dz @ Wx
    return dx, np.concatenate([dWh, dWx], axis=1), db
