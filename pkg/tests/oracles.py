"""Independent reference computations used only by the tests.

Everything here is written as plain scalar loops or generic linear algebra,
deliberately sharing no code with the package's kernels.
"""

import math

import numpy as np


def ls_slope_pinv(times, velocities):
    """Affine fit via the pseudoinverse of the n x 2 design matrix [1, d]."""
    d = np.asarray(times, dtype=float) - times[0]
    A = np.column_stack([np.ones_like(d), d])
    return (np.linalg.pinv(A) @ np.asarray(velocities, dtype=float))[1]


def conv1d(x, w, b):
    C, N = len(x), len(x[0])
    F, K = len(w), len(w[0][0])
    out = [[0.0] * (N - K + 1) for _ in range(F)]
    for f in range(F):
        for t in range(N - K + 1):
            s = 0.0
            for c in range(C):
                for i in range(1, K + 1):
                    s += w[f][c][i - 1] * x[c][t + i - 1]
            out[f][t] = s + b[f]
    return np.array(out)


def leaky_relu(z, alpha=0.01):
    return z if z >= 0 else alpha * z


def maxpool(x, p=3):
    out = []
    for row in x:
        out.append([max(row[t * p + m] for m in range(p)) for t in range(len(row) // p)])
    return np.array(out)


def _sig(z):
    return 1.0 / (1.0 + math.exp(-z))


def lstm_step(h_prev, c_prev, y, Wf, Wi, Wc, Wo, bf, bi, bc, bo):
    """One step of the gated recurrence with concatenated input [h_prev, y]."""
    u = list(h_prev) + list(y)
    H = len(h_prev)

    def affine(W, b, k):
        return sum(W[k][j] * u[j] for j in range(len(u))) + b[k]

    h, c = [0.0] * H, [0.0] * H
    for k in range(H):
        f = _sig(affine(Wf, bf, k))
        i = _sig(affine(Wi, bi, k))
        ct = math.tanh(affine(Wc, bc, k))
        o = _sig(affine(Wo, bo, k))
        c[k] = f * c_prev[k] + i * ct
        h[k] = o * math.tanh(c[k])
    return np.array(h), np.array(c)


def lstm_sequence(seq, params):
    H = len(params[-1])
    h, c = [0.0] * H, [0.0] * H
    hs = []
    for y in seq:
        h, c = lstm_step(h, c, y, *params)
        hs.append(h)
    return np.array(hs), h, c


def central_difference(fun, theta, step=1e-5):
    theta = np.array(theta, dtype=float)
    g = np.empty_like(theta)
    for k in range(theta.size):
        orig = theta[k]
        theta[k] = orig + step
        fp = fun(theta)
        theta[k] = orig - step
        fm = fun(theta)
        theta[k] = orig
        g[k] = (fp - fm) / (2 * step)
    return g


def grad_agrees(analytic, numeric, rtol=1e-4, atol=1e-8):
    """Elementwise: absolute error under the floor, or relative error under rtol."""
    err = np.abs(analytic - numeric)
    scale = np.maximum(np.abs(analytic), np.abs(numeric))
    ok = (err <= atol) | (err <= rtol * scale)
    rel = np.where(scale > 0, err / np.where(scale > 0, scale, 1), 0.0)
    return bool(ok.all()), float(np.max(np.where(err > atol, rel, 0.0)))


def checkpoint_fd_gradient(checkpoint, x, target, indices, step=1e-5, backend=None):
    """Central differences of the single-batch MSE w.r.t. selected flat parameters."""
    from dvlaccel.nn.model import Network

    net = Network(checkpoint, backend)
    flat = checkpoint.flat

    def loss():
        d = net.forward(x) - target
        return float(np.sum(d * d) / d.shape[0])

    out = np.empty(len(indices))
    for n, k in enumerate(indices):
        orig = flat[k]
        flat[k] = orig + step
        fp = loss()
        flat[k] = orig - step
        fm = loss()
        flat[k] = orig
        out[n] = (fp - fm) / (2 * step)
    return out
