"""Single-example layer operations on unbatched arrays.

Thin wrappers over the active kernel backend, convenient for inspection
and for checking each layer on its own.
"""

from __future__ import annotations

import numpy as np

from ..errors import DataError
from . import _backend
from .config import LEAKY_SLOPE, POOL


def _c(a) -> np.ndarray:
    return np.ascontiguousarray(a, dtype=np.float64)


def conv1d_forward(x, weights, biases, backend: str | None = None) -> np.ndarray:
    """(C, N) input, (F, C, K) weights, (F,) biases -> (F, N - K + 1)."""
    x, w, b = _c(x), _c(weights), _c(biases)
    if x.ndim != 2 or w.ndim != 3 or w.shape[1] != x.shape[0] or b.shape != (w.shape[0],):
        raise DataError(f"conv1d shape mismatch: x {x.shape}, weights {w.shape}, biases {b.shape}")
    if x.shape[1] < w.shape[2]:
        raise DataError(f"input length {x.shape[1]} shorter than kernel {w.shape[2]}")
    return _backend.get(backend).conv1d_forward(x[None], w, b)[0]


def leaky_relu(x, slope: float = LEAKY_SLOPE):
    x = np.asarray(x, dtype=np.float64)
    out = np.where(x >= 0, x, slope * x)
    return float(out) if out.ndim == 0 else out


def maxpool1d_forward(x, pool: int = POOL, backend: str | None = None) -> tuple[np.ndarray, np.ndarray]:
    """(F, L) -> (F, L // pool) maxima and their absolute indices."""
    x = _c(x)
    if x.ndim != 2:
        raise DataError(f"maxpool expects (F, L), got {x.shape}")
    if x.shape[1] < pool:
        raise DataError(f"maxpool input length {x.shape[1]} < pool size {pool}")
    out, idx = _backend.get(backend).maxpool_forward(x[None], pool)
    return out[0], idx[0]


def lstm_forward(seq, W, b, backend: str | None = None):
    """Run one LSTM layer from zero state.

    ``seq`` is (T, D); ``W`` is the stacked (4H, H + D) gate matrix in gate
    order forget, input, candidate, output, multiplying ``[h_prev, x_t]``;
    ``b`` is (4H,). Returns the (T, H) hidden sequence and the final
    ``(h, C)``.
    """
    seq, W, b = _c(seq), _c(W), _c(b)
    if seq.ndim != 2 or W.ndim != 2 or W.shape[0] % 4 or W.shape[1] != W.shape[0] // 4 + seq.shape[1]:
        raise DataError(f"lstm shape mismatch: seq {seq.shape}, W {W.shape}")
    if b.shape != (W.shape[0],):
        raise DataError(f"lstm bias shape {b.shape}, expected ({W.shape[0]},)")
    hs, cs, _, _ = _backend.get(backend).lstm_forward(seq[None], W, b)
    return hs[0], (hs[0, -1].copy(), cs[0, -1].copy())


def stack_gates(W_f, W_i, W_C, W_o, b_f, b_i, b_C, b_o) -> tuple[np.ndarray, np.ndarray]:
    return np.concatenate([W_f, W_i, W_C, W_o]), np.concatenate([b_f, b_i, b_C, b_o])
