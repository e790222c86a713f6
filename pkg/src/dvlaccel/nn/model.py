"""Forward pass and exact reverse-mode gradients for the CNN-LSTM."""

from __future__ import annotations

import numpy as np

from ..errors import DataError
from ..types import AccelerationVector, VelocityWindow
from . import _backend
from .checkpoint import ModelCheckpoint


def leaky(z: np.ndarray, slope: float) -> np.ndarray:
    return np.where(z >= 0, z, slope * z)


class Network:
    """Batched evaluator bound to one checkpoint.

    Inputs are (B, 3, N) velocity windows in m/s. :meth:`forward` caches the
    intermediates that :meth:`backward` needs; gradients come back as a flat
    vector in the checkpoint's parameter layout. The checkpoint's ``flat``
    buffer may be updated in place between calls (the optimizer does this).
    """

    def __init__(self, checkpoint: ModelCheckpoint, backend: str | None = None) -> None:
        self.ckpt = checkpoint
        self.arch = checkpoint.arch
        self.k = _backend.get(backend)
        self._cache: dict | None = None

    def _scaled_input(self, x: np.ndarray) -> np.ndarray:
        s = self.ckpt.scaling
        if s.center_last:
            x = x - x[:, :, -1:]
        return np.ascontiguousarray((x - np.array(s.shift)[None, :, None]) / np.array(s.scale)[None, :, None])

    def forward(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        a = self.arch
        if x.ndim != 3 or x.shape[1:] != (a.in_channels, a.window):
            raise DataError(f"network expects input of shape (B, {a.in_channels}, {a.window}), got {x.shape}")
        k, c, slope = self.k, self.ckpt, a.leaky_slope
        x0 = self._scaled_input(x)
        conv_pre = k.conv1d_forward(x0, np.ascontiguousarray(c["conv.W"]), np.ascontiguousarray(c["conv.b"]))
        conv_act = leaky(conv_pre, slope)
        pooled, pool_idx = k.maxpool_forward(conv_act, a.pool)
        seq = np.ascontiguousarray(pooled.transpose(0, 2, 1))  # (B, T, F)
        lstm_caches = []
        for layer in range(a.lstm_layers):
            W, b = c.lstm_block(layer)
            hs, cs, tc, gates = k.lstm_forward(seq, np.ascontiguousarray(W), np.ascontiguousarray(b))
            lstm_caches.append((seq, W, gates, cs, tc, hs))
            seq = hs
        h_last = seq[:, -1, :]
        fc1_pre = h_last @ c["fc1.W"].T + c["fc1.b"]
        fc1_act = leaky(fc1_pre, slope)
        raw = fc1_act @ c["fc2.W"].T + c["fc2.b"]
        out = raw * np.array(c.scaling.output_scale)
        self._cache = dict(
            x0=x0,
            conv_pre=conv_pre,
            pool_idx=pool_idx,
            lstm=lstm_caches,
            h_last=h_last,
            fc1_pre=fc1_pre,
            fc1_act=fc1_act,
        )
        return out

    __call__ = forward

    def backward(self, d_out: np.ndarray) -> np.ndarray:
        """Gradient of a scalar loss given dL/d(output), shape (B, 3)."""
        if self._cache is None:
            raise RuntimeError("backward() called without a preceding forward()")
        cache, k, c, a = self._cache, self.k, self.ckpt, self.arch
        slope = a.leaky_slope
        grad = np.zeros_like(c.flat)
        d_raw = np.asarray(d_out, dtype=np.float64) * np.array(c.scaling.output_scale)

        grad[c.slice("fc2.W")] = (d_raw.T @ cache["fc1_act"]).ravel()
        grad[c.slice("fc2.b")] = d_raw.sum(axis=0)
        d_fc1 = (d_raw @ c["fc2.W"]) * np.where(cache["fc1_pre"] >= 0, 1.0, slope)
        grad[c.slice("fc1.W")] = (d_fc1.T @ cache["h_last"]).ravel()
        grad[c.slice("fc1.b")] = d_fc1.sum(axis=0)
        d_h = d_fc1 @ c["fc1.W"]

        top = cache["lstm"][-1]
        d_seq = np.zeros_like(top[5])
        d_seq[:, -1, :] = d_h
        for layer in range(a.lstm_layers - 1, -1, -1):
            seq_in, W, gates, cs, tc, hs = cache["lstm"][layer]
            d_seq, dW, db = k.lstm_backward(
                np.ascontiguousarray(d_seq), seq_in, np.ascontiguousarray(W), gates, cs, tc, hs
            )
            p = f"lstm{layer + 1}"
            grad[c.slice(f"{p}.W_f").start : c.slice(f"{p}.W_o").stop] = dW.ravel()
            grad[c.slice(f"{p}.b_f").start : c.slice(f"{p}.b_o").stop] = db

        d_pooled = np.ascontiguousarray(d_seq.transpose(0, 2, 1))
        d_conv_act = k.maxpool_backward(d_pooled, cache["pool_idx"], a.conv_length)
        d_conv = np.ascontiguousarray(d_conv_act * np.where(cache["conv_pre"] >= 0, 1.0, slope))
        dW, db = k.conv1d_backward(cache["x0"], np.ascontiguousarray(c["conv.W"]), d_conv)
        grad[c.slice("conv.W")] = dW.ravel()
        grad[c.slice("conv.b")] = db
        return grad

    def loss_and_grad(self, x: np.ndarray, targets: np.ndarray) -> tuple[float, np.ndarray]:
        """Batch MSE (mean over examples of squared 3-axis error) and its gradient."""
        pred = self.forward(x)
        diff = pred - targets
        n = diff.shape[0]
        loss = float(np.sum(diff * diff) / n)
        return loss, self.backward(2.0 * diff / n)

    def predict(self, x: np.ndarray, batch_size: int = 512) -> np.ndarray:
        """Forward only, in chunks; leaves no cache behind."""
        x = np.asarray(x, dtype=np.float64)
        outs = [self.forward(x[i : i + batch_size]) for i in range(0, x.shape[0], batch_size)]
        self._cache = None
        return np.concatenate(outs) if outs else np.zeros((0, 3))


def model_forward(window: VelocityWindow, checkpoint: ModelCheckpoint, backend: str | None = None) -> AccelerationVector:
    if len(window) != checkpoint.arch.window:
        raise DataError(f"window has {len(window)} samples, checkpoint expects {checkpoint.arch.window}")
    return AccelerationVector(Network(checkpoint, backend).forward(window.matrix[None])[0])


def model_backward(
    window: VelocityWindow, checkpoint: ModelCheckpoint, target, backend: str | None = None
) -> dict[str, np.ndarray]:
    """Per-parameter gradient of the single-example squared error."""
    if len(window) != checkpoint.arch.window:
        raise DataError(f"window has {len(window)} samples, checkpoint expects {checkpoint.arch.window}")
    net = Network(checkpoint, backend)
    _, grad = net.loss_and_grad(window.matrix[None], np.asarray(target, dtype=np.float64).reshape(1, 3))
    return {name: checkpoint.view(name, grad).copy() for name in checkpoint.names()}
