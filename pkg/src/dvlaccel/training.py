"""Loss/metric functions, optimizers and the mini-batch training loop."""

from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from ._rng import Stream
from .dataset import DatasetSplit, ExampleBatch, stack_examples
from .errors import ConfigError, DataError, DivergenceError
from .nn.checkpoint import ModelCheckpoint, Scaling, init_parameters
from .nn.config import ArchitectureConfig
from .nn.model import Network

log = logging.getLogger(__name__)


def _as_batch(x) -> np.ndarray:
    if isinstance(x, np.ndarray):
        arr = x.astype(np.float64, copy=False)
    else:
        arr = np.array([np.asarray(v, dtype=np.float64) for v in x])
    return arr.reshape(-1, 3) if arr.size else arr.reshape(0, 3)


def mse_loss(pred, target) -> float:
    """Mean over examples of the squared Euclidean error across the 3 axes."""
    p, t = _as_batch(pred), _as_batch(target)
    if p.shape != t.shape:
        raise DataError(f"batch size mismatch: {p.shape} vs {t.shape}")
    if p.shape[0] == 0:
        raise DataError("mse_loss of an empty batch")
    d = p - t
    return float(np.sum(d * d) / p.shape[0])


def rmse(pred, target) -> float:
    return math.sqrt(mse_loss(pred, target))


class SGD:
    def __init__(self, lr: float) -> None:
        self.lr = lr

    def step(self, params: np.ndarray, grad: np.ndarray) -> None:
        params -= self.lr * grad


class Adam:
    def __init__(self, lr: float, beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8) -> None:
        self.lr, self.beta1, self.beta2, self.eps = lr, beta1, beta2, eps
        self.t = 0
        self.m: np.ndarray | None = None
        self.v: np.ndarray | None = None

    def step(self, params: np.ndarray, grad: np.ndarray) -> None:
        if self.m is None:
            self.m = np.zeros_like(params)
            self.v = np.zeros_like(params)
        self.t += 1
        self.m *= self.beta1
        self.m += (1.0 - self.beta1) * grad
        self.v *= self.beta2
        self.v += (1.0 - self.beta2) * (grad * grad)
        m_hat = self.m / (1.0 - self.beta1**self.t)
        v_hat = self.v / (1.0 - self.beta2**self.t)
        params -= self.lr * m_hat / (np.sqrt(v_hat) + self.eps)


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 30
    batch_size: int = 16
    learning_rate: float = 0.001
    optimizer: str = "adam"
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    shuffle_seed: int = 0
    init_seed: int = 0
    # fit Scaling on the training split (window-relative centring + per-axis std)
    standardize: bool = True
    backend: str | None = None

    def __post_init__(self) -> None:
        if self.epochs < 1 or self.batch_size < 1:
            raise ConfigError("epochs and batch_size must be >= 1")
        if not (math.isfinite(self.learning_rate) and self.learning_rate >= 0):
            raise ConfigError(f"learning_rate must be finite and >= 0, got {self.learning_rate}")
        if self.optimizer not in ("adam", "sgd"):
            raise ConfigError(f"optimizer must be 'adam' or 'sgd', got {self.optimizer!r}")

    def make_optimizer(self):
        if self.optimizer == "sgd":
            return SGD(self.learning_rate)
        return Adam(self.learning_rate, self.beta1, self.beta2, self.eps)

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> TrainConfig:
        unknown = set(d) - set(cls.__dataclass_fields__)
        if unknown:
            raise ConfigError(f"unknown train fields: {sorted(unknown)}")
        return cls(**d)


@dataclass
class LossHistory:
    """Per-epoch mean MSE. ``val_loss`` is empty when there is no validation set."""

    train_loss: list[float] = field(default_factory=list)
    val_loss: list[float] = field(default_factory=list)

    @property
    def epochs(self) -> int:
        return len(self.train_loss)

    def to_csv(self) -> str:
        lines = ["epoch,train_loss,val_loss"]
        for e, tl in enumerate(self.train_loss, start=1):
            vl = repr(self.val_loss[e - 1]) if self.val_loss else ""
            lines.append(f"{e},{tl!r},{vl}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_csv(cls, text: str) -> LossHistory:
        rows = [r for r in text.splitlines() if r.strip()]
        if not rows or rows[0].strip() != "epoch,train_loss,val_loss":
            raise DataError("loss history CSV must start with 'epoch,train_loss,val_loss'")
        hist = cls()
        for r in rows[1:]:
            _, tl, vl = r.split(",")
            hist.train_loss.append(float(tl))
            if vl.strip():
                hist.val_loss.append(float(vl))
        return hist

    def write_csv(self, path) -> Path:
        path = Path(path)
        path.write_text(self.to_csv(), encoding="utf-8")
        return path


def fit_scaling(batch: ExampleBatch) -> Scaling:
    """Window-relative input centring and per-axis scaling from training data.

    Inputs are divided by the spread of the centred velocities; outputs by the
    root-mean-square target, which stays informative even for a single example.
    Axes with no measurable spread keep unit scale.
    """
    x = batch.inputs
    rel = x - x[:, :, -1:]
    in_scale = rel[:, :, :-1].std(axis=(0, 2))
    out_scale = np.sqrt(np.mean(batch.targets**2, axis=0))
    floor = 1e-9
    return Scaling(
        center_last=True,
        shift=(0.0, 0.0, 0.0),
        scale=tuple(float(s) if s > floor else 1.0 for s in in_scale),
        output_scale=tuple(float(s) if s > floor else 1.0 for s in out_scale),
    )


def evaluate_loss(net: Network, batch: ExampleBatch) -> float:
    return mse_loss(net.predict(batch.inputs), batch.targets)


def train(
    split: DatasetSplit,
    arch: ArchitectureConfig,
    cfg: TrainConfig = TrainConfig(),
    checkpoint: ModelCheckpoint | None = None,
) -> tuple[ModelCheckpoint, LossHistory]:
    """Train from ``checkpoint`` (or a fresh init) and return the final-epoch model."""
    if not split.train:
        raise DataError("training set is empty")
    data = stack_examples(split.train)
    if data.times.shape[1] != arch.window:
        raise DataError(f"examples have window {data.times.shape[1]}, architecture expects {arch.window}")
    val = stack_examples(split.validation) if split.validation else None
    if checkpoint is None:
        scaling = fit_scaling(data) if cfg.standardize else Scaling()
        checkpoint = init_parameters(arch, cfg.init_seed, scaling)
    else:
        checkpoint = checkpoint.copy()
    net = Network(checkpoint, cfg.backend)
    opt = cfg.make_optimizer()
    x_all, y_all = data.inputs, data.targets
    n = len(data)
    history = LossHistory()
    for epoch in range(cfg.epochs):
        order = Stream(cfg.shuffle_seed, 6, epoch).permutation(n)
        total = 0.0
        for b, start in enumerate(range(0, n, cfg.batch_size)):
            idx = order[start : start + cfg.batch_size]
            loss, grad = net.loss_and_grad(x_all[idx], y_all[idx])
            if not (math.isfinite(loss) and np.all(np.isfinite(grad))):
                raise DivergenceError(epoch + 1, b + 1, loss)
            opt.step(checkpoint.flat, grad)
            total += loss * len(idx)
        history.train_loss.append(total / n)
        if val is not None:
            vl = evaluate_loss(net, val)
            if not math.isfinite(vl):
                raise DivergenceError(epoch + 1, -1, vl)
            history.val_loss.append(vl)
        log.info(
            "epoch %d/%d train %.6g%s",
            epoch + 1,
            cfg.epochs,
            history.train_loss[-1],
            f" val {history.val_loss[-1]:.6g}" if val is not None else "",
        )
    return checkpoint, history


def predict_examples(checkpoint: ModelCheckpoint, examples: Sequence, backend: str | None = None) -> np.ndarray:
    batch = stack_examples(list(examples))
    return Network(checkpoint, backend).predict(batch.inputs)
