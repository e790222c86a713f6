"""Learnable parameters, input/output scaling, and the checkpoint file."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from .._rng import Stream
from ..errors import ConfigError, DataError
from .config import ArchitectureConfig

FORMAT = "dvlaccel-checkpoint"
VERSION = 1


@dataclass(frozen=True)
class Scaling:
    """Fixed affine maps around the network.

    Input: ``(x - anchor - shift) / scale`` per axis, where ``anchor`` is the
    window's last sample when ``center_last`` is set and 0 otherwise.
    Output: ``prediction = output_scale * raw``.
    """

    center_last: bool = False
    shift: tuple[float, float, float] = (0.0, 0.0, 0.0)
    scale: tuple[float, float, float] = (1.0, 1.0, 1.0)
    output_scale: tuple[float, float, float] = (1.0, 1.0, 1.0)

    def __post_init__(self) -> None:
        for name in ("shift", "scale", "output_scale"):
            v = tuple(float(x) for x in getattr(self, name))
            if len(v) != 3 or not all(math.isfinite(x) for x in v):
                raise ConfigError(f"{name} must be three finite numbers, got {v}")
            object.__setattr__(self, name, v)
        if any(s <= 0 for s in self.scale + self.output_scale):
            raise ConfigError("scales must be positive")

    def to_dict(self) -> dict[str, Any]:
        return {
            "center_last": self.center_last,
            "shift": list(self.shift),
            "scale": list(self.scale),
            "output_scale": list(self.output_scale),
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> Scaling:
        return cls(**d)


class ModelCheckpoint:
    """All parameters in one flat float64 buffer with named views.

    Views are laid out in :meth:`ArchitectureConfig.shapes` order, so the four
    gate matrices (and biases) of one LSTM layer are adjacent and can be
    addressed as a single stacked block via :meth:`lstm_block`.
    """

    def __init__(self, arch: ArchitectureConfig, flat: np.ndarray | None = None, scaling: Scaling = Scaling()) -> None:
        self.arch = arch
        self.scaling = scaling
        shapes = arch.shapes()
        self._offsets: dict[str, tuple[int, tuple[int, ...]]] = {}
        pos = 0
        for name, shape in shapes.items():
            self._offsets[name] = (pos, shape)
            pos += int(np.prod(shape))
        if flat is None:
            flat = np.zeros(pos)
        flat = np.array(flat, dtype=np.float64, copy=True)
        if flat.shape != (pos,):
            raise ConfigError(f"expected {pos} parameters, got {flat.shape}")
        self.flat = flat

    @property
    def size(self) -> int:
        return self.flat.shape[0]

    def names(self) -> list[str]:
        return list(self._offsets)

    def slice(self, name: str) -> slice:
        start, shape = self._offsets[name]
        return slice(start, start + int(np.prod(shape)))

    def view(self, name: str, flat: np.ndarray | None = None) -> np.ndarray:
        buf = self.flat if flat is None else flat
        _, shape = self._offsets[name]
        return buf[self.slice(name)].reshape(shape)

    def __getitem__(self, name: str) -> np.ndarray:
        return self.view(name)

    @property
    def params(self) -> dict[str, np.ndarray]:
        return {n: self.view(n) for n in self._offsets}

    def lstm_block(self, layer: int, flat: np.ndarray | None = None) -> tuple[np.ndarray, np.ndarray]:
        """Stacked (4H, H+D) weights and (4H,) biases, gate order f, i, C, o."""
        buf = self.flat if flat is None else flat
        p = f"lstm{layer + 1}"
        H = self.arch.lstm_hidden
        w0 = self.slice(f"{p}.W_f").start
        w1 = self.slice(f"{p}.W_o").stop
        b0 = self.slice(f"{p}.b_f").start
        b1 = self.slice(f"{p}.b_o").stop
        return buf[w0:w1].reshape(4 * H, -1), buf[b0:b1]

    def copy(self) -> ModelCheckpoint:
        return ModelCheckpoint(self.arch, self.flat, self.scaling)

    def with_scaling(self, scaling: Scaling) -> ModelCheckpoint:
        return ModelCheckpoint(self.arch, self.flat, scaling)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ModelCheckpoint):
            return NotImplemented
        return self.arch == other.arch and self.scaling == other.scaling and np.array_equal(self.flat, other.flat)

    # -- persistence --

    def to_json(self) -> str:
        doc = {
            "format": FORMAT,
            "version": VERSION,
            "architecture": self.arch.to_dict(),
            "scaling": self.scaling.to_dict(),
            "parameters": {
                name: {"shape": list(shape), "values": self.view(name).ravel().tolist()}
                for name, (_, shape) in self._offsets.items()
            },
        }
        # json writes floats with repr(), the shortest exact round-trip form
        return json.dumps(doc, indent=1) + "\n"

    def save(self, path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(self.to_json(), encoding="utf-8")
        return path

    @classmethod
    def from_json(cls, text: str, source: str = "<string>") -> ModelCheckpoint:
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise DataError(f"{source}: not a checkpoint file: {exc}") from None
        if doc.get("format") != FORMAT:
            raise DataError(f"{source}: not a {FORMAT} file")
        if doc.get("version") != VERSION:
            raise DataError(f"{source}: unsupported checkpoint version {doc.get('version')!r}")
        arch = ArchitectureConfig.from_dict(doc["architecture"])
        ckpt = cls(arch, scaling=Scaling.from_dict(doc["scaling"]))
        params = doc["parameters"]
        missing = set(ckpt.names()) - set(params)
        if missing:
            raise DataError(f"{source}: missing parameters {sorted(missing)}")
        for name in ckpt.names():
            entry = params[name]
            expected = list(ckpt._offsets[name][1])
            if list(entry["shape"]) != expected:
                raise DataError(f"{source}: {name} has shape {entry['shape']}, architecture needs {expected}")
            values = np.array(entry["values"], dtype=np.float64)
            if values.size != int(np.prod(expected)) or not np.all(np.isfinite(values)):
                raise DataError(f"{source}: {name} has wrong size or non-finite values")
            ckpt.flat[ckpt.slice(name)] = values
        return ckpt

    @classmethod
    def load(cls, path) -> ModelCheckpoint:
        path = Path(path)
        try:
            text = path.read_text(encoding="utf-8")
        except FileNotFoundError:
            raise DataError(f"checkpoint not found: {path}") from None
        return cls.from_json(text, source=str(path))


def init_parameters(arch: ArchitectureConfig, seed: int, scaling: Scaling = Scaling()) -> ModelCheckpoint:
    """Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) weights, zero biases, forget bias 1."""
    ckpt = ModelCheckpoint(arch, scaling=scaling)
    stream = Stream(seed, 5)
    for name in ckpt.names():
        leaf = name.split(".")[1]
        if leaf.startswith("W"):
            bound = 1.0 / math.sqrt(arch.fan_in(name))
            ckpt.flat[ckpt.slice(name)] = stream.uniform(ckpt.view(name).size, -bound, bound)
        elif leaf == "b_f":
            ckpt.flat[ckpt.slice(name)] = 1.0
    return ckpt
