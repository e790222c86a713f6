from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Any

from ..errors import ConfigError

# fixed by the architecture; everything else is a knob
KERNEL = 3
POOL = 3
LEAKY_SLOPE = 0.01
LSTM_HIDDEN = 32
LSTM_LAYERS = 2


@dataclass(frozen=True)
class ArchitectureConfig:
    """Conv1D -> LeakyReLU -> MaxPool -> LSTM x2 -> FC -> LeakyReLU -> FC."""

    window: int = 12
    in_channels: int = 3
    conv_filters: int = 32
    kernel: int = KERNEL
    leaky_slope: float = LEAKY_SLOPE
    pool: int = POOL
    lstm_hidden: int = LSTM_HIDDEN
    lstm_layers: int = LSTM_LAYERS
    fc_hidden: int = 16
    output: int = 3

    def __post_init__(self) -> None:
        fixed = {
            "kernel": KERNEL,
            "pool": POOL,
            "leaky_slope": LEAKY_SLOPE,
            "lstm_hidden": LSTM_HIDDEN,
            "lstm_layers": LSTM_LAYERS,
            "in_channels": 3,
            "output": 3,
        }
        for name, value in fixed.items():
            if getattr(self, name) != value:
                raise ConfigError(f"{name} is fixed at {value}, got {getattr(self, name)!r}")
        if self.conv_filters < 1 or self.fc_hidden < 1:
            raise ConfigError("conv_filters and fc_hidden must be positive")
        if self.conv_length < self.pool:
            raise ConfigError(
                f"window {self.window} too short: conv output {self.conv_length} < pool size {self.pool}"
            )

    @property
    def conv_length(self) -> int:
        return self.window - self.kernel + 1

    @property
    def steps(self) -> int:
        """LSTM sequence length after pooling."""
        return self.conv_length // self.pool

    def lstm_input(self, layer: int) -> int:
        return self.conv_filters if layer == 0 else self.lstm_hidden

    def shapes(self) -> dict[str, tuple[int, ...]]:
        """Parameter names and shapes in storage order."""
        F, H = self.conv_filters, self.lstm_hidden
        out: dict[str, tuple[int, ...]] = {
            "conv.W": (F, self.in_channels, self.kernel),
            "conv.b": (F,),
        }
        for layer in range(self.lstm_layers):
            width = H + self.lstm_input(layer)
            for gate in ("f", "i", "C", "o"):
                out[f"lstm{layer + 1}.W_{gate}"] = (H, width)
            for gate in ("f", "i", "C", "o"):
                out[f"lstm{layer + 1}.b_{gate}"] = (H,)
        out["fc1.W"] = (self.fc_hidden, H)
        out["fc1.b"] = (self.fc_hidden,)
        out["fc2.W"] = (self.output, self.fc_hidden)
        out["fc2.b"] = (self.output,)
        return out

    def fan_in(self, name: str) -> int:
        shape = self.shapes()[name]
        if name == "conv.W":
            return shape[1] * shape[2]
        return shape[1]

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> ArchitectureConfig:
        unknown = set(d) - set(cls.__dataclass_fields__)
        if unknown:
            raise ConfigError(f"unknown architecture fields: {sorted(unknown)}")
        return cls(**d)
