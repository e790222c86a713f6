"""Declarative run configuration (JSON)."""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any

import numpy as np

from .dataset import DEFAULT_WINDOW, AugmentationParams
from .errors import ConfigError
from .nn.config import ArchitectureConfig
from .simulator import DEFAULT_DURATION, DEFAULT_RATE, DvlErrorModel, FleetRanges, ManeuverProfile
from .training import TrainConfig


def derive_seed(seed: int, *tags: int) -> int:
    """Independent 32-bit sub-seed for a (root seed, tag path)."""
    return int(np.random.SeedSequence([int(seed), *tags]).generate_state(1)[0])


@dataclass
class RunConfig:
    """Everything one pipeline run depends on.

    Profiles come either from ``train_profiles``/``test_profiles`` or, when
    those are empty, from :func:`~dvlaccel.simulator.random_fleet` with
    ``n_train``/``n_test`` draws. ``segment_files`` replaces simulation by
    existing CSVs (``{"train": [...], "test": [...]}``).
    """

    seed: int = 7
    out: str = "runs/default"
    window: int = DEFAULT_WINDOW
    duration: float = DEFAULT_DURATION
    rate: float = DEFAULT_RATE
    dvl_errors: DvlErrorModel = field(default_factory=DvlErrorModel)
    n_train: int = 10
    n_test: int = 3
    fleet_ranges: FleetRanges = field(default_factory=FleetRanges)
    train_profiles: list[ManeuverProfile] = field(default_factory=list)
    test_profiles: list[ManeuverProfile] = field(default_factory=list)
    segment_files: dict[str, list[str]] | None = None
    augmentation: AugmentationParams = field(default_factory=AugmentationParams)
    augment_copies: int = 1
    validation_fraction: float = 0.2
    architecture: ArchitectureConfig = field(default_factory=ArchitectureConfig)
    train: TrainConfig | None = None
    report_format: str = "json"
    trace_segment: int = 0

    def __post_init__(self) -> None:
        if self.report_format not in ("csv", "json"):
            raise ConfigError(f"report_format must be 'csv' or 'json', got {self.report_format!r}")
        if self.architecture.window != self.window:
            self.architecture = replace(self.architecture, window=self.window)
        if self.augment_copies not in (0, 1):
            raise ConfigError("augment_copies must be 0 or 1")
        if self.seed < 0:
            raise ConfigError("seed must be non-negative")
        if self.segment_files is not None:
            if set(self.segment_files) != {"train", "test"}:
                raise ConfigError("segment_files needs exactly the keys 'train' and 'test'")
        elif (self.n_train if not self.train_profiles else 1) < 1 or (self.n_test if not self.test_profiles else 1) < 1:
            raise ConfigError("need at least one train and one test segment")

    @property
    def train_config(self) -> TrainConfig:
        if self.train is not None:
            return self.train
        return TrainConfig(shuffle_seed=derive_seed(self.seed, 20), init_seed=derive_seed(self.seed, 21))

    def with_seed(self, seed: int) -> RunConfig:
        cfg = replace(self, seed=seed)
        if self.train is not None:
            cfg.train = replace(self.train, shuffle_seed=derive_seed(seed, 20), init_seed=derive_seed(seed, 21))
        return cfg

    def to_dict(self) -> dict[str, Any]:
        return {
            "seed": self.seed,
            "out": self.out,
            "window": self.window,
            "duration": self.duration,
            "rate": self.rate,
            "dvl_errors": self.dvl_errors.to_dict(),
            "n_train": self.n_train,
            "n_test": self.n_test,
            "fleet_ranges": self.fleet_ranges.to_dict(),
            "train_profiles": [p.to_dict() for p in self.train_profiles],
            "test_profiles": [p.to_dict() for p in self.test_profiles],
            "segment_files": self.segment_files,
            "augmentation": self.augmentation.to_dict(),
            "augment_copies": self.augment_copies,
            "validation_fraction": self.validation_fraction,
            "architecture": self.architecture.to_dict(),
            "train": self.train_config.to_dict(),
            "report_format": self.report_format,
            "trace_segment": self.trace_segment,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> RunConfig:
        d = dict(d)
        unknown = set(d) - set(cls.__dataclass_fields__)
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        try:
            if "dvl_errors" in d:
                d["dvl_errors"] = DvlErrorModel.from_dict(d["dvl_errors"])
            if "fleet_ranges" in d:
                d["fleet_ranges"] = FleetRanges.from_dict(d["fleet_ranges"])
            for key in ("train_profiles", "test_profiles"):
                if key in d:
                    d[key] = [ManeuverProfile.from_dict(p) for p in d[key]]
            if "augmentation" in d:
                d["augmentation"] = AugmentationParams.from_dict(d["augmentation"])
            if "architecture" in d:
                arch = dict(d["architecture"])
                arch.setdefault("window", d.get("window", DEFAULT_WINDOW))
                d["architecture"] = ArchitectureConfig.from_dict(arch)
            if d.get("train") is not None:
                d["train"] = TrainConfig.from_dict(d["train"])
            return cls(**d)
        except ConfigError:
            raise
        except (TypeError, ValueError, KeyError) as exc:
            raise ConfigError(f"invalid configuration: {exc}") from None

    @classmethod
    def load(cls, path) -> RunConfig:
        path = Path(path)
        try:
            doc = json.loads(path.read_text(encoding="utf-8"))
        except FileNotFoundError:
            raise ConfigError(f"config file not found: {path}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON: {exc}") from None
        if not isinstance(doc, dict):
            raise ConfigError(f"{path}: top level must be an object")
        cfg = cls.from_dict(doc)
        # relative segment paths are resolved against the config's directory
        if cfg.segment_files is not None:
            cfg.segment_files = {
                k: [str((path.parent / p)) if not Path(p).is_absolute() else p for p in v]
                for k, v in cfg.segment_files.items()
            }
        return cfg
