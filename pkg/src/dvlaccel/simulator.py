"""Synthetic AUV velocity segments with analytic acceleration truth.

A :class:`ManeuverProfile` gives closed-form body velocity and its time
derivative; :func:`simulate_segment` samples it at a fixed rate and
corrupts the velocity with a DVL-like scale/bias/white-noise model.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

import numpy as np

from ._rng import Stream
from .errors import ConfigError
from .types import SegmentRecord

KINDS = ("constant_velocity", "constant_acceleration", "sinusoidal", "piecewise")
DEFAULT_DVL_NOISE_STD = 0.02
DEFAULT_DURATION = 400.0
DEFAULT_RATE = 1.0


def _vec3(x, name: str) -> tuple[float, float, float]:
    arr = np.broadcast_to(np.asarray(x, dtype=np.float64), (3,))
    if not np.all(np.isfinite(arr)):
        raise ConfigError(f"{name} must be finite, got {x!r}")
    return tuple(float(c) for c in arr)


@dataclass(frozen=True)
class ManeuverProfile:
    """Closed-form velocity history.

    Non-piecewise kinds evaluate
    ``v(t) = base + accel * t + amplitude * sin(omega * t + phase)``
    with the unused terms zero for the simpler kinds. A piecewise profile
    holds ``pieces`` and their start ``switch_times`` (the first is 0);
    each piece runs on local time and is offset so velocity stays
    continuous across switches (only the first piece's ``base`` matters).
    """

    kind: str
    base: tuple[float, float, float] = (0.0, 0.0, 0.0)
    accel: tuple[float, float, float] = (0.0, 0.0, 0.0)
    amplitude: tuple[float, float, float] = (0.0, 0.0, 0.0)
    omega: tuple[float, float, float] = (0.0, 0.0, 0.0)
    phase: tuple[float, float, float] = (0.0, 0.0, 0.0)
    pieces: tuple[ManeuverProfile, ...] = ()
    switch_times: tuple[float, ...] = ()

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise ConfigError(f"unknown profile kind {self.kind!r}; expected one of {KINDS}")
        for name in ("base", "accel", "amplitude", "omega", "phase"):
            object.__setattr__(self, name, _vec3(getattr(self, name), name))
        if self.kind == "piecewise":
            if not self.pieces or len(self.pieces) != len(self.switch_times):
                raise ConfigError("piecewise profile needs one switch time per piece")
            st = tuple(float(s) for s in self.switch_times)
            if st[0] != 0.0 or any(b <= a for a, b in zip(st, st[1:])):
                raise ConfigError(f"switch times must start at 0 and increase, got {st}")
            if any(p.kind == "piecewise" for p in self.pieces):
                raise ConfigError("piecewise profiles cannot nest")
            object.__setattr__(self, "pieces", tuple(self.pieces))
            object.__setattr__(self, "switch_times", st)
        elif self.pieces:
            raise ConfigError(f"{self.kind} profile cannot have pieces")

    @classmethod
    def constant_velocity(cls, base) -> ManeuverProfile:
        return cls("constant_velocity", base=base)

    @classmethod
    def constant_acceleration(cls, base, accel) -> ManeuverProfile:
        return cls("constant_acceleration", base=base, accel=accel)

    @classmethod
    def sinusoidal(cls, base, amplitude, omega, phase=(0.0, 0.0, 0.0)) -> ManeuverProfile:
        return cls("sinusoidal", base=base, amplitude=amplitude, omega=omega, phase=phase)

    @classmethod
    def piecewise(cls, pieces, switch_times) -> ManeuverProfile:
        return cls("piecewise", pieces=tuple(pieces), switch_times=tuple(switch_times))

    def _smooth(self, t: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        t = t[:, None]
        base, acc = np.array(self.base), np.array(self.accel)
        amp, om, ph = np.array(self.amplitude), np.array(self.omega), np.array(self.phase)
        v = base + acc * t
        a = np.broadcast_to(acc, v.shape).copy()
        if self.kind == "sinusoidal":
            arg = om * t + ph
            v = v + amp * np.sin(arg)
            a = a + amp * om * np.cos(arg)
        return v, a

    def evaluate(self, t) -> tuple[np.ndarray, np.ndarray]:
        """Return ``(velocity, acceleration)``, each (len(t), 3)."""
        t = np.atleast_1d(np.asarray(t, dtype=np.float64))
        if self.kind != "piecewise":
            return self._smooth(t)
        v = np.empty((t.shape[0], 3))
        a = np.empty((t.shape[0], 3))
        starts = np.array(self.switch_times)
        # right-limit convention: a sample exactly on a switch uses the new piece
        which = np.clip(np.searchsorted(starts, t, side="right") - 1, 0, len(self.pieces) - 1)
        level = self.pieces[0]._smooth(np.zeros(1))[0][0]
        for k, piece in enumerate(self.pieces):
            if k > 0:
                prev = self.pieces[k - 1]
                level = level + prev._smooth(np.array([starts[k] - starts[k - 1]]))[0][0] - prev._smooth(np.zeros(1))[0][0]
            mask = which == k
            if np.any(mask):
                pv, pa = piece._smooth(t[mask] - starts[k])
                v[mask] = pv - piece._smooth(np.zeros(1))[0][0] + level
                a[mask] = pa
        return v, a

    def to_dict(self) -> dict[str, Any]:
        if self.kind == "piecewise":
            return {
                "kind": self.kind,
                "pieces": [p.to_dict() for p in self.pieces],
                "switch_times": list(self.switch_times),
            }
        d: dict[str, Any] = {"kind": self.kind, "base": list(self.base)}
        if self.kind == "constant_acceleration":
            d["accel"] = list(self.accel)
        if self.kind == "sinusoidal":
            d.update(amplitude=list(self.amplitude), omega=list(self.omega), phase=list(self.phase))
        return d

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> ManeuverProfile:
        d = dict(d)
        kind = d.pop("kind", None)
        if kind == "piecewise":
            pieces = tuple(cls.from_dict(p) for p in d.pop("pieces", ()))
            return cls(kind, pieces=pieces, switch_times=tuple(d.pop("switch_times", ())))
        allowed = {"base", "accel", "amplitude", "omega", "phase"}
        unknown = set(d) - allowed
        if unknown:
            raise ConfigError(f"unknown profile fields: {sorted(unknown)}")
        return cls(kind, **d)


@dataclass(frozen=True)
class DvlErrorModel:
    """``measured = scale * true + bias + noise`` per axis."""

    noise_std: float = DEFAULT_DVL_NOISE_STD
    bias: tuple[float, float, float] = (0.0, 0.0, 0.0)
    scale: tuple[float, float, float] = (1.0, 1.0, 1.0)

    def __post_init__(self) -> None:
        if not (np.isfinite(self.noise_std) and self.noise_std >= 0):
            raise ConfigError(f"noise_std must be finite and >= 0, got {self.noise_std!r}")
        object.__setattr__(self, "bias", _vec3(self.bias, "bias"))
        object.__setattr__(self, "scale", _vec3(self.scale, "scale"))
        if any(s <= 0 for s in self.scale):
            raise ConfigError(f"scale factors must be positive, got {self.scale}")

    @classmethod
    def perfect(cls) -> DvlErrorModel:
        return cls(noise_std=0.0)

    def to_dict(self) -> dict[str, Any]:
        return {"noise_std": self.noise_std, "bias": list(self.bias), "scale": list(self.scale)}

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> DvlErrorModel:
        return cls(**d)


def sample_count(duration: float, rate: float) -> int:
    if not (np.isfinite(duration) and np.isfinite(rate)) or duration <= 0 or rate <= 0:
        raise ConfigError(f"duration and rate must be positive, got {duration!r}, {rate!r}")
    count = duration * rate
    n = int(round(count))
    if n <= 0 or abs(count - n) > 1e-9 * count:
        raise ConfigError(f"duration*rate must be a positive integer, got {count!r}")
    return n


def simulate_segment(
    profile: ManeuverProfile,
    errors: DvlErrorModel,
    duration: float = DEFAULT_DURATION,
    rate: float = DEFAULT_RATE,
    seed: int = 0,
    segment_id: str = "",
) -> SegmentRecord:
    n = sample_count(duration, rate)
    if errors.noise_std < 0:
        raise ConfigError("noise_std must be non-negative")
    if profile.kind == "piecewise":
        for s in profile.switch_times:
            k = s * rate
            if abs(k - round(k)) > 1e-9:
                raise ConfigError(f"switch time {s} does not fall on a sample boundary at {rate} Hz")
    t = np.arange(n, dtype=np.float64) / rate
    v_true, a_true = profile.evaluate(t)
    measured = np.array(errors.scale) * v_true + np.array(errors.bias)
    if errors.noise_std > 0:
        eta = Stream(seed, 0).normal(3 * n).reshape(n, 3)
        measured = measured + errors.noise_std * eta
    meta = {"profile": profile.to_dict(), "errors": errors.to_dict(), "seed": seed}
    return SegmentRecord(
        rate=float(rate),
        duration=float(duration),
        timestamps=t,
        true_velocity=v_true,
        measured_velocity=measured,
        gt_acceleration=a_true,
        segment_id=segment_id,
        meta=meta,
    )


@dataclass(frozen=True)
class FleetRanges:
    """Parameter ranges for randomly drawn maneuver profiles."""

    surge_base: tuple[float, float] = (0.8, 2.0)
    sway_base: tuple[float, float] = (-0.2, 0.2)
    heave_base: tuple[float, float] = (-0.1, 0.1)
    amplitude: tuple[tuple[float, float], ...] = ((0.1, 0.5), (0.05, 0.3), (0.02, 0.15))
    omega: tuple[float, float] = (0.03, 0.2)
    accel: tuple[tuple[float, float], ...] = ((-0.05, 0.05), (-0.03, 0.03), (-0.02, 0.02))
    piece_duration: tuple[int, int] = (40, 120)
    sinusoidal_fraction: float = 0.5

    def to_dict(self) -> dict[str, Any]:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> FleetRanges:
        def tup(x):
            return tuple(tup(i) for i in x) if isinstance(x, (list, tuple)) else x

        return cls(**{k: tup(v) for k, v in d.items()})


def _draw_smooth(stream: Stream, ranges: FleetRanges, kind: str, base) -> ManeuverProfile:
    if kind == "sinusoidal":
        amp = [stream.uniform(1, *ranges.amplitude[i])[0] for i in range(3)]
        om = stream.uniform(3, *ranges.omega)
        ph = stream.uniform(3, 0.0, 2 * np.pi)
        return ManeuverProfile.sinusoidal(base, amp, om, ph)
    acc = [stream.uniform(1, *ranges.accel[i])[0] for i in range(3)]
    return ManeuverProfile.constant_acceleration(base, acc)


def random_profile(seed: int, index: int, ranges: FleetRanges = FleetRanges(), duration: float = DEFAULT_DURATION) -> ManeuverProfile:
    """Draw one profile; even draws are sinusoidal or piecewise by coin flip."""
    stream = Stream(seed, 1, index)
    base = (
        stream.uniform(1, *ranges.surge_base)[0],
        stream.uniform(1, *ranges.sway_base)[0],
        stream.uniform(1, *ranges.heave_base)[0],
    )
    if stream.uniform(1)[0] < ranges.sinusoidal_fraction:
        return _draw_smooth(stream, ranges, "sinusoidal", base)
    pieces, starts = [], []
    t = 0
    while t < duration:
        starts.append(float(t))
        kind = "sinusoidal" if stream.uniform(1)[0] < 0.5 else "constant_acceleration"
        pieces.append(_draw_smooth(stream, ranges, kind, base))
        lo, hi = ranges.piece_duration
        t += int(lo + np.floor(stream.uniform(1)[0] * (hi - lo + 1)))
    return ManeuverProfile.piecewise(pieces, starts)


def random_fleet(seed: int, count: int, offset: int = 0, ranges: FleetRanges = FleetRanges(), duration: float = DEFAULT_DURATION) -> list[ManeuverProfile]:
    return [random_profile(seed, offset + i, ranges, duration) for i in range(count)]
