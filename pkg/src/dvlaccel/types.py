"""Value types shared by the estimators, simulator and dataset code.

Axes are body frame: x surge, y sway, z heave. Times are seconds relative
to the start of the segment they came from.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, NamedTuple

import numpy as np

from .errors import DataError


def _frozen(a, dtype=np.float64) -> np.ndarray:
    arr = np.array(a, dtype=dtype, copy=True)
    arr.setflags(write=False)
    return arr


class BodyVelocitySample(NamedTuple):
    t: float
    v: tuple[float, float, float]


@dataclass(frozen=True, eq=False)
class VelocityWindow:
    """N consecutive DVL samples.

    ``times`` has shape (N,) and ``velocities`` shape (N, 3). The network
    consumes :attr:`matrix`, the 3 x N stacking of the axis series.
    """

    times: np.ndarray
    velocities: np.ndarray

    def __post_init__(self) -> None:
        t = _frozen(self.times)
        v = _frozen(self.velocities)
        if t.ndim != 1 or v.shape != (t.shape[0], 3):
            raise DataError(f"window shape mismatch: times {t.shape}, velocities {v.shape}")
        if t.shape[0] < 2:
            raise DataError(f"a window needs at least 2 samples, got {t.shape[0]}")
        if not (np.all(np.isfinite(t)) and np.all(np.isfinite(v))):
            raise DataError("window contains non-finite values")
        if np.any(np.diff(t) <= 0):
            raise DataError("window timestamps must be strictly increasing")
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "velocities", v)

    @classmethod
    def from_samples(cls, samples) -> VelocityWindow:
        samples = list(samples)
        return cls(np.array([s.t for s in samples]), np.array([s.v for s in samples]).reshape(-1, 3))

    @property
    def samples(self) -> list[BodyVelocitySample]:
        return [BodyVelocitySample(float(t), tuple(float(c) for c in v)) for t, v in zip(self.times, self.velocities)]

    @property
    def matrix(self) -> np.ndarray:
        return self.velocities.T

    def __len__(self) -> int:
        return self.times.shape[0]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, VelocityWindow):
            return NotImplemented
        return np.array_equal(self.times, other.times) and np.array_equal(self.velocities, other.velocities)


@dataclass(frozen=True, eq=False)
class AccelerationVector:
    a: np.ndarray

    def __post_init__(self) -> None:
        a = _frozen(self.a)
        if a.shape != (3,):
            raise DataError(f"acceleration must be a 3-vector, got shape {a.shape}")
        if not np.all(np.isfinite(a)):
            raise DataError(f"acceleration has non-finite components: {a}")
        object.__setattr__(self, "a", a)

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.a, dtype=dtype)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, AccelerationVector):
            return NotImplemented
        return np.array_equal(self.a, other.a)

    def __repr__(self) -> str:
        return f"AccelerationVector({self.a.tolist()})"


@dataclass(frozen=True, eq=False)
class LabeledExample:
    window: VelocityWindow
    target: AccelerationVector
    label_time: float
    segment_id: str = ""
    end_index: int = -1

    def __post_init__(self) -> None:
        if self.label_time != self.window.times[-1]:
            raise DataError(
                f"label_time {self.label_time} does not match last window timestamp {self.window.times[-1]}"
            )


@dataclass(frozen=True, eq=False)
class SegmentRecord:
    """One fixed-rate trajectory segment.

    All series have ``duration * rate`` rows; vector series are (L, 3).
    ``meta`` holds generator metadata strings (profile, seed, error model) that are
    carried into CSV comment lines.
    """

    rate: float
    duration: float
    timestamps: np.ndarray
    true_velocity: np.ndarray
    measured_velocity: np.ndarray
    gt_acceleration: np.ndarray
    segment_id: str = ""
    meta: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        count = self.duration * self.rate
        n = int(round(count))
        if n <= 0 or abs(count - n) > 1e-9 * max(1.0, abs(count)):
            raise DataError(f"duration*rate must be a positive integer, got {count!r}")
        t = _frozen(self.timestamps)
        if t.shape != (n,):
            raise DataError(f"expected {n} timestamps, got shape {t.shape}")
        if n > 1 and not np.allclose(np.diff(t), 1.0 / self.rate, rtol=1e-9, atol=0.0):
            raise DataError(f"timestamps are not spaced 1/rate = {1.0 / self.rate} s apart")
        for name in ("true_velocity", "measured_velocity", "gt_acceleration"):
            arr = _frozen(getattr(self, name))
            if arr.shape != (n, 3):
                raise DataError(f"{name} must have shape ({n}, 3), got {arr.shape}")
            object.__setattr__(self, name, arr)
        object.__setattr__(self, "timestamps", t)
        object.__setattr__(self, "meta", dict(self.meta))

    def __len__(self) -> int:
        return self.timestamps.shape[0]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SegmentRecord):
            return NotImplemented
        return (
            self.rate == other.rate
            and self.duration == other.duration
            and self.segment_id == other.segment_id
            and all(
                np.array_equal(getattr(self, k), getattr(other, k))
                for k in ("timestamps", "true_velocity", "measured_velocity", "gt_acceleration")
            )
        )

    def replace(self, **changes) -> SegmentRecord:
        fields = dict(
            rate=self.rate,
            duration=self.duration,
            timestamps=self.timestamps,
            true_velocity=self.true_velocity,
            measured_velocity=self.measured_velocity,
            gt_acceleration=self.gt_acceleration,
            segment_id=self.segment_id,
            meta=self.meta,
        )
        fields.update(changes)
        return SegmentRecord(**fields)


def window_at(segment: SegmentRecord, end_index: int, n: int) -> VelocityWindow:
    """Return the ``n`` measured samples of ``segment`` ending at ``end_index``."""
    length = len(segment)
    if n < 2:
        raise DataError(f"window length must be >= 2, got {n}")
    if end_index < n - 1:
        raise DataError(f"end_index {end_index} leaves fewer than {n} samples of history")
    if end_index >= length:
        raise DataError(f"end_index {end_index} is past the segment end (length {length})")
    lo = end_index - n + 1
    return VelocityWindow(segment.timestamps[lo : end_index + 1], segment.measured_velocity[lo : end_index + 1])
