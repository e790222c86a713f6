"""Windowing, augmentation, train/validation/test assembly and segment CSV I/O."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Sequence

import numpy as np

from ._rng import Stream
from .errors import ConfigError, DataError
from .types import AccelerationVector, LabeledExample, SegmentRecord, window_at

DEFAULT_WINDOW = 12
CSV_COLUMNS = ("t", "vx_meas", "vy_meas", "vz_meas", "vx_true", "vy_true", "vz_true", "ax_gt", "ay_gt", "az_gt")


@dataclass(frozen=True)
class AugmentationParams:
    """Ranges for one per-segment scale/bias draw plus white noise.

    ``scale_range`` and ``bias_range`` are (low, high) pairs applied to all
    three axes.
    """

    scale_range: tuple[float, float] = (0.98, 1.02)
    bias_range: tuple[float, float] = (-0.02, 0.02)
    noise_std: float = 0.01

    def __post_init__(self) -> None:
        for name in ("scale_range", "bias_range"):
            lo, hi = (float(x) for x in getattr(self, name))
            if not (math.isfinite(lo) and math.isfinite(hi)) or hi < lo:
                raise ConfigError(f"{name} must be a finite (low, high) interval, got {(lo, hi)}")
            object.__setattr__(self, name, (lo, hi))
        if self.scale_range[0] <= 0:
            raise ConfigError(f"scale_range must be strictly positive, got {self.scale_range}")
        if not (math.isfinite(self.noise_std) and self.noise_std >= 0):
            raise ConfigError(f"noise_std must be finite and >= 0, got {self.noise_std!r}")

    def to_dict(self) -> dict[str, Any]:
        return {"scale_range": list(self.scale_range), "bias_range": list(self.bias_range), "noise_std": self.noise_std}

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> AugmentationParams:
        return cls(**d)


@dataclass
class DatasetSplit:
    train: list[LabeledExample] = field(default_factory=list)
    validation: list[LabeledExample] = field(default_factory=list)
    test: list[LabeledExample] = field(default_factory=list)

    def to_manifest(self) -> dict[str, Any]:
        def refs(exs):
            return [[e.segment_id, e.end_index] for e in exs]

        n = len(self.train[0].window) if self.train else (len(self.test[0].window) if self.test else None)
        return {"window": n, "train": refs(self.train), "validation": refs(self.validation), "test": refs(self.test)}

    @classmethod
    def from_manifest(cls, manifest: dict[str, Any], segments: Iterable[SegmentRecord]) -> DatasetSplit:
        by_id = {s.segment_id: s for s in segments}
        n = manifest["window"]

        def load(refs):
            out = []
            for seg_id, end in refs:
                if seg_id not in by_id:
                    raise DataError(f"split manifest references unknown segment {seg_id!r}")
                out.append(example_at(by_id[seg_id], int(end), n))
            return out

        return cls(load(manifest["train"]), load(manifest["validation"]), load(manifest["test"]))


@dataclass(frozen=True)
class ExampleBatch:
    """Stacked examples: times (B, N), velocities (B, N, 3), targets (B, 3)."""

    times: np.ndarray
    velocities: np.ndarray
    targets: np.ndarray

    @property
    def inputs(self) -> np.ndarray:
        """Network layout (B, 3, N)."""
        return np.ascontiguousarray(self.velocities.transpose(0, 2, 1))

    def __len__(self) -> int:
        return self.targets.shape[0]

    def take(self, idx) -> ExampleBatch:
        return ExampleBatch(self.times[idx], self.velocities[idx], self.targets[idx])


def stack_examples(examples: Sequence[LabeledExample]) -> ExampleBatch:
    if not examples:
        raise DataError("cannot stack an empty example list")
    n = len(examples[0].window)
    if any(len(e.window) != n for e in examples):
        raise DataError("examples have inconsistent window lengths")
    return ExampleBatch(
        np.stack([e.window.times for e in examples]),
        np.stack([e.window.velocities for e in examples]),
        np.stack([e.target.a for e in examples]),
    )


def example_at(segment: SegmentRecord, end_index: int, n: int) -> LabeledExample:
    w = window_at(segment, end_index, n)
    return LabeledExample(
        window=w,
        target=AccelerationVector(segment.gt_acceleration[end_index]),
        label_time=float(segment.timestamps[end_index]),
        segment_id=segment.segment_id,
        end_index=end_index,
    )


def build_examples(segment: SegmentRecord, n: int = DEFAULT_WINDOW) -> list[LabeledExample]:
    if n < 2:
        raise DataError(f"window length must be >= 2, got {n}")
    if len(segment) < n:
        raise DataError(f"segment {segment.segment_id!r} has {len(segment)} samples, fewer than window length {n}")
    return [example_at(segment, k, n) for k in range(n - 1, len(segment))]


def augment_segment(segment: SegmentRecord, params: AugmentationParams, seed: int, segment_id: str | None = None) -> SegmentRecord:
    """Return a copy with perturbed measured velocity; labels untouched."""
    stream = Stream(seed, 3)
    s = stream.uniform(3, *params.scale_range)
    b = stream.uniform(3, *params.bias_range)
    measured = s * segment.measured_velocity + b
    if params.noise_std > 0:
        measured = measured + params.noise_std * stream.normal(measured.size).reshape(measured.shape)
    meta = dict(segment.meta)
    meta["augmentation"] = {**params.to_dict(), "seed": seed, "scale": s.tolist(), "bias": b.tolist()}
    return segment.replace(
        measured_velocity=measured,
        segment_id=segment.segment_id + "-aug" if segment_id is None else segment_id,
        meta=meta,
    )


def augment_corpus(segments: Sequence[SegmentRecord], params: AugmentationParams, seed: int) -> list[SegmentRecord]:
    """Originals followed by one augmented copy of each."""
    out = list(segments)
    for i, s in enumerate(segments):
        sub = int(np.random.SeedSequence([seed, 4, i]).generate_state(1)[0])
        out.append(augment_segment(s, params, sub))
    return out


def assemble_split(
    train_segments: Sequence[SegmentRecord],
    test_segments: Sequence[SegmentRecord],
    n: int = DEFAULT_WINDOW,
    validation_fraction: float = 0.2,
    seed: int = 0,
) -> DatasetSplit:
    if not train_segments or not test_segments:
        raise DataError("train and test segment lists must both be non-empty")
    if not 0.0 <= validation_fraction < 1.0:
        raise ConfigError(f"validation_fraction must be in [0, 1), got {validation_fraction}")
    train_ids = [s.segment_id for s in train_segments]
    test_ids = [s.segment_id for s in test_segments]
    if any(not i for i in train_ids + test_ids):
        raise DataError("every segment needs a non-empty segment_id for leakage checks")
    overlap = set(train_ids) & set(test_ids)
    if overlap:
        raise DataError(f"segments appear in both train and test: {sorted(overlap)}")

    pool = [e for s in train_segments for e in build_examples(s, n)]
    test = [e for s in test_segments for e in build_examples(s, n)]
    k = int(round(validation_fraction * len(pool)))
    chosen = np.sort(Stream(seed, 2).permutation(len(pool))[:k])
    mask = np.zeros(len(pool), dtype=bool)
    mask[chosen] = True
    return DatasetSplit(
        train=[e for e, m in zip(pool, mask) if not m],
        validation=[pool[i] for i in chosen],
        test=test,
    )


# -- CSV ---------------------------------------------------------------------


def _fmt(x: float) -> str:
    return repr(float(x))


def segment_to_csv(segment: SegmentRecord) -> str:
    buf = io.StringIO()
    buf.write(f"# segment_id: {json.dumps(segment.segment_id)}\n")
    buf.write(f"# rate: {_fmt(segment.rate)}\n")
    buf.write(f"# duration: {_fmt(segment.duration)}\n")
    for key in sorted(segment.meta):
        buf.write(f"# {key}: {json.dumps(segment.meta[key], sort_keys=True)}\n")
    buf.write(",".join(CSV_COLUMNS) + "\n")
    cols = np.column_stack([segment.timestamps, segment.measured_velocity, segment.true_velocity, segment.gt_acceleration])
    for row in cols:
        buf.write(",".join(_fmt(x) for x in row) + "\n")
    return buf.getvalue()


def write_segment_csv(segment: SegmentRecord, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(segment_to_csv(segment), encoding="utf-8", newline="\n")
    return path


def parse_segment_csv(text: str, source: str = "<string>") -> SegmentRecord:
    lines = text.splitlines()
    meta: dict[str, Any] = {}
    body: list[str] = []
    for lineno, line in enumerate(lines, start=1):
        if line.startswith("#"):
            key, sep, value = line[1:].partition(":")
            if not sep:
                continue
            try:
                meta[key.strip()] = json.loads(value.strip())
            except json.JSONDecodeError as exc:
                raise DataError(f"{source}:{lineno}: bad comment value for {key.strip()!r}: {exc}") from None
        elif line.strip():
            body.append((lineno, line))
    if not body:
        raise DataError(f"{source}: no header row")
    header_lineno, header_line = body[0]
    header = [h.strip() for h in next(csv.reader([header_line]))]
    missing = [c for c in CSV_COLUMNS if c not in header]
    if missing:
        raise DataError(f"{source}:{header_lineno}: header is missing column(s) {', '.join(missing)}")
    extra = [h for h in header if h not in CSV_COLUMNS]
    if extra:
        raise DataError(f"{source}:{header_lineno}: unexpected column(s) {', '.join(extra)}")
    pos = [header.index(c) for c in CSV_COLUMNS]
    rows = []
    for lineno, line in body[1:]:
        fields = next(csv.reader([line]))
        if len(fields) != len(header):
            raise DataError(f"{source}:{lineno}: expected {len(header)} fields, got {len(fields)}")
        row = []
        for p in pos:
            try:
                x = float(fields[p])
            except ValueError:
                raise DataError(f"{source}:{lineno}: column {header[p]!r} is not a number: {fields[p]!r}") from None
            if not math.isfinite(x):
                raise DataError(f"{source}:{lineno}: column {header[p]!r} is not finite: {fields[p]!r}")
            row.append(x)
        rows.append(row)
    if not rows:
        raise DataError(f"{source}: no data rows")
    data = np.array(rows)
    t = data[:, 0]
    seg_id = meta.pop("segment_id", "")
    rate = meta.pop("rate", None)
    duration = meta.pop("duration", None)
    if rate is None:
        if len(t) < 2:
            raise DataError(f"{source}: cannot infer rate from a single row; add a '# rate:' comment")
        rate = 1.0 / (t[1] - t[0])
    if duration is None:
        duration = len(t) / rate
    try:
        return SegmentRecord(
            rate=float(rate),
            duration=float(duration),
            timestamps=t,
            measured_velocity=data[:, 1:4],
            true_velocity=data[:, 4:7],
            gt_acceleration=data[:, 7:10],
            segment_id=str(seg_id),
            meta=meta,
        )
    except DataError as exc:
        raise DataError(f"{source}: {exc}") from None


def read_segment_csv(path) -> SegmentRecord:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise DataError(f"segment file not found: {path}") from None
    return parse_segment_csv(text, source=str(path))
