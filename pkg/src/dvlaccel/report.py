"""Side-by-side evaluation of the network and the least-squares baseline."""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import asdict, dataclass
from typing import Sequence

import numpy as np

from .dataset import stack_examples
from .errors import DataError
from .ls_estimator import estimate_acceleration
from .nn.checkpoint import ModelCheckpoint
from .nn.model import Network
from .training import rmse
from .types import LabeledExample, VelocityWindow


def improvement_pct(ls_rmse: float, dl_rmse: float) -> float:
    if not ls_rmse > 0:
        raise DataError(f"baseline RMSE must be positive to form an improvement, got {ls_rmse}")
    return 100.0 * (ls_rmse - dl_rmse) / ls_rmse


def axis_rmse(pred: np.ndarray, target: np.ndarray) -> list[float]:
    d = np.asarray(pred) - np.asarray(target)
    return np.sqrt(np.mean(d * d, axis=0)).tolist()


def window_digest(times: np.ndarray, velocities: np.ndarray) -> str:
    h = hashlib.sha256()
    h.update(np.ascontiguousarray(times, dtype="<f8").tobytes())
    h.update(np.ascontiguousarray(velocities, dtype="<f8").tobytes())
    return h.hexdigest()


@dataclass(frozen=True)
class ComparisonReport:
    dl_rmse: float
    ls_rmse: float
    improvement_pct: float
    dl_axis_rmse: list[float]
    ls_axis_rmse: list[float]
    n_examples: int
    n_segments: int
    window: int
    windows_sha256: str
    description: str = ""

    def to_dict(self) -> dict:
        return asdict(self)

    def to_text(self) -> str:
        rows = [
            ("description", self.description),
            ("test_examples", self.n_examples),
            ("test_segments", self.n_segments),
            ("window", self.window),
            ("dl_rmse_m_s2", repr(self.dl_rmse)),
            ("ls_rmse_m_s2", repr(self.ls_rmse)),
            ("improvement_pct", f"{self.improvement_pct:.1f}"),
        ]
        for name, vals in (("dl", self.dl_axis_rmse), ("ls", self.ls_axis_rmse)):
            for axis, v in zip("xyz", vals):
                rows.append((f"{name}_rmse_{axis}_m_s2", repr(v)))
        rows.append(("windows_sha256", self.windows_sha256))
        return "".join(f"{k}: {v}\n" for k, v in rows)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def to_csv(self) -> str:
        d = self.to_dict()
        keys, vals = [], []
        for k in sorted(d):
            v = d[k]
            if isinstance(v, list):
                for axis, x in zip("xyz", v):
                    keys.append(f"{k}_{axis}")
                    vals.append(repr(x))
            else:
                keys.append(k)
                vals.append(repr(v) if isinstance(v, float) else str(v).replace(",", ";"))
        return ",".join(keys) + "\n" + ",".join(vals) + "\n"

    def render(self, fmt: str) -> str:
        if fmt == "json":
            return self.to_json()
        if fmt == "csv":
            return self.to_csv()
        raise ValueError(f"unknown report format {fmt!r}")


def ls_predict(times: np.ndarray, velocities: np.ndarray) -> tuple[np.ndarray, str]:
    """Baseline estimate for each stacked window, plus a digest of what it saw."""
    out = np.array([estimate_acceleration(VelocityWindow(t, v)).a for t, v in zip(times, velocities)])
    return out, window_digest(times, velocities)


def dl_predict(checkpoint: ModelCheckpoint, times: np.ndarray, velocities: np.ndarray, backend=None) -> tuple[np.ndarray, str]:
    x = np.ascontiguousarray(np.asarray(velocities).transpose(0, 2, 1))
    return Network(checkpoint, backend).predict(x), window_digest(times, velocities)


def compare(
    test: Sequence[LabeledExample],
    checkpoint: ModelCheckpoint,
    description: str = "",
    backend: str | None = None,
) -> tuple[ComparisonReport, dict[str, np.ndarray]]:
    """Score both estimators on the same windows.

    Returns the report and the raw arrays (``targets``, ``dl``, ``ls``) for
    tracing and residual-level checks.
    """
    if not test:
        raise DataError("compare needs a non-empty test set")
    batch = stack_examples(list(test))
    if batch.times.shape[1] != checkpoint.arch.window:
        raise DataError(f"test window {batch.times.shape[1]} != checkpoint window {checkpoint.arch.window}")
    digest = window_digest(batch.times, batch.velocities)
    dl, dl_seen = dl_predict(checkpoint, batch.times, batch.velocities, backend)
    ls, ls_seen = ls_predict(batch.times, batch.velocities)
    if not (dl_seen == ls_seen == digest):
        raise AssertionError("estimators were fed different windows")
    dl_r, ls_r = rmse(dl, batch.targets), rmse(ls, batch.targets)
    report = ComparisonReport(
        dl_rmse=dl_r,
        ls_rmse=ls_r,
        improvement_pct=improvement_pct(ls_r, dl_r),
        dl_axis_rmse=axis_rmse(dl, batch.targets),
        ls_axis_rmse=axis_rmse(ls, batch.targets),
        n_examples=len(batch),
        n_segments=len({e.segment_id for e in test}),
        window=batch.times.shape[1],
        windows_sha256=digest,
        description=description,
    )
    if not all(math.isfinite(v) for v in (dl_r, ls_r)):
        raise DataError("non-finite RMSE in comparison")
    arrays = {"time": batch.times[:, -1], "targets": batch.targets, "dl": dl, "ls": ls}
    return report, arrays
