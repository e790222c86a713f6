"""Model-based acceleration from a velocity window.

Each axis is fitted independently with the affine model
``v(d) = v0 + a * d`` where ``d`` is the time elapsed since the first
sample of the window; the slope ``a`` is the acceleration estimate. The
2x2 normal equations are solved with the closed-form inverse.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DataError, SingularSystemError
from .types import AccelerationVector, VelocityWindow

SINGULAR_RTOL = 1e-12


@dataclass(frozen=True)
class NormalSystem:
    """``b_matrix @ [v0, a] = rhs[:, axis]`` for each axis.

    b_matrix = [[n, sum d], [sum d, sum d^2]]; rhs rows are
    (sum v, sum v*d), one column per axis.
    """

    b_matrix: np.ndarray
    rhs: np.ndarray

    @property
    def determinant(self) -> float:
        b = self.b_matrix
        return float(b[0, 0] * b[1, 1] - b[0, 1] * b[1, 0])


def time_deltas(window: VelocityWindow) -> np.ndarray:
    return window.times - window.times[0]


def normal_system(window: VelocityWindow) -> NormalSystem:
    d = time_deltas(window)
    v = window.velocities
    s1 = d.sum()
    s2 = (d * d).sum()
    b = np.array([[float(len(d)), s1], [s1, s2]])
    rhs = np.stack([v.sum(axis=0), (v * d[:, None]).sum(axis=0)])
    return NormalSystem(b, rhs)


def solve_normal_system(system: NormalSystem) -> np.ndarray:
    """Return the (2, 3) solution: row 0 intercepts, row 1 slopes."""
    b = system.b_matrix
    det = system.determinant
    if not det > SINGULAR_RTOL * b[0, 0] * b[1, 1]:
        raise SingularSystemError(f"normal matrix is singular (det={det!r}); timestamps must be distinct")
    inv = np.array([[b[1, 1], -b[0, 1]], [-b[1, 0], b[0, 0]]]) / det
    return inv @ system.rhs


def estimate_acceleration(window: VelocityWindow) -> AccelerationVector:
    if not np.all(np.isfinite(window.velocities)):
        raise DataError("velocity window contains non-finite values")
    return AccelerationVector(solve_normal_system(normal_system(window))[1])


def estimate_batch(times: np.ndarray, velocities: np.ndarray) -> np.ndarray:
    """Vectorised slope estimate.

    ``times`` is (B, N) and ``velocities`` (B, N, 3); returns (B, 3). Uses
    the same closed form as :func:`estimate_acceleration`.
    """
    times = np.asarray(times, dtype=np.float64)
    velocities = np.asarray(velocities, dtype=np.float64)
    if not np.all(np.isfinite(velocities)):
        raise DataError("velocity windows contain non-finite values")
    d = times - times[:, :1]
    n = float(d.shape[1])
    s1 = d.sum(axis=1)
    s2 = (d * d).sum(axis=1)
    det = n * s2 - s1 * s1
    bad = ~(det > SINGULAR_RTOL * n * s2)
    if np.any(bad):
        raise SingularSystemError(f"{int(bad.sum())} window(s) have a singular normal matrix")
    sv = velocities.sum(axis=1)
    svd = (velocities * d[:, :, None]).sum(axis=1)
    return (-s1[:, None] * sv + n * svd) / det[:, None]
