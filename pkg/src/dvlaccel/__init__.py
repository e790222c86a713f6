"""AUV body-frame acceleration from DVL velocity windows.

Two estimators share one data path: a per-axis least-squares slope fit
(:mod:`dvlaccel.ls_estimator`) and a CNN-LSTM regressor trained from
scratch (:mod:`dvlaccel.nn`, :mod:`dvlaccel.training`).
"""

from .errors import ConfigError, DataError, DivergenceError, NumericalError, SingularSystemError
from .ls_estimator import estimate_acceleration, time_deltas
from .types import AccelerationVector, BodyVelocitySample, LabeledExample, SegmentRecord, VelocityWindow, window_at

__version__ = "0.1.0"

__all__ = [
    "AccelerationVector",
    "BodyVelocitySample",
    "ConfigError",
    "DataError",
    "DivergenceError",
    "LabeledExample",
    "NumericalError",
    "SegmentRecord",
    "SingularSystemError",
    "VelocityWindow",
    "estimate_acceleration",
    "time_deltas",
    "window_at",
]
