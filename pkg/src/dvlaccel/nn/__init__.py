from ._backend import available as available_backends
from .checkpoint import ModelCheckpoint, Scaling, init_parameters
from .config import ArchitectureConfig
from .layers import conv1d_forward, leaky_relu, lstm_forward, maxpool1d_forward, stack_gates
from .model import Network, model_backward, model_forward

__all__ = [
    "ArchitectureConfig",
    "ModelCheckpoint",
    "Network",
    "Scaling",
    "available_backends",
    "conv1d_forward",
    "init_parameters",
    "leaky_relu",
    "lstm_forward",
    "maxpool1d_forward",
    "model_backward",
    "model_forward",
    "stack_gates",
]
