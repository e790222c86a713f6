"""Exception hierarchy; the CLI maps each family to an exit code."""


class DvlAccelError(Exception):
    exit_code = 1


class ConfigError(DvlAccelError, ValueError):
    exit_code = 2


class DataError(DvlAccelError, ValueError):
    exit_code = 3


class NumericalError(DvlAccelError, ArithmeticError):
    exit_code = 4


class SingularSystemError(NumericalError):
    """The least-squares normal matrix cannot be inverted."""


class DivergenceError(NumericalError):
    """Training produced a non-finite loss."""

    def __init__(self, epoch: int, batch: int, loss: float) -> None:
        super().__init__(f"non-finite loss {loss!r} at epoch {epoch}, batch {batch}")
        self.epoch = epoch
        self.batch = batch
        self.loss = loss
