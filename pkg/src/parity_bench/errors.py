"""Exception hierarchy shared by every parity_bench module."""


class ParityBenchError(Exception):
    """Base class for all benchmark errors."""


class ContractViolation(ParityBenchError, ValueError):
    """An input breaks a width, length or shape precondition."""


class DomainError(ParityBenchError, ValueError):
    """An argument lies outside the domain of an operation."""


class DegenerateError(ParityBenchError):
    """A derived quantity is empty or zero where it must not be."""


class ConfigurationError(ParityBenchError, ValueError):
    """A configuration file or flag value is invalid."""


class TrainingDivergence(ParityBenchError):
    """Training produced a non-finite loss or gradient.

    Attributes:
        step: Index of the update at which the divergence was detected.
        loss_trace: Loss values recorded before the divergence.
    """

    def __init__(self, message, step=0, loss_trace=()):
        super().__init__(message)
        self.step = step
        self.loss_trace = list(loss_trace)


class ExportError(ParityBenchError):
    """Reading or writing a result file failed."""

    def __init__(self, path, error):
        super().__init__(f"{path}: {error}")
        self.path = str(path)
