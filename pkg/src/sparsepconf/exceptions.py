"""Exception hierarchy shared by the library and the CLI."""


class PconfError(Exception):
    """Base class for every error raised by sparsepconf."""


class DomainError(PconfError, ValueError):
    """An argument lies outside the domain of the function."""


class ShapeError(PconfError, ValueError):
    """Array dimensions do not agree."""


class ConfigError(PconfError, ValueError):
    """Invalid configuration (penalty shape, step size, folds, ...)."""


class IngestionError(ConfigError):
    """A CSV or model file could not be read. Message carries the row number."""


class DivergenceError(PconfError, ArithmeticError):
    """The solver produced a non-finite objective."""

    def __init__(self, epoch, message=None):
        self.epoch = epoch
        super().__init__(message or f"non-finite objective at epoch {epoch}")


class ReplicationFailure(PconfError, RuntimeError):
    """Too many Monte Carlo replications failed."""

    def __init__(self, failures, total):
        self.failures = failures
        self.total = total
        seeds = ", ".join(str(seed) for seed, _ in failures)
        super().__init__(
            f"{len(failures)} of {total} replications failed (seeds: {seeds})"
        )
