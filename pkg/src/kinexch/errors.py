"""Exception types shared across the package."""


class KinexchError(Exception):
    """Base class for all package errors."""


class ContractError(KinexchError, ValueError):
    """An argument violated a documented precondition."""


class ConfigError(KinexchError, ValueError):
    """A configuration object or file is malformed."""


class SimulationError(KinexchError, RuntimeError):
    """A run failed at runtime (conservation breach, livelock, ...)."""


class FitError(KinexchError, RuntimeError):
    """A fit could not be carried out on the given data."""
