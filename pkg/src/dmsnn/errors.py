"""Exception types shared across the package."""


class ConfigError(ValueError):
    """Invalid configuration value (bad range, bad count, bad key)."""


class NumericDomainError(ValueError):
    """Non-finite state, input, or current where a finite number is required."""


class ContractError(ValueError):
    """A caller violated a documented precondition (e.g. unsorted spike times)."""


class NoActivityError(ValueError):
    """Decoding was asked for on an all-zero activity vector."""


class ArchiveParseError(ValueError):
    """A weight archive could not be parsed; message carries the line number."""
