"""Exception hierarchy shared by all pipeline stages.

The CLI maps these onto exit codes: ConfigError -> 1, DataError -> 2,
anything else -> 3.
"""


class NmtprepError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(NmtprepError):
    """Invalid configuration, flags, or stage ordering."""


class DataError(NmtprepError):
    """Malformed or inconsistent input data (corpus files, manifests, models)."""
