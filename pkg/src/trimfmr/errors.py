"""Exception hierarchy shared across the package.

The CLI maps these onto exit codes (config 2, data 3, numerical 4), so
library code should raise the most specific class that applies.
"""


class ConfigError(ValueError):
    """Invalid configuration: bad flag combinations, malformed config files."""


class DataError(ValueError):
    """Input data violates a contract (shape, parse failure, too few rows)."""


class NumericalError(RuntimeError):
    """A numerical procedure failed beyond the built-in safeguards."""


class MonotonicityError(NumericalError):
    """The EM objective decreased beyond tolerance; indicates a bug, not data."""
