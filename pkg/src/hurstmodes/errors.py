"""Exception taxonomy shared across the package.

The CLI maps these onto exit codes (config 2, data 3, degeneracy 4), so
library code should raise the most specific class that applies.
"""


class ConfigError(ValueError):
    """Invalid configuration: bad parameter combination, unsupported option."""


class DomainError(ConfigError):
    """Argument outside its mathematical domain (H not in (0,1), eps <= 0, ...)."""


class DataError(ValueError):
    """Unusable input data: malformed CSV, missing cells, constant series."""


class DegenerateSpectrumError(RuntimeError):
    """A matrix whose spectrum cannot support the requested statistic,
    e.g. a non-positive eigenvalue under a logarithm (effective sample
    size too small, or rank deficiency)."""
