"""Exception types raised across the package.

The CLI maps :class:`ConfigError` to exit code 2 and
:class:`NumericalConsistencyError` to exit code 3.
"""


class DimensionError(ValueError):
    """Matrix or index dimensions are incompatible."""


class DomainError(ValueError):
    """Argument outside the mathematical domain of a function."""


class InvalidCovarianceError(ValueError):
    """Matrix is not a valid (possibly mixed) Gaussian covariance matrix."""


class ParityError(ValueError):
    """A Majorana index set has odd cardinality where an even one is needed."""


class SizeError(ValueError):
    """Requested problem size exceeds what the routine supports."""


class NumericalConsistencyError(ArithmeticError):
    """A quantity that is exact in theory drifted beyond tolerance."""


class CollapseUndefinedError(NumericalConsistencyError):
    """Post-measurement state requested for a zero-probability outcome."""


class ConfigError(ValueError):
    """Experiment configuration is malformed or violates an invariant."""


class ContractError(ValueError):
    """A caller-supplied function violates its documented contract."""
