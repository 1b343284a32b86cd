"""Exception types shared across the package."""


class NumericalIntegrityError(RuntimeError):
    """A physics invariant (hermiticity, trace, positivity, realness) failed
    beyond its numerical tolerance."""


class NotCompletelyPositiveError(NumericalIntegrityError):
    """A process matrix has an eigenvalue below the complete-positivity
    tolerance."""


class UnsupportedSizeError(ValueError):
    """The requested qubit count is above the configured limit for this
    operation (dense export or basis-partition search)."""


class InvalidBasisError(ValueError):
    """A generator set is not a valid measurement basis (non-commuting or
    dependent generators)."""
