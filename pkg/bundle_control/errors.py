"""Exception hierarchy for bundle-control."""


class BundleControlError(Exception):
    """Base exception for all bundle-control errors."""

    pass


class InstanceFormatError(BundleControlError):
    """Raised when an instance, edge-list or clause document cannot be parsed."""

    pass


class UnknownVoterError(BundleControlError):
    """Raised when a voter id is not part of the election or bundling domain."""

    pass


class PreconditionError(BundleControlError):
    """Raised when a solver is called on an instance outside its domain."""

    pass


class NotSymmetricError(PreconditionError):
    """Raised when an operation needs a symmetric bundling function."""

    pass


class ComponentShapeError(PreconditionError):
    """Raised when a bundling graph component is not the expected path or cycle."""

    pass


class TooManyCandidatesError(PreconditionError):
    """Raised when a two-candidate routine sees more than two relevant candidates."""

    pass


class OracleCapExceededError(BundleControlError):
    """Raised when exhaustive search is requested on a domain above the configured cap."""

    pass


class UnsupportedInstanceError(BundleControlError):
    """Raised when no solver (including the oracle) can handle an instance."""

    pass


class ParameterRangeError(BundleControlError):
    """Raised when a generator parameter lies outside the construction's range."""

    pass
