"""Exception hierarchy shared across the package."""


class WarpStabError(Exception):
    """Base class for all package errors."""


class DomainError(WarpStabError):
    """A coordinate lies outside the evaluation domain."""


class SingularPointError(WarpStabError):
    """The warping function is non-positive where positivity is required."""


class QuadratureError(WarpStabError):
    """Adaptive quadrature failed to reach the requested accuracy."""


class InsufficientDataError(WarpStabError):
    """Not enough sample points for the requested fit."""


class FamilyInapplicableError(WarpStabError):
    """A test-function family cannot be built for the given manifold."""


class PreconditionError(WarpStabError):
    """An operation was called outside its stated preconditions."""


class AssemblyError(WarpStabError):
    """Discrete operator assembly failed (non-positive weights etc.)."""


class NumericError(WarpStabError):
    """A numeric routine failed to converge or violated a sanity check."""


class ConfigError(WarpStabError):
    """A run configuration or config file is invalid."""
