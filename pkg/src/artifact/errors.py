"""Exception hierarchy shared by every module.

All errors derive from :class:`ArtifactError` so callers (and the CLI) can
catch numerical failures separately from programming errors.
"""


class ArtifactError(Exception):
    """Base class for all package errors."""


class DegenerateInput(ArtifactError, ValueError):
    """Input is rank deficient, has a zero-length vector, or touches itself."""


class ShapeError(ArtifactError, ValueError):
    """Array shapes or ambient dimensions do not match."""


class InvalidSpec(ArtifactError, ValueError):
    """A curve or run specification violates its invariants."""


class InvalidInput(ArtifactError, ValueError):
    """A scalar argument is outside the documented domain."""


class NearSingular(ArtifactError, ArithmeticError):
    """Relative discriminant fell below the guard threshold."""


class Unsupported(ArtifactError, NotImplementedError):
    """The requested case has no implementation (e.g. odd m+n)."""


class TooManyRejections(ArtifactError, RuntimeError):
    """More than the allowed fraction of Monte Carlo samples were rejected."""


class TouchingCurves(ArtifactError, ValueError):
    """Two curves come closer than the separation tolerance."""


class NonpositiveEta(ArtifactError, ArithmeticError):
    """The diagonal-split refinement is inapplicable (eta <= 0 on the grid)."""


class IllConditioned(ArtifactError, ArithmeticError):
    """A least-squares fit failed its held-out residual check."""
