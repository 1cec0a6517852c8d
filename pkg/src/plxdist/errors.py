"""Exception and warning types shared across the package."""


class PlxdistError(Exception):
    """Base class for every error raised by this package."""


class DomainError(PlxdistError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class NotNormalizable(PlxdistError):
    """The requested density has no finite normalizing constant."""


class NotApplicableError(PlxdistError):
    """The check is undefined for this prior (e.g. compact support)."""


class InvalidGEP(PlxdistError, ValueError):
    """Parameters violate the generalized-exponential-power constraints."""


class HypothesisViolated(PlxdistError):
    """Inputs do not satisfy the hypotheses of the tail-composition rule."""


class UnboundedRatio(PlxdistError):
    """A density ratio is non-finite somewhere on the scan grid."""

    def __init__(self, message: str, at: float | None = None):
        super().__init__(message)
        self.at = at


class ImproperPosterior(PlxdistError):
    """The prior yields a posterior with infinite total mass."""


class TailNotCaptured(PlxdistError):
    """Grid expansion exhausted its budget before the tail mass stabilized."""


class DegenerateChain(PlxdistError):
    """Chain variance is zero; convergence diagnostics are undefined."""


class NonFiniteGradient(PlxdistError):
    """A log-density gradient evaluated to a non-finite value."""


class ConfigError(PlxdistError):
    """Bad command-line argument, config-file entry, or column mapping."""


class EmptyCatalog(PlxdistError):
    """The input catalog contains no data rows."""


class SamplerUnstable(UserWarning):
    """More than the tolerated fraction of transitions diverged."""
