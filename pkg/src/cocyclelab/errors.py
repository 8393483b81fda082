"""Exception types raised across the package."""


class CocycleLabError(Exception):
    """Base class for all package errors."""


class SingularOperator(CocycleLabError, ValueError):
    """A matrix that must be invertible is numerically singular."""


class WindowExhausted(CocycleLabError):
    """A lazily generated symbol sequence was asked for a coordinate it cannot produce."""


class NotFound(CocycleLabError):
    """No return time exists in the requested window."""


class ForbiddenWrap(CocycleLabError):
    """The closing word of a subshift orbit is not transition-allowed."""


class IllConditionedClosing(CocycleLabError):
    """The torus closing solve left a periodicity residual above tolerance."""


class CalibrationFailed(CocycleLabError):
    """No closing envelope fits the sampled return pairs."""


class MissingWord(CocycleLabError, KeyError):
    """A locally constant generator has no matrix for a centered word."""


class IncompatibleSampler(CocycleLabError, ValueError):
    """The measure sampler cannot produce points of the given base system."""


class BudgetExceeded(CocycleLabError):
    """An enumeration would exceed its configured size budget."""


class ProfileViolated(CocycleLabError):
    """A pair of orbit segments is not as close as the caller promised."""


class ConfigError(CocycleLabError, ValueError):
    """An experiment configuration failed validation."""
