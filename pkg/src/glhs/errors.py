"""Error taxonomy shared across the library.

Every raisable condition gets its own class so callers can react to the
recoverable ones (NeedsMoreSamplesError, EmptyZoneError) without string
matching.
"""


class GlhsError(Exception):
    """Base class for all library errors."""


class DomainViolationError(GlhsError):
    """A point lies outside the input box [-1, 1]^d."""


class IllPosedFitError(GlhsError):
    """A least-squares system is rank deficient.

    Carries the numerical rank found and the rank required.
    """

    def __init__(self, message, rank=None, required=None):
        super().__init__(message)
        self.rank = rank
        self.required = required


class NeedsMoreSamplesError(GlhsError):
    """A grid is too small to orthonormalize the requested basis.

    Recoverable: the caller may enlarge the grid and retry.
    """

    def __init__(self, message, rank=None, required=None):
        super().__init__(message)
        self.rank = rank
        self.required = required


class DegeneratePointError(GlhsError):
    """A grid point carries zero basis mass, so it can never be sampled."""


class InfeasibleDrawError(GlhsError):
    """More distinct samples requested than the measure supports."""


class EmptyZoneError(GlhsError):
    """The buffer zone contains no grid points.

    This is the loop termination signal, not a failure.
    """


class VanishingBufferError(GlhsError):
    """Rejection resampling acceptance rate fell below the floor."""


class InsufficientBudgetError(GlhsError):
    """Fewer model evaluations available than coefficients to fit."""


class StarvationError(GlhsError):
    """Budgeted sampling hit the draw cap before filling the buffer quota."""


class ResourceLimitError(GlhsError):
    """A requested object would exceed a configured size cap."""


class ConfigValidationError(GlhsError):
    """One or more configuration problems, aggregated.

    messages holds every individual problem found.
    """

    def __init__(self, messages):
        self.messages = list(messages)
        super().__init__("; ".join(self.messages))
