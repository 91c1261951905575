"""Exception types raised across the package."""


class PppkitError(Exception):
    """Base class for errors raised by this package."""


class RegionParseError(PppkitError, ValueError):
    """Raised when a region expression cannot be parsed.

    Attributes:
        position: Index into the normalized (whitespace-stripped) text at
            which parsing failed.
    """

    def __init__(self, message, position):
        super().__init__(f"{message} (at position {position})")
        self.position = position


class DimensionMismatchError(PppkitError, ValueError):
    """Raised when objects of different dimensions are combined."""


class ZeroMeasureRegionError(PppkitError, ValueError):
    """Raised when a positive number of points is requested from a region
    whose measure is zero (or statistically indistinguishable from zero)."""


class RejectionLimitError(PppkitError, RuntimeError):
    """Raised when rejection sampling exhausts its attempt budget.

    Attributes:
        accepted: Points accepted before giving up.
        attempts: Candidate draws made in total.
        max_attempts: The per-point budget that was exceeded.
        acceptance_rate: Estimated acceptance probability per attempt,
            computed from the attempts actually made.
    """

    def __init__(self, accepted, attempts, max_attempts):
        rate = accepted / attempts if attempts > 0 else 0.0
        bound = max(rate, 1.0 / max_attempts)
        super().__init__(
            f"rejection sampling gave up after {attempts} attempts "
            f"({accepted} accepted); estimated acceptance rate "
            f"<= {bound:.3g}. The region is a vanishing fraction of its "
            f"bounding box; tighten the region or raise max_attempts.")
        self.accepted = accepted
        self.attempts = attempts
        self.max_attempts = max_attempts
        self.acceptance_rate = rate
