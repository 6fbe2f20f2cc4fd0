"""Exception types shared across the package."""


class SawTreeError(Exception):
    """Base class for errors raised by this package."""


class InvalidInput(SawTreeError, ValueError):
    """Malformed arguments: bad domain strings, walks outside a domain, etc."""


class BudgetExceeded(SawTreeError):
    """An enumeration hit its configured work budget.

    ``partial`` holds whatever complete result was obtained before the limit
    (for instance a CountTable covering fewer lengths), and ``depth`` the
    deepest level that was fully processed.
    """

    def __init__(self, message, depth=None, partial=None):
        super().__init__(message)
        self.depth = depth
        self.partial = partial


class RefinementExhausted(SawTreeError):
    """Interval refinement could not reach the requested tolerance."""
