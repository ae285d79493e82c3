"""Exception types shared across the package."""


class ParkfunError(ValueError):
    """Base class for all input errors raised by parkfun."""


class InvalidInputError(ParkfunError):
    pass


class SizeLimitError(ParkfunError):
    """Raised when a request exceeds a hard size guard (never truncated silently)."""


class InvalidTreeError(ParkfunError):
    pass


class InvalidCodeError(ParkfunError):
    pass
