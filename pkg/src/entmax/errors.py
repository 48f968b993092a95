"""Exception types shared across the package."""


class EntmaxError(Exception):
    """Base class for every error raised by this package."""


class InvalidInputError(EntmaxError, ValueError):
    """User-supplied data (scores, probabilities, records, fixtures) is malformed."""


class ConfigurationError(EntmaxError, ValueError):
    """Parameters are inconsistent: bad alpha, incompatible solver choice, bad flags."""


class ResourceError(EntmaxError, RuntimeError):
    """A request exceeds a configured size cap."""
