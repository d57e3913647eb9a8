"""Exception types raised across the package."""


class CacheChaseError(Exception):
    pass


class InvalidParameter(CacheChaseError, ValueError):
    pass


class InvalidValue(CacheChaseError, ValueError):
    pass


class CacheOverflow(CacheChaseError):
    """A controller asked for more than ``s`` cached positions."""


class LocalityViolation(CacheChaseError):
    """A controller read a position outside the current cache support."""


class CorruptState(CacheChaseError):
    pass


class InvalidTarget(CacheChaseError, ValueError):
    pass


class InsufficientSamples(CacheChaseError):
    pass
