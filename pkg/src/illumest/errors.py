"""Exception and warning types raised across the package."""


class IllumError(Exception):
    """Base class for all errors raised by illumest."""


class InvalidParam(IllumError, ValueError):
    pass


class DecodeError(IllumError, ValueError):
    """The byte stream is not a decodable PNG or JPEG image."""


class DegenerateImage(IllumError, ValueError):
    pass


class EmptySet(IllumError, ValueError):
    """An operation that needs at least one point received none."""


class ZeroVector(IllumError, ValueError):
    pass


class SizeMismatch(IllumError, ValueError):
    pass


class TooLarge(IllumError, ValueError):
    pass


class NonUniformWeights(IllumError, ValueError):
    pass


class TooSmall(IllumError, ValueError):
    pass


class TooFewPoints(IllumError, ValueError):
    pass


class DegenerateReference(IllumError, ValueError):
    pass


class DimensionMismatch(IllumError, ValueError):
    pass


class EmptyBrightSetWarning(UserWarning):
    """No pixel exceeded the threshold; a lower threshold may be needed."""
