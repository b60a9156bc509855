"""Exception hierarchy shared by all subpackages."""


class RelIndexError(Exception):
    """Base class for every error raised by :mod:`relindex`."""


class MalformedIdealError(RelIndexError, ValueError):
    pass


class NoDecompositionError(RelIndexError, ValueError):
    pass


class ShapeMismatchError(RelIndexError, ValueError):
    pass


class AlgebraMismatchError(RelIndexError, ValueError):
    pass


class NondegeneracyError(RelIndexError, ValueError):
    pass


class GradingError(RelIndexError, ValueError):
    pass


class InvalidIntertwinerError(RelIndexError, ValueError):
    pass


class IdentificationError(RelIndexError, ValueError):
    pass


class AmbiguousKernelError(RelIndexError):
    """No clean spectral gap separates kernel from bulk singular values.

    ``operator`` names the offending operator when the caller knows it.
    """

    def __init__(self, message, operator=None):
        super().__init__(message)
        self.operator = operator


class NotOddError(RelIndexError, ValueError):
    pass


class TooCoarseError(RelIndexError, ValueError):
    pass


class ConfigError(RelIndexError, ValueError):
    pass


class ParseError(RelIndexError, ValueError):
    def __init__(self, message, position=None):
        if position is not None:
            message = f"{message} (at position {position})"
        super().__init__(message)
        self.position = position


class SignatureError(RelIndexError, TypeError):
    pass


class NonterminationError(RelIndexError, RuntimeError):
    pass
