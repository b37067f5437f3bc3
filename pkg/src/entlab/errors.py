"""Exception types raised by the library."""


class EntlabError(Exception):
    """Base class for all library errors."""


class DimensionError(EntlabError):
    """Operand shapes or subsystem dimensions are inconsistent."""


class ValidationError(EntlabError):
    """A structural invariant (Hermiticity, positivity, trace, ...) is violated."""


class ParameterError(EntlabError):
    """A parameter is outside its valid range."""


class CapacityError(EntlabError):
    """A requested size (memory dimension, rank) is too small for the input."""


class ParseError(EntlabError):
    """A state file or generator spec could not be parsed."""
