"""Exception hierarchy shared by all vphi modules."""


class VphiError(Exception):
    """Base class for every error raised by this package."""


class DomainError(VphiError, ValueError):
    """Argument outside [0, 1]."""


class RangeError(VphiError, ValueError):
    """Value outside the range of a map."""


class NonInvertibleError(VphiError, ValueError):
    """The map is flat at the requested value, so no unique preimage exists."""


class DegenerateFixedSetError(VphiError, ValueError):
    """phi(x) = x on an interval of positive length."""


class MapSyntaxError(VphiError, ValueError):
    """Malformed map descriptor."""


class ParameterError(VphiError, ValueError):
    """Order, grid size or tolerance out of bounds."""


class DataError(VphiError, ValueError):
    """Non-finite or otherwise unusable sampled data."""


class ConvergenceError(VphiError, RuntimeError):
    """No stable roots where the regime requires some."""


class NumericalError(VphiError, RuntimeError):
    """A dense linear algebra routine failed."""


class ResourceError(VphiError, RuntimeError):
    """Requested discretization exceeds the memory budget."""


class StraddleError(VphiError, RuntimeError):
    """A segment is neither above nor below the diagonal."""


class HypothesisWarning(UserWarning):
    """A closed-form identity is being applied outside its stated hypotheses."""
