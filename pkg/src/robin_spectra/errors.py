"""Exception hierarchy.

Configuration-type errors (bad parameters, out-of-domain inputs) derive from
:class:`ConfigError`; failures of a numerical procedure derive from
:class:`NumericalError`.  The CLI maps the two families to exit codes 2 and 3.
"""


class RobinSpectraError(Exception):
    """Base class for all package errors."""


class ConfigError(RobinSpectraError, ValueError):
    pass


class NumericalError(RobinSpectraError, ArithmeticError):
    pass


class DomainError(ConfigError):
    """Input outside the domain of a map or formula."""


class ParamError(ConfigError):
    """Parameter outside its declared range."""


class SizeError(ConfigError):
    """Requested truncation is too small."""


class PoleError(DomainError):
    """Evaluation at the eigenvalue a + 1/a of the unperturbed operator."""


class SuperharmonicityViolation(ConfigError):
    """A generator sequence g has (-Delta_0 g)_n < 0 somewhere."""


class NotOnBoundary(ConfigError):
    pass


class RealTarget(ConfigError):
    pass


class DivergentTail(NumericalError):
    """The declared decay of a potential cannot bound the truncation tail."""


class EmptyCurve(NumericalError):
    pass


class ConvergenceFailure(NumericalError):
    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


class ContourTooClose(NumericalError):
    pass
