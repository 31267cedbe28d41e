"""Exception hierarchy shared by the solver modules."""


class CarreauFilmError(Exception):
    """Base class for all errors raised by this package."""


class InvalidParameterError(CarreauFilmError, ValueError):
    """A parameter or input violates a documented precondition."""


class BranchError(InvalidParameterError):
    """An effective viscosity lies outside the admissible branch for ``r``."""


class NumericalError(CarreauFilmError, RuntimeError):
    """An iterative numerical procedure failed."""


class PsiConvergenceError(NumericalError):
    """The viscosity inversion did not converge.

    Attributes
    ----------
    bracket : tuple of float
        Final bracket on the log-excess unknown of the worst entry.
    residual : float
        Largest remaining log-residual.
    """

    def __init__(self, message, bracket, residual):
        super().__init__(message)
        self.bracket = bracket
        self.residual = residual


class QuadratureError(NumericalError):
    """Panel doubling hit its cap before meeting the tolerance."""


class SingularSystemError(NumericalError):
    """The frozen-mobility linear system could not be solved."""


class ConfigError(CarreauFilmError, ValueError):
    """A case configuration is malformed.

    Attributes
    ----------
    field : str
        Dotted path of the offending configuration field.
    """

    def __init__(self, field, message):
        super().__init__(f"{field}: {message}")
        self.field = field
