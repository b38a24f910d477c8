"""Exception hierarchy shared by all ptscarf modules."""


class PtScarfError(Exception):
    """Base class for every error raised by ptscarf."""


class PoleError(PtScarfError, ValueError):
    """A Gamma-type function was evaluated at (or numerically on) a pole."""


class DomainError(PtScarfError, ValueError):
    """An argument lies outside the region where the operation is defined."""


class SingularLineError(DomainError):
    """A pointwise kernel value was requested on the line y = -x."""


class ConvergenceError(PtScarfError, ArithmeticError):
    """A series or iteration did not converge within its term budget."""


class DegeneracyError(PtScarfError, ArithmeticError):
    """A connection formula hit a parameter degeneracy that could not be regularised."""


class OverflowGuardError(PtScarfError, OverflowError):
    """A term magnitude exceeded the configured overflow guard."""


class ResolutionError(PtScarfError, ValueError):
    """A quadrature rule is too coarse for the requested integrand."""


class ExtrapolationError(PtScarfError, ArithmeticError):
    """Successive Richardson extrapolants disagree beyond the allowed margin."""


class NonFiniteError(PtScarfError, ArithmeticError):
    """A NaN or infinity was about to escape a public operation."""
