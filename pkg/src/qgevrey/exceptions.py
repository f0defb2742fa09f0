"""Exception hierarchy shared by every module."""


class QGevreyError(Exception):
    """Base class for library errors."""


class DomainError(QGevreyError, ValueError):
    """Argument outside the domain of an operation."""


class PoleError(DomainError):
    """Evaluation at (or too close to) a pole or excluded ray."""


class CutError(PoleError):
    """Evaluation on a branch cut."""


class GrowthError(QGevreyError):
    """A growth certificate is missing or too weak for the requested order."""


class QuadratureError(QGevreyError, ArithmeticError):
    """Quadrature refinement did not converge."""


class UnderflowError(QGevreyError, ArithmeticError):
    """Conversion of a log-domain value below the float range."""


class InsufficientDataError(QGevreyError, ValueError):
    """Too few terms to determine a fit."""


class NormalizationError(QGevreyError, ValueError):
    """Sequence is not normalized (m_0 != 1)."""


class DegeneracyError(QGevreyError, ArithmeticError):
    """Singular or ill-conditioned linear system."""


class InconsistentOracleError(QGevreyError, ValueError):
    """A closed form does not reproduce the Taylor prefix it was paired with."""


class EmptySeriesError(QGevreyError, ValueError):
    """Operation needs at least one coefficient."""


class DimensionError(QGevreyError, ValueError):
    """Coefficient dimensions do not match."""
