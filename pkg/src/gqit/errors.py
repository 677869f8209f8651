"""Exception hierarchy shared by all modules."""


class GqitError(Exception):
    """Base class for library errors."""


class InvalidArgument(GqitError, ValueError):
    """Argument outside the documented domain."""


class InvalidState(GqitError, ValueError):
    """Covariance matrix is malformed or unphysical for the requested operation."""


class InvalidTransform(GqitError, ValueError):
    """Matrix handed to ``apply`` is not symplectic."""


class NumericalFailure(GqitError, ArithmeticError):
    """An eigen-solver, inversion or iteration did not produce a usable result."""


class DegenerateInput(InvalidArgument):
    """Input makes a formula ill-defined, e.g. a zero detection probability."""
