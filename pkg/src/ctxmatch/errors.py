"""Exception hierarchy shared across the package.

The CLI maps these onto exit codes: bad parameters -> 2, enumeration caps
-> 3, I/O problems -> 4, failed property suites -> 1.
"""


class CtxMatchError(Exception):
    """Base class for all package errors."""


class ParameterError(CtxMatchError, ValueError):
    """A value lies outside its documented domain."""


class DimensionError(ParameterError):
    """Shapes or lengths of two objects do not match."""


class EnumerationCapError(CtxMatchError):
    """An operation requiring full enumeration of S_n was asked for n above the cap."""


class CoefficientSingularityError(ParameterError):
    """Energy coefficients rho/(1-rho^2) or eta/(1-eta^2) are infinite (|rho| = 1 or |eta| = 1)."""
