"""Exception hierarchy shared by all modules."""

__all__ = [
    "BivKrylovError",
    "NonDiagonalizable",
    "FunctionUndefined",
    "PoleHit",
    "SingularPencil",
    "ZeroStartVector",
    "ShapeMismatch",
    "DegenerateGeometry",
    "UnsupportedGeometry",
    "SingularityInsideInterval",
    "OutOfRegime",
    "EvaluationFailure",
    "ParseError",
    "DimensionMismatch",
]


class BivKrylovError(Exception):
    """Base class for errors raised by this package."""


class NonDiagonalizable(BivKrylovError):
    """Eigenvector matrix too ill-conditioned to serve as a diagonalizer."""


class FunctionUndefined(BivKrylovError):
    """A function produced a non-finite value at a required point."""


class PoleHit(FunctionUndefined):
    """A reciprocal-type bivariate function was evaluated at a pole."""


class SingularPencil(BivKrylovError):
    """``alpha + lambda_i + mu_j`` vanishes for some eigenvalue pair."""


class ZeroStartVector(BivKrylovError):
    """Krylov process started from the zero vector."""


class ShapeMismatch(BivKrylovError, ValueError):
    """Operands have incompatible shapes."""


class DegenerateGeometry(BivKrylovError, ValueError):
    """Norm-bound constant requested for a geometry that does not admit it."""


class UnsupportedGeometry(BivKrylovError, ValueError):
    """Bound requested for a function/set combination that is not handled."""


class SingularityInsideInterval(BivKrylovError, ValueError):
    """Singularity lies on the approximation interval."""


class OutOfRegime(BivKrylovError, ValueError):
    """Degree lies outside the range where a bound formula applies."""


class EvaluationFailure(BivKrylovError):
    """Function could not be evaluated on the approximation set."""


class ParseError(BivKrylovError, ValueError):
    """Malformed Matrix Market input.

    Attributes
    ----------
    line : int or None
        1-based line number of the offending line, when known.
    """

    def __init__(self, msg, line=None):
        if line is not None:
            msg = f"line {line}: {msg}"
        super().__init__(msg)
        self.line = line


class DimensionMismatch(BivKrylovError, ValueError):
    """Declared and actual dimensions disagree."""
