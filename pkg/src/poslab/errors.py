"""Exception types shared across the package.

The split mirrors the CLI exit-code classes: bad inputs (``InputError``),
resource caps (``CapacityError``), solver breakdowns (``SolverError``) and
outcomes that are diagnosable but not errors, such as a grid with no feasible
point (``InfeasibleAtResolutionError``).
"""

from __future__ import annotations


class PoslabError(Exception):
    """Base class for all package-specific errors."""


class InputError(PoslabError, ValueError):
    """Malformed argument, dimension mismatch, or violated precondition."""


class DimensionMismatchError(InputError):
    """Operands live in polynomial rings of different dimension."""


class ParseError(InputError):
    """A polynomial string or problem document does not match the grammar."""


class CapacityError(PoslabError):
    """A desk-scale resource cap was exceeded (degree, basis size, SDP dim)."""


class SolverError(PoslabError):
    """The SDP solver broke down or hit its iteration cap without an answer.

    Carries the last iterate diagnostics in ``details`` when available.
    """

    def __init__(self, message: str, details: dict | None = None):
        super().__init__(message)
        self.details = details or {}


class InfeasibleAtResolutionError(PoslabError):
    """No feasible grid point at the requested resolution.

    Explicitly weaker than proving the set empty; a finer grid may succeed.
    """


class RoundingError(PoslabError):
    """A Gram matrix is too indefinite to repair by eigenvalue clipping."""


class DegenerateFitError(PoslabError):
    """Exponent estimation has no usable samples (set fills the box, or
    the log-log regression is degenerate)."""
