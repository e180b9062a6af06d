"""Exception hierarchy shared across the package.

Input problems derive from ValueError so that plain argument validation and
library-specific validation can be caught together; numerical failures derive
from ArithmeticError.
"""


class LassoGraphError(Exception):
    """Base class for errors raised by this package."""


class GraphSyntaxError(LassoGraphError, ValueError):
    """Malformed graph document."""

    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        loc = ""
        if line is not None:
            loc = f" (line {line}" + (f", column {column})" if column is not None else ")")
        super().__init__(message + loc)


class GraphSemanticError(LassoGraphError, ValueError):
    """Well-formed graph document with inconsistent content."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"{message} (line {line})"
        super().__init__(message)


class DirichletSpectrumError(LassoGraphError, ArithmeticError):
    """Momentum lies in the Dirichlet spectrum of a link (vanishing Wronskian)."""


class SingularMomentumError(LassoGraphError, ArithmeticError):
    """Momentum hits a removable singularity of a closed-form expression."""


class ResolventPoleError(LassoGraphError, ArithmeticError):
    """Momentum sits on a pole of the resolvent (eigenvalue or resonance)."""


class ConvergenceError(LassoGraphError, ArithmeticError):
    """An iterative solver failed to converge; carries diagnostics."""

    def __init__(self, message, diagnostics=None):
        self.diagnostics = diagnostics or {}
        super().__init__(message)


class RootSearchError(ConvergenceError):
    """Bracketed root search could not account for all expected roots."""


class BranchLossError(ConvergenceError):
    """Continuation lost its branch; carries the partial trajectory."""

    def __init__(self, message, trajectory=None, diagnostics=None):
        self.trajectory = trajectory
        super().__init__(message, diagnostics)


class DecayWindowError(LassoGraphError, ArithmeticError):
    """Requested evolution times exceed the validity window of the quadrature grid."""


class InternalConsistencyError(LassoGraphError):
    """An invariant the implementation guarantees was violated at runtime."""
