from __future__ import annotations

from pyagnostics.exceptions import DiagnosticError


class ParameterError(DiagnosticError):
    """Invalid or inadmissible parameters (exit code 2)."""


class MismatchError(DiagnosticError):
    """A differential check or target comparison failed (exit code 3)."""


class DynamicsError(DiagnosticError):
    """An internal invariant of the engine or the discharge model was breached."""
