"""Exception hierarchy.

Two broad classes matter for the CLI exit code: user-input problems
(exit 1) and numerical/degeneracy problems (exit 2).
"""


class ScmppError(Exception):
    """Base class for all package errors."""


class InvalidInputError(ScmppError):
    """Bad user input: malformed files, unmet preconditions, bad arguments."""


class ParseError(InvalidInputError):
    """Malformed text input; carries the offending line/row when known."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"{message} (line {line})"
        super().__init__(message)
        self.line = line


class RangeError(InvalidInputError):
    """Value outside its documented domain."""


class DegenerateRangeError(InvalidInputError):
    """A range that must be nondegenerate collapsed (e.g. all marks equal)."""


class FeatureMismatchError(InvalidInputError):
    """Prediction features do not match the training schema."""

    def __init__(self, missing=(), extra=()):
        self.missing = tuple(missing)
        self.extra = tuple(extra)
        parts = []
        if self.missing:
            parts.append("missing: " + ", ".join(self.missing))
        if self.extra:
            parts.append("extra: " + ", ".join(self.extra))
        super().__init__("feature schema mismatch (" + "; ".join(parts) + ")")


class NumericalError(ScmppError):
    """Numerical failure: degeneracy, saturation, exhausted budgets."""


class NumericalDegeneracyError(NumericalError):
    """Non-finite intermediate or fully inhibited normalizing constant."""

    def __init__(self, message, parameters=None):
        if parameters is not None:
            message = f"{message} [parameters: {parameters}]"
        super().__init__(message)
        self.parameters = parameters


class DegenerateObjectiveError(NumericalError):
    """Objective non-finite over most of the initial search population."""


class BudgetError(NumericalError):
    """A computational budget guard tripped (pathological parameters)."""


class SaturationError(NumericalError):
    """Rejection sampling could not place a point (window too inhibited)."""

    def __init__(self, message, parameters=None):
        if parameters is not None:
            message = f"{message} [parameters: {parameters}]"
        super().__init__(message)
        self.parameters = parameters


class EstimationFailedError(NumericalError):
    """Every optimization start failed; carries per-start diagnostics."""

    def __init__(self, message, diagnostics=()):
        super().__init__(message)
        self.diagnostics = tuple(diagnostics)


class SimulationDegeneracyError(NumericalError):
    """Too many consecutive invalid realizations during model checking."""
