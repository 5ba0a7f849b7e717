"""Exception hierarchy.

Every error carries a short ``kind`` tag (``"on-support"``, ``"no-convergence"``,
...) so callers and the CLI can branch on the failure class without parsing
messages.  ``exit_code`` is what the CLI returns when the error escapes a command.
"""


class NikishinError(Exception):
    kind = "error"
    exit_code = 4

    def __init__(self, message="", kind=None):
        super().__init__(message)
        if kind is not None:
            self.kind = kind


class InvalidInputError(NikishinError, ValueError):
    kind = "invalid-input"
    exit_code = 2


class OnSupportError(InvalidInputError):
    kind = "on-support"


class OverlapError(InvalidInputError):
    kind = "overlapping-supports"


class GridMismatchError(InvalidInputError):
    kind = "grid-mismatch"


class GeometryMismatchError(InvalidInputError):
    kind = "geometry-mismatch"


class DegreeCapError(InvalidInputError):
    kind = "degree-cap-exceeded"


class NumericalError(NikishinError, ArithmeticError):
    kind = "numerical"


class NoConvergenceError(NumericalError):
    kind = "no-convergence"


class SingularSystemError(NumericalError):
    kind = "singular-system"


class ZeroCountMismatchError(NumericalError):
    kind = "zero-count-mismatch"


class SignNotConstantError(NumericalError):
    kind = "sign-not-constant"


class ConfigError(NikishinError):
    """Aggregated schema errors; ``errors`` is a list of human readable lines."""

    kind = "schema-error"
    exit_code = 3

    def __init__(self, errors, kind=None):
        if isinstance(errors, str):
            errors = [errors]
        self.errors = list(errors)
        super().__init__("\n".join(self.errors), kind)
