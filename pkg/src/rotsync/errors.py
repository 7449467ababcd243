"""Exception and warning types shared across the library."""


class RotsyncError(Exception):
    """Base class for failures raised by this library."""


class InvalidParams(RotsyncError, ValueError):
    """A parameter is outside its admissible range."""


class RankDeficient(RotsyncError):
    """Retraction input is numerically singular; the step size is too large."""


class NoConvergence(RotsyncError):
    """Iterative eigensolver exhausted its iteration budget."""


class NonSmoothPoint(RotsyncError):
    """Finite differencing was requested at a point where the objective has a kink."""


class ParseError(RotsyncError):
    """A serialized instance or CSV file is malformed.

    Carries the 1-based line number of the offending line when known.
    """

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class DegenerateProjection(UserWarning):
    """The nearest-rotation problem has a non-unique minimizer.

    Emitted when the determinant correction fires while the two smallest
    singular values coincide; the returned matrix is one valid minimizer.
    """
