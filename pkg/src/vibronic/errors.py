"""Exception types shared across the package."""


class ModelError(ValueError):
    """Malformed or inconsistent model document.

    ``line`` and ``column`` are set for syntax errors.
    """

    def __init__(self, message, line=None, column=None):
        if line is not None:
            message = f"{message} (line {line}, column {column})"
        super().__init__(message)
        self.line = line
        self.column = column


class SizeCapError(ValueError):
    """A dense or statevector construction would exceed its size budget."""


class CompileError(ValueError):
    """A term cannot be represented in the requested fixed-point format.

    ``term`` is the offending ``(j, i, MultiIndex)`` coupling key when known.
    """

    def __init__(self, message, term=None):
        super().__init__(message)
        self.term = term


class FitError(RuntimeError):
    """Empirical Trotter-error probes could not be fitted to a power law."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}
