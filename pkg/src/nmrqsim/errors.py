"""Exception hierarchy shared by all modules."""


class NmrqError(Exception):
    """Base class for library errors."""


class InvalidInputError(NmrqError, ValueError):
    """Malformed arguments: length mismatches, non-Hermitian input, bad indices."""


class DegenerateInputError(InvalidInputError):
    """Input is well formed but degenerate (e.g. an all-zero Hamiltonian)."""


class ResourceLimitError(NmrqError):
    """A dense realization would exceed the configured qubit cap."""


class SpecParseError(InvalidInputError):
    """Spin-system file could not be parsed or validated."""

    def __init__(self, message: str, line: int | None = None, field: str | None = None):
        self.line = line
        self.field = field
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field '{field}'")
        prefix = f"{', '.join(where)}: " if where else ""
        super().__init__(prefix + message)


class CannotCompleteError(NmrqError):
    """Trace completion needs exactly one missing eigenvalue."""


class InconsistencyError(NmrqError):
    """Numerical result violates a mathematical guarantee beyond tolerance."""


class ConvergenceError(NmrqError):
    """Iterative routine did not converge within its budget."""
