"""Exceptions raised by the risk engine."""

from typing import List, Optional, Sequence


class ModelError(Exception):
    """Base class of all errors caused by inputs or parameters (exit code 1)."""

    exit_code = 1


class ParameterError(ModelError):
    """Missing or inconsistent population-level parameters."""


class ValidationError(ParameterError):
    """Parameter database violates its schema or an invariant.

    `path` is a JSON-pointer-style location of the offending value.
    """

    def __init__(self, message: str, path: str = "", ages: Optional[Sequence[int]] = None) -> None:
        self.path = path
        self.ages = list(ages) if ages else []
        where = f" at {path}" if path else ""
        super().__init__(f"{message}{where}")


class InputError(ModelError):
    """Malformed pedigree, evidence or command input."""


class StructuralError(InputError):
    """Pedigree cannot be peeled (loops, unreachable members, ...)."""

    def __init__(self, message: str, diagnostics: Optional[List["object"]] = None) -> None:
        self.diagnostics = diagnostics or []
        super().__init__(message)


class ImpossibilityError(ModelError):
    """Observed data has zero probability under the model."""


class CapacityError(ModelError):
    """A configured size cap would be exceeded."""


class InvariantError(Exception):
    """Internal invariant breach (exit code 2)."""

    exit_code = 2
