"""
Exception hierarchy shared by every causalmix module.
"""

from typing import Optional, Sequence


class CausalMixError(Exception):
    """Base class for all causalmix errors."""
    pass


class NetworkError(CausalMixError):
    """A causal network is malformed."""
    pass


class CycleError(NetworkError):
    """The parent relation contains a directed cycle."""

    def __init__(self, cycle: Sequence[str]):
        self.cycle = list(cycle)
        path = " -> ".join(self.cycle + self.cycle[:1])
        super().__init__(f"cycle detected: {path}")


class DimensionError(NetworkError):
    """A CPT does not have q_i rows of r_i columns."""
    pass


class NormalizationError(NetworkError):
    """A CPT row does not sum to one, or holds an entry outside [0, 1]."""

    def __init__(self, node: str, row: int, total: float, message: Optional[str] = None):
        self.node = node
        self.row = row
        self.total = total
        super().__init__(message or f"row {row} of '{node}' sums to {total:.12g}, expected 1")


class ParseError(CausalMixError):
    """Text input could not be parsed."""

    def __init__(self, message: str, line: int = 0, column: int = 0):
        self.line = line
        self.column = column
        where = f"line {line}, column {column}: " if line else ""
        super().__init__(f"{where}{message}")


class SchemaError(CausalMixError):
    """A dataset and a structure (or two index spaces) do not line up."""
    pass


class UnknownVariableError(CausalMixError, KeyError):
    """A variable name is not part of the network or dataset."""

    def __str__(self):
        return Exception.__str__(self)


class UnknownStateError(CausalMixError, KeyError):
    """A state label or index is out of range for its variable."""

    def __str__(self):
        return Exception.__str__(self)


class ZeroProbabilityError(CausalMixError):
    """Conditioning evidence has probability zero."""
    pass


class UsageError(CausalMixError):
    """Bad arguments, flags or configuration."""
    pass
