"""
Complete-case datasets with per-cell manipulated/observed provenance, and
the `.cmx` text format:

    # comment
    vars: X1{F,T}, X2{F,T}
    !T,T
    T,F

A leading `!` marks a cell whose value was set by manipulation.
"""

import logging
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator, List, Sequence, Tuple, Union

import numpy as np

from causalmix.core import LABEL_PATTERN, Variable
from causalmix.errors import NetworkError, ParseError, SchemaError, UnknownStateError, UnknownVariableError

logger = logging.getLogger(__name__)

MANIPULATED_MARK = "!"

_HEADER = re.compile(r"^\s*vars\s*:\s*(.*)$")
_HEADER_ITEM = re.compile(r"\s*([A-Za-z0-9_][A-Za-z0-9_.\-]*)\s*\{([^{}]*)\}\s*")


@dataclass(frozen=True)
class CaseRecord:
    """One case: a 0-based state per variable and a manipulated flag per variable."""
    values: Tuple[int, ...]
    manipulated: Tuple[bool, ...]

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(int(v) for v in self.values))
        object.__setattr__(self, "manipulated", tuple(bool(f) for f in self.manipulated))
        if len(self.values) != len(self.manipulated):
            raise SchemaError("a case needs one manipulated flag per value")

    @property
    def is_observational(self) -> bool:
        return not any(self.manipulated)


@dataclass(frozen=True, eq=False)
class Dataset:
    """
    Cases over an ordered variable schema, stored column-wise.

    values is an (m, n) integer array of 0-based states, manipulated an
    (m, n) boolean array of the same shape.
    """
    variables: Tuple[Variable, ...]
    values: np.ndarray
    manipulated: np.ndarray

    def __post_init__(self):
        variables = tuple(self.variables)
        names = [v.name for v in variables]
        if not variables:
            raise SchemaError("a dataset needs at least one variable")
        if len(set(names)) != len(names):
            raise SchemaError(f"duplicate variable name in dataset schema: {names}")
        values = np.array(self.values, dtype=np.int64).reshape(-1, len(variables))
        flags = np.array(self.manipulated, dtype=bool).reshape(values.shape)
        for col, variable in enumerate(variables):
            column = values[:, col]
            if column.size and (column.min() < 0 or column.max() >= variable.cardinality):
                raise UnknownStateError(f"value out of range in column '{variable.name}'")
        values.setflags(write=False)
        flags.setflags(write=False)
        object.__setattr__(self, "variables", variables)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "manipulated", flags)

    @classmethod
    def empty(cls, variables: Sequence[Variable]) -> "Dataset":
        n = len(variables)
        return cls(tuple(variables), np.zeros((0, n), dtype=np.int64), np.zeros((0, n), dtype=bool))

    @classmethod
    def from_cases(cls, variables: Sequence[Variable], cases: Iterable[CaseRecord]) -> "Dataset":
        cases = list(cases)
        n = len(variables)
        if not cases:
            return cls.empty(variables)
        for case in cases:
            if len(case.values) != n:
                raise SchemaError(f"case has {len(case.values)} values, schema has {n} variables")
        return cls(tuple(variables),
                   np.array([c.values for c in cases], dtype=np.int64),
                   np.array([c.manipulated for c in cases], dtype=bool))

    def __len__(self) -> int:
        return self.values.shape[0]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Dataset):
            return NotImplemented
        return (self.variables == other.variables
                and np.array_equal(self.values, other.values)
                and np.array_equal(self.manipulated, other.manipulated))

    __hash__ = None

    @property
    def names(self) -> Tuple[str, ...]:
        return tuple(v.name for v in self.variables)

    def index_of(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise UnknownVariableError(f"dataset has no variable '{name}'") from None

    def variable(self, name: str) -> Variable:
        return self.variables[self.index_of(name)]

    @property
    def cases(self) -> List[CaseRecord]:
        return list(self)

    def __iter__(self) -> Iterator[CaseRecord]:
        for values, flags in zip(self.values, self.manipulated):
            yield CaseRecord(tuple(values), tuple(flags))

    def project(self, names: Sequence[str]) -> "Dataset":
        """Keep only the named columns, in the given order."""
        cols = [self.index_of(name) for name in names]
        return Dataset(tuple(self.variables[c] for c in cols), self.values[:, cols], self.manipulated[:, cols])

    def concat(self, other: "Dataset") -> "Dataset":
        if other.variables != self.variables:
            raise SchemaError("cannot concatenate datasets with different schemas")
        return Dataset(self.variables,
                       np.vstack([self.values, other.values]),
                       np.vstack([self.manipulated, other.manipulated]))

    def permuted(self, order: Sequence[int]) -> "Dataset":
        order = np.asarray(order, dtype=np.int64)
        return Dataset(self.variables, self.values[order], self.manipulated[order])

    def manipulation_counts(self) -> dict:
        """Number of cases in which each variable was manipulated."""
        return {name: int(n) for name, n in zip(self.names, self.manipulated.sum(axis=0))}


def _parse_header(line: str, line_no: int) -> Tuple[Variable, ...]:
    match = _HEADER.match(line)
    if not match:
        raise ParseError("expected header 'vars: NAME{state,...}, ...'", line_no, 1)
    body = match.group(1)
    variables: List[Variable] = []
    pos = 0
    while pos < len(body):
        item = _HEADER_ITEM.match(body, pos)
        if not item:
            raise ParseError("malformed variable declaration", line_no, len("vars:") + pos + 1)
        name = item.group(1)
        states = tuple(s.strip() for s in item.group(2).split(","))
        if any(not s for s in states):
            raise ParseError(f"empty state label for '{name}'", line_no, item.start(2) + 1)
        for state in states:
            if not LABEL_PATTERN.fullmatch(state):
                raise ParseError(f"invalid state label '{state}' for '{name}'", line_no,
                                 len("vars:") + item.start(2) + 1)
        if any(v.name == name for v in variables):
            raise ParseError(f"duplicate variable name '{name}'", line_no, item.start(1) + 1)
        try:
            variables.append(Variable(name, states))
        except NetworkError as e:
            raise ParseError(str(e), line_no, item.start(1) + 1) from None
        pos = item.end()
        if pos < len(body):
            if body[pos] != ",":
                raise ParseError("expected ',' between variables", line_no, len("vars:") + pos + 1)
            pos += 1
    return tuple(variables)


def parse_dataset(text: str) -> Dataset:
    """Parse `.cmx` text. Every cell must be present."""
    variables = None
    values: List[List[int]] = []
    flags: List[List[bool]] = []
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if variables is None:
            variables = _parse_header(line, line_no)
            continue
        cells = [c.strip() for c in line.split(",")]
        if len(cells) != len(variables):
            raise ParseError(f"row has {len(cells)} cells, expected {len(variables)}", line_no, 1)
        row, row_flags = [], []
        for variable, cell in zip(variables, cells):
            manipulated = cell.startswith(MANIPULATED_MARK)
            label = cell[1:].strip() if manipulated else cell
            if not label:
                raise ParseError(f"missing value for '{variable.name}'", line_no, 1)
            if label not in variable.states:
                raise ParseError(f"unknown state '{label}' for '{variable.name}'", line_no, 1)
            row.append(variable.states.index(label))
            row_flags.append(manipulated)
        values.append(row)
        flags.append(row_flags)
    if variables is None:
        raise ParseError("missing 'vars:' header")
    if not values:
        return Dataset.empty(variables)
    dataset = Dataset(variables, np.array(values, dtype=np.int64), np.array(flags, dtype=bool))
    logger.debug("parsed dataset: %d cases over %s", len(dataset), ", ".join(dataset.names))
    return dataset


def write_dataset(d: Dataset) -> str:
    for variable in d.variables:
        variable.require_writable()
    header = "vars: " + ", ".join(f"{v.name}{{{','.join(v.states)}}}" for v in d.variables)
    lines = [header]
    for values, flags in zip(d.values, d.manipulated):
        cells = []
        for variable, value, flag in zip(d.variables, values, flags):
            label = variable.states[value]
            cells.append(MANIPULATED_MARK + label if flag else label)
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def load_dataset(path: Union[str, Path]) -> Dataset:
    return parse_dataset(Path(path).read_text(encoding="utf-8"))


def save_dataset(d: Dataset, path: Union[str, Path]) -> None:
    Path(path).write_text(write_dataset(d), encoding="utf-8")
