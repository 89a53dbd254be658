"""
Core types for causal Bayesian networks.

Variables, structures and networks are immutable. A node's parent joint
states are indexed mixed-radix with the first-listed parent varying slowest,
so the CPT of node i is a (q_i, r_i) array whose row j holds
P(X_i | parents in joint state j). The scoring formulas use the same j.
"""

import logging
import re
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from itertools import combinations
from typing import Dict, FrozenSet, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

import networkx as nx
import numpy as np

from causalmix.errors import (
    CycleError,
    DimensionError,
    NetworkError,
    NormalizationError,
    SchemaError,
    UnknownStateError,
    UnknownVariableError,
    UsageError,
)

logger = logging.getLogger(__name__)

ROW_SUM_TOLERANCE = 1e-6
INTENT_PREFIX = "M_"

# variable names and state labels the text formats can carry
LABEL_PATTERN = re.compile(r"[A-Za-z0-9_][A-Za-z0-9_.\-]*")

StateRef = Union[int, str]
Assignments = Union[Mapping[str, StateRef], Iterable[Tuple[str, StateRef]]]


@dataclass(frozen=True)
class Variable:
    """A discrete variable with an ordered list of state labels."""
    name: str
    states: Tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "states", tuple(str(s) for s in self.states))
        if not self.name:
            raise NetworkError("variable name must be nonempty")
        if len(self.states) < 2:
            raise NetworkError(f"variable '{self.name}' needs at least 2 states, got {len(self.states)}")
        if len(set(self.states)) != len(self.states):
            raise NetworkError(f"variable '{self.name}' has duplicate state labels")

    def require_writable(self) -> None:
        """Raise SchemaError if the name or a state label cannot be written as text."""
        for label in (self.name, *self.states):
            if not LABEL_PATTERN.fullmatch(label):
                raise SchemaError(f"'{label}' in variable '{self.name}' is not a valid label "
                                  "(letters, digits, _ . - and no leading . or -)")

    @property
    def cardinality(self) -> int:
        return len(self.states)

    def state_index(self, state: StateRef) -> int:
        """Resolve a state label, or a 0-based index, to the 0-based index."""
        if isinstance(state, (int, np.integer)) and not isinstance(state, bool):
            if 0 <= state < len(self.states):
                return int(state)
            raise UnknownStateError(
                f"state index {state} out of range for '{self.name}' ({len(self.states)} states)"
            )
        try:
            return self.states.index(str(state))
        except ValueError:
            raise UnknownStateError(
                f"'{state}' is not a state of '{self.name}' (states: {', '.join(self.states)})"
            ) from None


@dataclass(frozen=True)
class NetworkStructure:
    """
    Ordered variables plus, per variable, an ordered tuple of parent indices.

    Acyclicity is checked by validate_network rather than here, so that a
    cyclic structure can still be built and reported on.
    """
    variables: Tuple[Variable, ...]
    parents: Tuple[Tuple[int, ...], ...]

    def __post_init__(self):
        variables = tuple(self.variables)
        parents = tuple(tuple(int(p) for p in ps) for ps in self.parents)
        object.__setattr__(self, "variables", variables)
        object.__setattr__(self, "parents", parents)

        if len(parents) != len(variables):
            raise NetworkError(f"{len(variables)} variables but {len(parents)} parent lists")
        names = [v.name for v in variables]
        if len(set(names)) != len(names):
            seen, dupes = set(), []
            for name in names:
                if name in seen:
                    dupes.append(name)
                seen.add(name)
            raise NetworkError(f"duplicate variable names: {', '.join(dupes)}")
        for i, ps in enumerate(parents):
            for p in ps:
                if not 0 <= p < len(variables):
                    raise NetworkError(f"parent index {p} of '{names[i]}' out of range")
            if i in ps:
                raise NetworkError(f"'{names[i]}' is its own parent")
            if len(set(ps)) != len(ps):
                raise NetworkError(f"'{names[i]}' lists a parent twice")

    @classmethod
    def from_names(cls, variables: Sequence[Variable],
                   parents: Optional[Mapping[str, Sequence[str]]] = None) -> "NetworkStructure":
        """Build from parent names, e.g. {"X2": ["X1"]}; unlisted nodes are roots."""
        variables = tuple(variables)
        index = {v.name: i for i, v in enumerate(variables)}
        parents = parents or {}
        for child in parents:
            if child not in index:
                raise UnknownVariableError(f"unknown variable '{child}'")
        parent_idx = []
        for v in variables:
            resolved = []
            for p in parents.get(v.name, ()):
                if p not in index:
                    raise UnknownVariableError(f"unknown parent '{p}' of '{v.name}'")
                resolved.append(index[p])
            parent_idx.append(tuple(resolved))
        return cls(variables, tuple(parent_idx))

    @classmethod
    def from_arcs(cls, variables: Sequence[Variable], arcs: Iterable[Tuple[str, str]]) -> "NetworkStructure":
        """Build from (parent, child) arcs; parent order follows arc order."""
        parents: Dict[str, List[str]] = {}
        for parent, child in arcs:
            parents.setdefault(child, []).append(parent)
        return cls.from_names(variables, parents)

    @cached_property
    def names(self) -> Tuple[str, ...]:
        return tuple(v.name for v in self.variables)

    @cached_property
    def _positions(self) -> Dict[str, int]:
        return {name: i for i, name in enumerate(self.names)}

    @cached_property
    def cardinalities(self) -> Tuple[int, ...]:
        return tuple(v.cardinality for v in self.variables)

    def __len__(self) -> int:
        return len(self.variables)

    def __contains__(self, name: object) -> bool:
        return name in self._positions

    def index_of(self, name: str) -> int:
        try:
            return self._positions[name]
        except KeyError:
            raise UnknownVariableError(f"unknown variable '{name}'") from None

    def variable(self, name: str) -> Variable:
        return self.variables[self.index_of(name)]

    def parent_names(self, name: str) -> Tuple[str, ...]:
        return tuple(self.names[p] for p in self.parents[self.index_of(name)])

    def parent_dims(self, i: int) -> Tuple[int, ...]:
        return tuple(self.cardinalities[p] for p in self.parents[i])

    def parent_state_count(self, i: int) -> int:
        """q_i, the number of joint parent states of node i (1 for roots)."""
        return int(np.prod(self.parent_dims(i), dtype=np.int64))

    @cached_property
    def arcs(self) -> Tuple[Tuple[str, str], ...]:
        """(parent, child) pairs, grouped by child in variable order."""
        return tuple((self.names[p], self.names[i]) for i, ps in enumerate(self.parents) for p in ps)

    def has_arc(self, parent: str, child: str) -> bool:
        return self.index_of(parent) in self.parents[self.index_of(child)]

    @cached_property
    def graph(self) -> nx.DiGraph:
        """The parent relation as a networkx digraph (treat as read-only)."""
        graph = nx.DiGraph()
        graph.add_nodes_from(self.names)
        graph.add_edges_from(self.arcs)
        return graph

    def children(self, name: str) -> Tuple[str, ...]:
        i = self.index_of(name)
        return tuple(self.names[c] for c, ps in enumerate(self.parents) if i in ps)

    def descendants(self, name: str) -> FrozenSet[str]:
        self.index_of(name)
        return frozenset(nx.descendants(self.graph, name))

    def with_parents(self, name: str, parents: Sequence[str]) -> "NetworkStructure":
        """Copy with the parent list of one node replaced."""
        i = self.index_of(name)
        new_parents = list(self.parents)
        new_parents[i] = tuple(self.index_of(p) for p in parents)
        return NetworkStructure(self.variables, tuple(new_parents))

    def add_variable(self, variable: Variable, parents: Sequence[str] = ()) -> "NetworkStructure":
        """Copy with one more variable appended at the end."""
        return NetworkStructure(
            self.variables + (variable,),
            self.parents + (tuple(self.index_of(p) for p in parents),),
        )

    def describe(self) -> str:
        if not self.arcs:
            return "(no arcs)"
        return ", ".join(f"{p}->{c}" for p, c in self.arcs)


@dataclass(frozen=True, eq=False)
class CausalNetwork:
    """A structure plus one (q_i, r_i) probability table per node."""
    structure: NetworkStructure
    cpts: Tuple[np.ndarray, ...]
    name: str = "network"

    def __post_init__(self):
        cpts = tuple(np.array(c, dtype=float) for c in self.cpts)
        if len(cpts) != len(self.structure):
            raise DimensionError(f"{len(self.structure)} variables but {len(cpts)} CPTs")
        for c in cpts:
            c.setflags(write=False)
        object.__setattr__(self, "cpts", cpts)

    @property
    def variables(self) -> Tuple[Variable, ...]:
        return self.structure.variables

    @property
    def names(self) -> Tuple[str, ...]:
        return self.structure.names

    def cpt(self, name: str) -> np.ndarray:
        return self.cpts[self.structure.index_of(name)]

    def factor_array(self, i: int) -> np.ndarray:
        """CPT of node i reshaped to (r_parent1, ..., r_parentk, r_i)."""
        dims = self.structure.parent_dims(i) + (self.structure.cardinalities[i],)
        return self.cpts[i].reshape(dims)

    def structurally_equal(self, other: "CausalNetwork", tol: float = 1e-9) -> bool:
        """Same variables, states, parent order, and CPTs within tol."""
        if self.structure != other.structure:
            return False
        return all(a.shape == b.shape and np.allclose(a, b, rtol=0.0, atol=tol)
                   for a, b in zip(self.cpts, other.cpts))


class ConfounderRule(Enum):
    """How a 'common ancestor' of a node pair is recognised."""
    EXCLUSIVE_PATHS = "exclusive-paths"
    SHARED_ANCESTOR = "shared-ancestor"


DEFAULT_CONFOUNDER_RULE = ConfounderRule.EXCLUSIVE_PATHS


@dataclass(frozen=True)
class PairClass:
    causally_related: bool
    confounded: bool

    @property
    def label(self) -> str:
        related = "related" if self.causally_related else "unrelated"
        confounded = "confounded" if self.confounded else "unconfounded"
        return f"{related}-{confounded}"


@dataclass
class PairTaxonomy:
    """2x2 counts of node pairs by causal relatedness and confounding."""
    related_confounded: int = 0
    related_unconfounded: int = 0
    unrelated_confounded: int = 0
    unrelated_unconfounded: int = 0

    def add(self, pair_class: PairClass) -> None:
        attr = pair_class.label.replace("-", "_")
        setattr(self, attr, getattr(self, attr) + 1)

    @property
    def related(self) -> int:
        return self.related_confounded + self.related_unconfounded

    @property
    def unrelated(self) -> int:
        return self.unrelated_confounded + self.unrelated_unconfounded

    @property
    def confounded(self) -> int:
        return self.related_confounded + self.unrelated_confounded

    @property
    def unconfounded(self) -> int:
        return self.related_unconfounded + self.unrelated_unconfounded

    @property
    def total(self) -> int:
        return self.related + self.unrelated

    def rows(self) -> List[Tuple[str, int, int, int]]:
        """(row label, confounded, unconfounded, total) plus a totals row."""
        return [
            ("related", self.related_confounded, self.related_unconfounded, self.related),
            ("unrelated", self.unrelated_confounded, self.unrelated_unconfounded, self.unrelated),
            ("total", self.confounded, self.unconfounded, self.total),
        ]


@dataclass
class ValidationReport:
    network: str
    issues: List[NetworkError] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.issues

    def raise_if_invalid(self) -> None:
        if self.issues:
            raise self.issues[0]

    def __str__(self) -> str:
        if self.ok:
            return f"{self.network}: valid"
        lines = [f"{self.network}: {len(self.issues)} problem(s)"]
        lines.extend(f"  - {issue}" for issue in self.issues)
        return "\n".join(lines)


def topological_order(structure: NetworkStructure) -> List[str]:
    """Parents before children; ties broken by declaration order."""
    position = structure._positions
    try:
        return list(nx.lexicographical_topological_sort(structure.graph, key=position.__getitem__))
    except nx.NetworkXUnfeasible:
        cycle = nx.find_cycle(structure.graph)
        raise CycleError([u for u, _ in cycle]) from None


def validate_network(net: CausalNetwork) -> ValidationReport:
    """Check acyclicity, CPT shapes, entry range and row normalisation."""
    structure = net.structure
    report = ValidationReport(network=net.name)

    try:
        cycle = nx.find_cycle(structure.graph)
        report.issues.append(CycleError([u for u, _ in cycle]))
    except nx.NetworkXNoCycle:
        pass

    for i, (variable, table) in enumerate(zip(structure.variables, net.cpts)):
        expected = (structure.parent_state_count(i), variable.cardinality)
        if table.shape != expected:
            report.issues.append(DimensionError(
                f"CPT of '{variable.name}' has shape {table.shape}, expected {expected}"
            ))
            continue
        for j, row in enumerate(table, start=1):
            total = float(row.sum())
            if not np.all(np.isfinite(row)) or np.any(row < 0.0) or np.any(row > 1.0):
                report.issues.append(NormalizationError(
                    variable.name, j, total,
                    f"row {j} of '{variable.name}' has an entry outside [0, 1]",
                ))
            elif abs(total - 1.0) > ROW_SUM_TOLERANCE:
                report.issues.append(NormalizationError(variable.name, j, total))
    return report


def ensure_valid(net: CausalNetwork) -> CausalNetwork:
    validate_network(net).raise_if_invalid()
    return net


def normalize_rows(net: CausalNetwork) -> CausalNetwork:
    """Rescale every CPT row to sum to one."""
    tables = []
    for variable, table in zip(net.variables, net.cpts):
        totals = table.sum(axis=1, keepdims=True)
        if np.any(totals <= 0.0):
            row = int(np.argmin(totals[:, 0])) + 1
            raise NormalizationError(variable.name, row, float(totals.min()))
        tables.append(table / totals)
    return CausalNetwork(net.structure, tuple(tables), name=net.name)


def joint_state_index(structure: NetworkStructure, node: str, parent_values: Sequence[int]) -> int:
    """
    1-based index j of a parent joint state, given 1-based parent states.

    The first-listed parent varies slowest: for parents (A: 3 states,
    B: 2 states) the order is (1,1), (1,2), (2,1), (2,2), (3,1), (3,2).
    """
    i = structure.index_of(node)
    dims = structure.parent_dims(i)
    if len(parent_values) != len(dims):
        raise SchemaError(f"'{node}' has {len(dims)} parents, got {len(parent_values)} values")
    zero_based = []
    for p, value, dim in zip(structure.parents[i], parent_values, dims):
        if not 1 <= value <= dim:
            raise UnknownStateError(f"state {value} of parent '{structure.names[p]}' outside 1..{dim}")
        zero_based.append(value - 1)
    if not dims:
        return 1
    return int(np.ravel_multi_index(tuple(zero_based), dims)) + 1


def parent_configurations(structure: NetworkStructure, i: int, values: np.ndarray) -> np.ndarray:
    """0-based joint parent state of node i for each row of a (cases, variables) value array."""
    parents = structure.parents[i]
    if not parents:
        return np.zeros(values.shape[0], dtype=np.int64)
    columns = tuple(values[:, p] for p in parents)
    return np.ravel_multi_index(columns, structure.parent_dims(i)).astype(np.int64)


def ancestors(structure: NetworkStructure, node: str) -> FrozenSet[str]:
    """All nodes with a directed path into node (node itself excluded)."""
    structure.index_of(node)
    return frozenset(nx.ancestors(structure.graph, node))


def _exclusive_ancestors(structure: NetworkStructure, node: str, blocked: str) -> FrozenSet[str]:
    view = nx.restricted_view(structure.graph, [blocked], [])
    return frozenset(nx.ancestors(view, node))


def classify_pair(structure: NetworkStructure, x: str, y: str,
                  rule: ConfounderRule = DEFAULT_CONFOUNDER_RULE) -> PairClass:
    """
    Causal relatedness and confounding of an unordered pair.

    EXCLUSIVE_PATHS (default): some z reaches x by a path avoiding y and
    reaches y by a path avoiding x. SHARED_ANCESTOR: some z other than x, y is
    an ancestor of both, whatever the paths pass through.
    """
    if x == y:
        raise UsageError(f"cannot classify '{x}' against itself")
    anc_x = ancestors(structure, x)
    anc_y = ancestors(structure, y)
    related = x in anc_y or y in anc_x
    if rule is ConfounderRule.SHARED_ANCESTOR:
        common = (anc_x & anc_y) - {x, y}
    else:
        common = _exclusive_ancestors(structure, x, y) & _exclusive_ancestors(structure, y, x)
    return PairClass(causally_related=related, confounded=bool(common))


def pair_taxonomy(structure: NetworkStructure,
                  rule: ConfounderRule = DEFAULT_CONFOUNDER_RULE,
                  pairs: Optional[Iterable[Tuple[str, str]]] = None) -> PairTaxonomy:
    """Tally classify_pair over the given pairs, or over all unordered pairs."""
    if pairs is None:
        pairs = combinations(structure.names, 2)
    taxonomy = PairTaxonomy()
    for x, y in pairs:
        taxonomy.add(classify_pair(structure, x, y, rule))
    logger.debug("classified %d pairs of %d nodes", taxonomy.total, len(structure))
    return taxonomy


def intent_variable(variable: Variable) -> Variable:
    """M_<name>: state '0' means observe, state 'k' means set to the k-th state."""
    return Variable(f"{INTENT_PREFIX}{variable.name}", tuple(str(k) for k in range(variable.cardinality + 1)))


def resolve_assignments(structure: NetworkStructure, assignments: Assignments) -> Dict[int, int]:
    """Map (variable, state) pairs to {variable index: 0-based state}."""
    items = assignments.items() if isinstance(assignments, Mapping) else assignments
    resolved: Dict[int, int] = {}
    for name, state in items:
        i = structure.index_of(name)
        k = structure.variables[i].state_index(state)
        if resolved.get(i, k) != k:
            raise UsageError(f"'{name}' is set to two different states")
        resolved[i] = k
    return resolved


def surgery(net: CausalNetwork, manipulated: Assignments) -> CausalNetwork:
    """
    Cut the arcs into each manipulated variable and pin it to its state.

    Every other node keeps its parents and CPT.
    """
    settings = resolve_assignments(net.structure, manipulated)
    if not settings:
        return net
    parents = list(net.structure.parents)
    tables = list(net.cpts)
    for i, k in settings.items():
        point_mass = np.zeros((1, net.structure.cardinalities[i]))
        point_mass[0, k] = 1.0
        parents[i] = ()
        tables[i] = point_mass
    structure = NetworkStructure(net.structure.variables, tuple(parents))
    return CausalNetwork(structure, tuple(tables), name=net.name)
