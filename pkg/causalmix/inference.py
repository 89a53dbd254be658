"""
Exact inference on a single causal network.

Manipulated evidence is applied by graph surgery first; the remaining
observed evidence is then conditioned on by variable elimination with a
min-degree ordering. Nodes that are not ancestors of a target or an
evidence variable are pruned before elimination.
"""

import logging
from dataclasses import dataclass
from enum import Enum
from functools import reduce
from itertools import product
from typing import Dict, List, Sequence, Set, Tuple

import numpy as np

from causalmix.core import CausalNetwork, StateRef, Variable, surgery
from causalmix.errors import UsageError, ZeroProbabilityError

logger = logging.getLogger(__name__)

MAX_ENUMERATION_ENTRIES = 4096


class EvidenceMode(Enum):
    OBSERVED = "observed"
    MANIPULATED = "manipulated"


@dataclass(frozen=True)
class Evidence:
    variable: str
    state: StateRef
    mode: EvidenceMode = EvidenceMode.OBSERVED

    @property
    def manipulated(self) -> bool:
        return self.mode is EvidenceMode.MANIPULATED

    @classmethod
    def parse(cls, variable: str, text: str) -> "Evidence":
        """'T' is an observation, '!T' a manipulation (the dataset markup)."""
        text = text.strip()
        if text.startswith("!"):
            return cls(variable, text[1:].strip(), EvidenceMode.MANIPULATED)
        return cls(variable, text, EvidenceMode.OBSERVED)


@dataclass(frozen=True)
class Query:
    """
    P(targets | evidence).

    A target may also appear as manipulated evidence, which pins it to the
    manipulated state; it may not appear as observed evidence.
    """
    targets: Tuple[str, ...]
    evidence: Tuple[Evidence, ...] = ()

    def __post_init__(self):
        targets = (self.targets,) if isinstance(self.targets, str) else tuple(self.targets)
        evidence = tuple(self.evidence)
        object.__setattr__(self, "targets", targets)
        object.__setattr__(self, "evidence", evidence)
        if not targets:
            raise UsageError("a query needs at least one target")
        if len(set(targets)) != len(targets):
            raise UsageError("query targets must be distinct")
        seen: Set[str] = set()
        for e in evidence:
            if e.variable in seen:
                raise UsageError(f"'{e.variable}' appears twice in the evidence")
            seen.add(e.variable)
            if e.variable in targets and not e.manipulated:
                raise UsageError(f"'{e.variable}' is both a target and observed evidence")


@dataclass(frozen=True, eq=False)
class Distribution:
    """A joint distribution over the target variables, axes in target order."""
    variables: Tuple[Variable, ...]
    probabilities: np.ndarray

    @property
    def vector(self) -> np.ndarray:
        return self.probabilities.reshape(-1)

    def as_dict(self) -> Dict[str, float]:
        """State label (comma-joined for several targets) to probability."""
        labels = product(*[v.states for v in self.variables])
        return {",".join(combo): float(p) for combo, p in zip(labels, self.vector)}

    def __getitem__(self, state: StateRef) -> float:
        if len(self.variables) != 1:
            raise UsageError("index a joint distribution through as_dict()")
        return float(self.probabilities[self.variables[0].state_index(state)])


class Factor:
    """A table over an ordered scope of variable indices."""

    def __init__(self, scope: Sequence[int], values: np.ndarray):
        self.scope = tuple(scope)
        self.values = values

    def multiply(self, other: "Factor") -> "Factor":
        scope = tuple(dict.fromkeys(self.scope + other.scope))
        label = {v: n for n, v in enumerate(scope)}
        values = np.einsum(
            self.values, [label[v] for v in self.scope],
            other.values, [label[v] for v in other.scope],
            list(range(len(scope))),
        )
        return Factor(scope, values)

    def sum_out(self, variable: int) -> "Factor":
        axis = self.scope.index(variable)
        return Factor(self.scope[:axis] + self.scope[axis + 1:], self.values.sum(axis=axis))

    def reduce(self, variable: int, state: int) -> "Factor":
        axis = self.scope.index(variable)
        return Factor(self.scope[:axis] + self.scope[axis + 1:], np.take(self.values, state, axis=axis))


def _cpt_factor(net: CausalNetwork, i: int) -> Factor:
    return Factor(net.structure.parents[i] + (i,), net.factor_array(i))


def _prepare(net: CausalNetwork, q: Query) -> Tuple[CausalNetwork, List[int], Dict[int, int]]:
    """Surgery for manipulated evidence; returns the cut network, target and evidence indices."""
    structure = net.structure
    targets = [structure.index_of(t) for t in q.targets]
    manipulated = [(e.variable, e.state) for e in q.evidence if e.manipulated]
    cut = surgery(net, manipulated)

    evidence: Dict[int, int] = {}
    for e in q.evidence:
        i = structure.index_of(e.variable)
        k = structure.variables[i].state_index(e.state)
        if i not in targets:
            evidence[i] = k
    return cut, targets, evidence


def _relevant_nodes(net: CausalNetwork, anchors: Set[int]) -> Set[int]:
    """Anchors plus all their ancestors."""
    keep = set(anchors)
    stack = list(anchors)
    while stack:
        for p in net.structure.parents[stack.pop()]:
            if p not in keep:
                keep.add(p)
                stack.append(p)
    return keep


def _min_degree_order(factors: List[Factor], eliminate: Set[int]) -> List[int]:
    """Greedy min-degree elimination order over the factor interaction graph."""
    neighbours: Dict[int, Set[int]] = {}
    for f in factors:
        for v in f.scope:
            neighbours.setdefault(v, set()).update(f.scope)
    for v in neighbours:
        neighbours[v].discard(v)

    order = []
    pending = set(eliminate)
    while pending:
        best = min(pending, key=lambda v: (len(neighbours.get(v, ())), v))
        order.append(best)
        pending.remove(best)
        adjacent = neighbours.pop(best, set())
        for v in adjacent:
            neighbours[v].discard(best)
            neighbours[v].update(adjacent - {v})
    return order


def _normalised(net: CausalNetwork, targets: List[int], factor: Factor) -> Distribution:
    values = np.transpose(factor.values, [factor.scope.index(t) for t in targets])
    total = float(values.sum())
    if not total > 0.0:
        raise ZeroProbabilityError("the evidence has probability zero")
    variables = tuple(net.structure.variables[t] for t in targets)
    return Distribution(variables, values / total)


def _absorb(factors: List[Factor], factor: Factor) -> None:
    """Append factor unless it is a constant; constants cancel in normalisation."""
    if factor.scope:
        factors.append(factor)
    elif not float(factor.values) > 0.0:
        raise ZeroProbabilityError("the evidence has probability zero")


def _eliminate(net: CausalNetwork, targets: List[int], evidence: Dict[int, int]) -> Distribution:
    keep = _relevant_nodes(net, set(targets) | set(evidence))
    factors: List[Factor] = []
    for i in sorted(keep):
        factor = _cpt_factor(net, i)
        for v, k in evidence.items():
            if v in factor.scope:
                factor = factor.reduce(v, k)
        _absorb(factors, factor)

    for variable in _min_degree_order(factors, keep - set(targets) - set(evidence)):
        touching = [f for f in factors if variable in f.scope]
        if not touching:
            continue
        factors = [f for f in factors if variable not in f.scope]
        _absorb(factors, reduce(Factor.multiply, touching).sum_out(variable))
    return _normalised(net, targets, reduce(Factor.multiply, factors))


def _enumerate(net: CausalNetwork, targets: List[int], evidence: Dict[int, int]) -> Distribution:
    """Sum the full joint assignment by assignment."""
    structure = net.structure
    entries = int(np.prod(structure.cardinalities, dtype=np.int64))
    if entries > MAX_ENUMERATION_ENTRIES:
        raise UsageError(f"joint of {entries} entries is too large to enumerate")
    table = np.zeros(tuple(structure.cardinalities[t] for t in targets))
    for assignment in product(*[range(r) for r in structure.cardinalities]):
        if any(assignment[v] != k for v, k in evidence.items()):
            continue
        p = 1.0
        for i, ps in enumerate(structure.parents):
            j = int(np.ravel_multi_index(tuple(assignment[x] for x in ps), structure.parent_dims(i))) if ps else 0
            p *= net.cpts[i][j, assignment[i]]
        table[tuple(assignment[t] for t in targets)] += p
    return _normalised(net, targets, Factor(tuple(targets), table))


def query(net: CausalNetwork, q: Query, method: str = "elimination") -> Distribution:
    """Exact P(targets | evidence), with surgery for manipulated evidence."""
    cut, targets, evidence = _prepare(net, q)
    logger.debug("query %s given %d evidence item(s) by %s", q.targets, len(q.evidence), method)
    if method == "elimination":
        return _eliminate(cut, targets, evidence)
    if method == "enumeration":
        return _enumerate(cut, targets, evidence)
    raise UsageError(f"unknown inference method '{method}'")


def marginal(net: CausalNetwork, variable: str) -> Distribution:
    return query(net, Query((variable,)))
