"""
Causal discovery over an explicit family of candidate structures.

Every structure in a HypothesisSet is scored against the same dataset, the
joint scores are normalised into P(S | D), and features (an arc, a directed
path) or predictions are averaged under that posterior.

The pairwise family models "x causes y" as the single arc x -> y. Datasets
are projected onto {x, y}, so one arc parameterises any dependence that an
indirect causal route would induce between the two.
"""

import logging
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.special import logsumexp

from causalmix.core import (
    NetworkStructure,
    Variable,
    ancestors,
    intent_variable,
)
from causalmix.dataio import Dataset
from causalmix.errors import SchemaError, UsageError
from causalmix.inference import Distribution, Evidence, Query, query
from causalmix.scoring import (
    PriorRule,
    StructureScore,
    default_prior,
    posterior_params,
    score_structure,
    tally_counts,
)

logger = logging.getLogger(__name__)

H1, H2, H3 = "H1", "H2", "H3"
MAX_ENUMERATED_VARIABLES = 5
PRIOR_SUM_TOLERANCE = 1e-9


def _structure_key(s: NetworkStructure) -> Tuple[Tuple[str, ...], frozenset]:
    return s.names, frozenset(s.arcs)


@dataclass(frozen=True)
class HypothesisSet:
    """Candidate structures over one variable set, each with a log prior."""
    structures: Tuple[NetworkStructure, ...]
    log_priors: Tuple[float, ...]
    labels: Tuple[str, ...] = ()

    def __post_init__(self):
        structures = tuple(self.structures)
        log_priors = tuple(float(p) for p in self.log_priors)
        labels = tuple(self.labels) or tuple(f"S{k}" for k in range(1, len(structures) + 1))
        object.__setattr__(self, "structures", structures)
        object.__setattr__(self, "log_priors", log_priors)
        object.__setattr__(self, "labels", labels)

        if not structures:
            raise UsageError("a hypothesis set needs at least one structure")
        if len(log_priors) != len(structures) or len(labels) != len(structures):
            raise UsageError("structures, log priors and labels must have the same length")
        if len(set(labels)) != len(labels):
            raise UsageError(f"duplicate hypothesis labels: {labels}")
        if len({_structure_key(s) for s in structures}) != len(structures):
            raise UsageError("hypothesis structures must be distinct")
        if any(set(s.names) != set(structures[0].names) for s in structures):
            raise SchemaError("all hypotheses must be over the same variables")
        if any(math.isnan(p) or p == -math.inf for p in log_priors):
            raise UsageError("every listed structure needs a positive prior probability")
        if logsumexp(log_priors) > PRIOR_SUM_TOLERANCE:
            raise UsageError("structure priors sum to more than one")

    @classmethod
    def pairwise(cls, x: Variable, y: Variable,
                 log_priors: Optional[Sequence[float]] = None) -> "HypothesisSet":
        """H1 = x -> y, H2 = y -> x, H3 = no arc; uniform 1/3 priors by default."""
        variables = (x, y)
        structures = (
            NetworkStructure.from_names(variables, {y.name: [x.name]}),
            NetworkStructure.from_names(variables, {x.name: [y.name]}),
            NetworkStructure.from_names(variables),
        )
        if log_priors is None:
            log_priors = (math.log(1.0 / 3.0),) * 3
        return cls(structures, tuple(log_priors), (H1, H2, H3))

    @classmethod
    def all_dags(cls, variables: Sequence[Variable]) -> "HypothesisSet":
        """Every DAG over the variables, under a uniform structure prior."""
        structures = enumerate_dags(variables)
        log_prior = -math.log(len(structures))
        return cls(tuple(structures), (log_prior,) * len(structures))

    @property
    def variables(self) -> Tuple[Variable, ...]:
        return self.structures[0].variables

    def __len__(self) -> int:
        return len(self.structures)

    def index(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise UsageError(f"unknown hypothesis '{label}' (have {', '.join(self.labels)})") from None

    def augmented(self, targets: Sequence[str]) -> "HypothesisSet":
        """The same family with an intent variable M_t as a parent of each target."""
        structures = []
        for s in self.structures:
            for target in targets:
                s = augment_intent(s, target)
            structures.append(s)
        return HypothesisSet(tuple(structures), self.log_priors, self.labels)


def _ancestor_masks(parents: Tuple[int, ...]) -> List[int]:
    """Per node, a bitmask of the node itself plus all its ancestors."""
    masks: Dict[int, int] = {}

    def visit(v: int) -> int:
        if v not in masks:
            mask = 1 << v
            bits = parents[v]
            p = 0
            while bits:
                if bits & 1:
                    mask |= visit(p)
                bits >>= 1
                p += 1
            masks[v] = mask
        return masks[v]

    return [visit(v) for v in range(len(parents))]


@lru_cache(maxsize=None)
def _dag_parent_masks(n: int) -> Tuple[Tuple[int, ...], ...]:
    """
    All DAGs on n labelled nodes as tuples of parent bitmasks.

    Node v is added to each DAG on nodes 0..v-1 with every parent set P and
    child set C such that no member of C is an ancestor-or-self of a member
    of P; each DAG arises exactly once.
    """
    dags: List[Tuple[int, ...]] = [()]
    for v in range(n):
        grown = []
        for parents in dags:
            reach = _ancestor_masks(parents)
            for parent_mask in range(1 << v):
                blocked = 0
                for p in range(v):
                    if parent_mask >> p & 1:
                        blocked |= reach[p]
                for child_mask in range(1 << v):
                    if child_mask & blocked:
                        continue
                    updated = tuple(ps | (1 << v) if child_mask >> c & 1 else ps
                                    for c, ps in enumerate(parents))
                    grown.append(updated + (parent_mask,))
        dags = grown
    return tuple(dags)


def enumerate_dags(variables: Sequence[Variable]) -> List[NetworkStructure]:
    """All DAGs on up to five variables, ordered by arc count."""
    variables = tuple(variables)
    n = len(variables)
    if n == 0:
        raise UsageError("cannot enumerate structures over zero variables")
    if n > MAX_ENUMERATED_VARIABLES:
        raise UsageError(f"DAG enumeration supports at most {MAX_ENUMERATED_VARIABLES} variables, got {n}")
    masks = sorted(_dag_parent_masks(n), key=lambda ps: (sum(bin(m).count("1") for m in ps), ps))
    structures = [
        NetworkStructure(variables, tuple(tuple(p for p in range(n) if m >> p & 1) for m in ps))
        for ps in masks
    ]
    logger.debug("enumerated %d DAGs over %d variables", len(structures), n)
    return structures


@dataclass(frozen=True, eq=False)
class HypothesisPosterior:
    hypotheses: HypothesisSet
    scores: Tuple[StructureScore, ...]
    posteriors: np.ndarray

    @property
    def labels(self) -> Tuple[str, ...]:
        return self.hypotheses.labels

    @property
    def structures(self) -> Tuple[NetworkStructure, ...]:
        return self.hypotheses.structures

    @property
    def log_joints(self) -> np.ndarray:
        return np.array([s.log_joint for s in self.scores])

    def posterior_of(self, label: str) -> float:
        return float(self.posteriors[self.hypotheses.index(label)])

    def as_dict(self) -> Dict[str, float]:
        return {label: float(p) for label, p in zip(self.labels, self.posteriors)}

    def best(self) -> str:
        return self.labels[int(np.argmax(self.posteriors))]


def structure_posterior(d: Dataset, hyp: HypothesisSet,
                        prior_rule: PriorRule = default_prior) -> HypothesisPosterior:
    """P(S | D) for every structure in the family, normalised in log space."""
    scores = tuple(score_structure(d, s, lp, prior_rule) for s, lp in zip(hyp.structures, hyp.log_priors))
    log_joint = np.array([s.log_joint for s in scores])
    posteriors = np.exp(log_joint - logsumexp(log_joint))
    posteriors.setflags(write=False)
    return HypothesisPosterior(hyp, scores, posteriors)


def feature_probability(posterior: HypothesisPosterior,
                        feature: Callable[[NetworkStructure], bool]) -> float:
    """Posterior mass of the structures for which feature(structure) holds."""
    return float(sum(p for s, p in zip(posterior.structures, posterior.posteriors) if feature(s)))


def arc_probability(d: Dataset, hyp: HypothesisSet, x: str, y: str,
                    prior_rule: PriorRule = default_prior) -> float:
    """P(x -> y | D): posterior mass of structures containing that arc."""
    posterior = structure_posterior(d, hyp, prior_rule)
    return feature_probability(posterior, lambda s: s.has_arc(x, y))


def causal_probability(posterior: HypothesisPosterior, x: str, y: str) -> float:
    """Posterior mass of structures with a directed path from x to y."""
    return feature_probability(posterior, lambda s: x in ancestors(s, y))


class ModelAverager:
    """
    Posterior-weighted predictions over a hypothesis family.

    The structure posterior and each structure's posterior-mean network are
    fitted once; predict() can then be called for any target and evidence.
    """

    def __init__(self, d: Dataset, hyp: HypothesisSet, prior_rule: PriorRule = default_prior):
        self.hypotheses = hyp
        self.posterior = structure_posterior(d, hyp, prior_rule)
        self.networks = [posterior_params(tally_counts(d, s), prior_rule(s), s) for s in hyp.structures]

    def per_structure(self, target: str, given: Evidence,
                      context: Sequence[Evidence] = ()) -> List[Distribution]:
        """P(target | given, D, S) for each structure, in family order."""
        if target == given.variable:
            raise UsageError(f"cannot predict '{target}' from itself")
        q = Query((target,), (given, *context))
        return [query(net, q) for net in self.networks]

    def predict(self, target: str, given: Evidence, context: Sequence[Evidence] = ()) -> Distribution:
        predictions = self.per_structure(target, given, context)
        mixed = sum(w * p.probabilities for w, p in zip(self.posterior.posteriors, predictions))
        return Distribution(predictions[0].variables, np.asarray(mixed))


def averaged_predict(d: Dataset, hyp: HypothesisSet, target: str, given: Evidence,
                     prior_rule: PriorRule = default_prior) -> Distribution:
    """Sum over S of P(target | given, D, S) P(S | D)."""
    return ModelAverager(d, hyp, prior_rule).predict(target, given)


def augment_intent(structure: NetworkStructure, target: str) -> NetworkStructure:
    """
    Append M_target (states '0'..'r') and make it the last parent of target.

    M_target = 0 is "observe"; M_target = k asks for the k-th state, which a
    learned CPT row may or may not honour.
    """
    intent = intent_variable(structure.variable(target))
    if intent.name in structure:
        raise UsageError(f"'{intent.name}' already exists; '{target}' is augmented once only")
    augmented = structure.add_variable(intent)
    return augmented.with_parents(target, structure.parent_names(target) + (intent.name,))


def encode_intents(d: Dataset, targets: Sequence[str]) -> Dataset:
    """
    Re-encode deterministic manipulations as observed intent columns.

    M_t is the manipulated state plus one, or 0 where t was observed. All
    manipulation flags are cleared, so the result is purely observational.
    """
    cols = [d.index_of(t) for t in targets]
    others = np.ones(len(d.variables), dtype=bool)
    others[cols] = False
    if d.manipulated[:, others].any():
        raise SchemaError("manipulated cells outside the intent targets cannot be re-encoded")
    intents = np.where(d.manipulated[:, cols], d.values[:, cols] + 1, 0)
    variables = d.variables + tuple(intent_variable(d.variables[c]) for c in cols)
    values = np.hstack([d.values, intents.reshape(len(d), len(cols))])
    return Dataset(variables, values, np.zeros_like(values, dtype=bool))
