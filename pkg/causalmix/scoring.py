"""
Manipulation-aware Bayesian scoring of causal structures.

A case contributes to the counts of node X_i only when X_i was passively
observed in it; the parents' states count however they came about. With
Dirichlet parameter priors the marginal likelihood P(D | S) then has the
usual closed form

    prod_i prod_j  G(a_ij) / G(a_ij + N_ij)  prod_k  G(a_ijk + N_ijk) / G(a_ijk)

evaluated here entirely in natural-log space.
"""

import logging
import math
from dataclasses import dataclass
from typing import Callable, Tuple

import numpy as np
from scipy.special import gammaln

from causalmix.core import CausalNetwork, NetworkStructure, parent_configurations
from causalmix.dataio import Dataset
from causalmix.errors import SchemaError, UsageError

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class DirichletPrior:
    """alpha[i] is a (q_i, r_i) array of positive hyperparameters."""
    alpha: Tuple[np.ndarray, ...]

    def __post_init__(self):
        alpha = tuple(np.array(a, dtype=float) for a in self.alpha)
        for a in alpha:
            if a.ndim != 2 or not np.all(a > 0.0):
                raise SchemaError("Dirichlet hyperparameters must be positive (q_i, r_i) arrays")
            a.setflags(write=False)
        object.__setattr__(self, "alpha", alpha)

    @property
    def alpha_ij(self) -> Tuple[np.ndarray, ...]:
        return tuple(a.sum(axis=1) for a in self.alpha)

    @property
    def shapes(self) -> Tuple[Tuple[int, int], ...]:
        return tuple(a.shape for a in self.alpha)


@dataclass(frozen=True, eq=False)
class SufficientStats:
    """counts[i] is the (q_i, r_i) array of N_ijk."""
    counts: Tuple[np.ndarray, ...]

    @property
    def totals(self) -> Tuple[np.ndarray, ...]:
        """N_ij per node."""
        return tuple(n.sum(axis=1) for n in self.counts)

    @property
    def shapes(self) -> Tuple[Tuple[int, int], ...]:
        return tuple(n.shape for n in self.counts)


@dataclass(frozen=True)
class StructureScore:
    log_marginal: float
    log_prior: float
    log_joint: float


PriorRule = Callable[[NetworkStructure], DirichletPrior]


def _dataset_columns(d: Dataset, s: NetworkStructure) -> np.ndarray:
    """Dataset column of each structure variable, checking that the schemas agree."""
    cols = []
    for variable in s.variables:
        if variable.name not in d.names:
            raise SchemaError(f"dataset has no column for '{variable.name}'")
        col = d.names.index(variable.name)
        if d.variables[col].states != variable.states:
            raise SchemaError(
                f"'{variable.name}' has states {d.variables[col].states} in the dataset "
                f"but {variable.states} in the structure"
            )
        cols.append(col)
    return np.array(cols, dtype=np.int64)


def tally_counts(d: Dataset, s: NetworkStructure) -> SufficientStats:
    """N_ijk over the cases in which X_i was not manipulated."""
    cols = _dataset_columns(d, s)
    values = d.values[:, cols]
    flags = d.manipulated[:, cols]
    counts = []
    for i, r in enumerate(s.cardinalities):
        q = s.parent_state_count(i)
        observed = ~flags[:, i]
        j = parent_configurations(s, i, values)[observed]
        cells = np.bincount(j * r + values[observed, i], minlength=q * r)
        counts.append(cells.reshape(q, r))
    return SufficientStats(tuple(counts))


def default_prior(s: NetworkStructure, ess: float = 1.0) -> DirichletPrior:
    """a_ijk = ess / (q_i r_i); ess = 1 gives the weak, likelihood-equivalent prior."""
    if ess <= 0:
        raise UsageError(f"equivalent sample size must be positive, got {ess}")
    alpha = []
    for i, r in enumerate(s.cardinalities):
        q = s.parent_state_count(i)
        alpha.append(np.full((q, r), ess / (q * r)))
    return DirichletPrior(tuple(alpha))


def k2_prior(s: NetworkStructure) -> DirichletPrior:
    """a_ijk = 1 for every cell."""
    return DirichletPrior(tuple(np.ones((s.parent_state_count(i), r)) for i, r in enumerate(s.cardinalities)))


def _check_shapes(stats: SufficientStats, prior: DirichletPrior) -> None:
    if stats.shapes != prior.shapes:
        raise SchemaError(f"count shapes {stats.shapes} do not match prior shapes {prior.shapes}")


def family_log_marginal(counts: np.ndarray, alpha: np.ndarray) -> float:
    """Log marginal likelihood contribution of one node."""
    alpha_ij = alpha.sum(axis=1)
    n_ij = counts.sum(axis=1)
    return float(np.sum(gammaln(alpha_ij) - gammaln(alpha_ij + n_ij))
                 + np.sum(gammaln(alpha + counts) - gammaln(alpha)))


def log_marginal_likelihood(stats: SufficientStats, prior: DirichletPrior) -> float:
    """ln P(D | S) from sufficient statistics and Dirichlet hyperparameters."""
    _check_shapes(stats, prior)
    return sum(family_log_marginal(n, a) for n, a in zip(stats.counts, prior.alpha))


def log_joint_score(structure_log_prior: float, log_marginal: float) -> StructureScore:
    """ln P(S, D) = ln P(S) + ln P(D | S)."""
    if math.isinf(structure_log_prior) and structure_log_prior < 0:
        raise UsageError("structures with zero prior probability are excluded from scoring")
    return StructureScore(
        log_marginal=log_marginal,
        log_prior=structure_log_prior,
        log_joint=structure_log_prior + log_marginal,
    )


def score_structure(d: Dataset, s: NetworkStructure, log_prior: float = 0.0,
                    prior_rule: PriorRule = default_prior) -> StructureScore:
    stats = tally_counts(d, s)
    score = log_joint_score(log_prior, log_marginal_likelihood(stats, prior_rule(s)))
    logger.debug("scored %s on %d cases: log joint %.6f", s.describe(), len(d), score.log_joint)
    return score


def posterior_params(stats: SufficientStats, prior: DirichletPrior, s: NetworkStructure) -> CausalNetwork:
    """Posterior-mean CPTs: (a_ijk + N_ijk) / (a_ij + N_ij)."""
    _check_shapes(stats, prior)
    expected = tuple((s.parent_state_count(i), r) for i, r in enumerate(s.cardinalities))
    if stats.shapes != expected:
        raise SchemaError(f"count shapes {stats.shapes} do not fit the structure {expected}")
    tables = []
    for n, a in zip(stats.counts, prior.alpha):
        posterior = a + n
        tables.append(posterior / posterior.sum(axis=1, keepdims=True))
    return CausalNetwork(s, tuple(tables), name="posterior")


def prequential_log_score(d: Dataset, s: NetworkStructure, prior: DirichletPrior) -> float:
    """
    Sum of one-step-ahead log predictive probabilities, case by case.

    Each non-manipulated X_i in case h is predicted from counts of the cases
    before h; manipulated cells contribute nothing. Equals
    log_marginal_likelihood for any case order.
    """
    cols = _dataset_columns(d, s)
    values = d.values[:, cols]
    flags = d.manipulated[:, cols]
    expected = tuple((s.parent_state_count(i), r) for i, r in enumerate(s.cardinalities))
    if prior.shapes != expected:
        raise SchemaError(f"prior shapes {prior.shapes} do not fit the structure {expected}")

    configs = [parent_configurations(s, i, values) for i in range(len(s))]
    counts = [np.zeros(shape) for shape in expected]
    total = 0.0
    for h in range(values.shape[0]):
        for i in range(len(s)):
            if flags[h, i]:
                continue
            j, k = configs[i][h], values[h, i]
            a, n = prior.alpha[i][j], counts[i][j]
            total += math.log((a[k] + n[k]) / (a.sum() + n.sum()))
            n[k] += 1
    return total
