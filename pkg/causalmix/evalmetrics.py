"""
Error metrics of a learned pairwise model against a gold-standard network.

    serr   1 - P(H_true | D)
    operr  expected |P_gold(Y | X=x) - P_learned(Y | X=x)|, x weighted by P_gold(X)
    mperr  the same under manipulation of X, x weighted uniformly

Gold-side probabilities come from exact inference on the gold network.
"""

import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Sequence, Tuple

import numpy as np

from causalmix.core import CausalNetwork
from causalmix.dataio import Dataset
from causalmix.discovery import HypothesisPosterior, HypothesisSet, ModelAverager
from causalmix.errors import UsageError, ZeroProbabilityError
from causalmix.inference import Distribution, Evidence, EvidenceMode, Query, marginal, query
from causalmix.scoring import PriorRule, default_prior

logger = logging.getLogger(__name__)

# predict(target, given) -> distribution over target
PredictFn = Callable[[str, Evidence], Distribution]


@dataclass(frozen=True)
class PairEvaluation:
    x: str
    y: str
    h_true: str
    serr: float
    operr: float
    mperr: float

    @property
    def pair(self) -> Tuple[str, str]:
        return self.x, self.y


def serr(posterior: HypothesisPosterior, h_true: str) -> float:
    return 1.0 - posterior.posterior_of(h_true)


@lru_cache(maxsize=4096)
def gold_conditionals(gold: CausalNetwork, x: str, y: str,
                      mode: EvidenceMode) -> Tuple[np.ndarray, np.ndarray]:
    """
    (weights over x states, table of P_gold(Y | x) rows).

    Under observation the weights are P_gold(X); rows for states of zero
    probability are left as NaN with weight 0. Under manipulation the
    weights are uniform and every row is defined.
    """
    if x == y:
        raise UsageError("metrics need two different variables")
    rx = gold.structure.variable(x).cardinality
    ry = gold.structure.variable(y).cardinality
    table = np.full((rx, ry), np.nan)
    if mode is EvidenceMode.OBSERVED:
        weights = marginal(gold, x).vector.copy()
    else:
        weights = np.full(rx, 1.0 / rx)
    for k in range(rx):
        if weights[k] == 0.0:
            continue
        try:
            table[k] = query(gold, Query((y,), (Evidence(x, k, mode),))).vector
        except ZeroProbabilityError:
            weights[k] = 0.0
    weights.setflags(write=False)
    table.setflags(write=False)
    return weights, table


def _expected_error(gold: CausalNetwork, predict: PredictFn, x: str, y: str, mode: EvidenceMode) -> float:
    weights, table = gold_conditionals(gold, x, y, mode)
    total = 0.0
    for k, w in enumerate(weights):
        if w == 0.0:
            continue
        predicted = predict(y, Evidence(x, k, mode)).vector
        total += w * float(np.mean(np.abs(table[k] - predicted)))
    return total


def operr(gold: CausalNetwork, predict: PredictFn, x: str, y: str) -> float:
    return _expected_error(gold, predict, x, y, EvidenceMode.OBSERVED)


def mperr(gold: CausalNetwork, predict: PredictFn, x: str, y: str) -> float:
    return _expected_error(gold, predict, x, y, EvidenceMode.MANIPULATED)


def aggregate(values: Sequence[float]) -> float:
    """Mean of per-pair errors."""
    if len(values) == 0:
        raise UsageError("cannot aggregate an empty list of errors")
    return float(np.mean(values))


def evaluate_pair(gold: CausalNetwork, data: Dataset, x: str, y: str, h_true: str,
                  prior_rule: PriorRule = default_prior) -> PairEvaluation:
    """All three metrics for one pair and one dataset over (x, y)."""
    hyp = HypothesisSet.pairwise(gold.structure.variable(x), gold.structure.variable(y))
    averager = ModelAverager(data, hyp, prior_rule)
    evaluation = PairEvaluation(
        x=x,
        y=y,
        h_true=h_true,
        serr=serr(averager.posterior, h_true),
        operr=operr(gold, averager.predict, x, y),
        mperr=mperr(gold, averager.predict, x, y),
    )
    logger.debug("%s/%s on %d cases: serr=%.4f operr=%.4f mperr=%.4f",
                 x, y, len(data), evaluation.serr, evaluation.operr, evaluation.mperr)
    return evaluation
