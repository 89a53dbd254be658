"""
causalmix - learning causal structure from a mix of experimental and
observational data with causal Bayesian networks.
"""

from causalmix.core import CausalNetwork, NetworkStructure, Variable, classify_pair, surgery
from causalmix.dataio import Dataset, load_dataset
from causalmix.discovery import HypothesisSet, ModelAverager, structure_posterior
from causalmix.errors import CausalMixError
from causalmix.inference import Evidence, EvidenceMode, Query, query
from causalmix.netio import load_alarm, load_network
from causalmix.scoring import default_prior, log_marginal_likelihood, tally_counts

__version__ = "0.1.0"

__all__ = [
    "CausalMixError",
    "CausalNetwork",
    "Dataset",
    "Evidence",
    "EvidenceMode",
    "HypothesisSet",
    "ModelAverager",
    "NetworkStructure",
    "Query",
    "Variable",
    "classify_pair",
    "default_prior",
    "load_alarm",
    "load_dataset",
    "load_network",
    "log_marginal_likelihood",
    "query",
    "structure_posterior",
    "surgery",
    "tally_counts",
]
