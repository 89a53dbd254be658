import os
import sys

import numpy as np
import pytest

# Add parent directory to path
sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from causalmix.config import FIXTURES_DIR
from causalmix.core import CausalNetwork, NetworkStructure, Variable
from causalmix.dataio import Dataset, load_dataset
from causalmix.netio import load_alarm, load_network


@pytest.fixture(scope="session")
def alarm():
    return load_alarm()


@pytest.fixture(scope="session")
def table1():
    return load_dataset(FIXTURES_DIR / "table1.cmx")


@pytest.fixture(scope="session")
def chain():
    return load_network(FIXTURES_DIR / "chain.cbn")


@pytest.fixture(scope="session")
def two_node():
    return load_network(FIXTURES_DIR / "two_node.cbn")


@pytest.fixture
def make_network():
    """Random DAG over n variables: parents drawn from earlier nodes only."""

    def build(rng, n, max_states=2, max_parents=2, density=0.5):
        variables = tuple(
            Variable(f"V{i}", tuple(f"s{k}" for k in range(int(rng.integers(2, max_states + 1)))))
            for i in range(n)
        )
        parents = []
        for i in range(n):
            chosen = [p for p in range(i) if rng.random() < density]
            parents.append(tuple(chosen[:max_parents]))
        structure = NetworkStructure(variables, tuple(parents))
        cpts = tuple(
            rng.dirichlet(np.full(r, 2.0), size=structure.parent_state_count(i))
            for i, r in enumerate(structure.cardinalities)
        )
        return CausalNetwork(structure, cpts, name="random")

    return build


@pytest.fixture
def make_dataset():
    """Random complete dataset with roughly `rate` of cells flagged manipulated."""

    def build(rng, variables, cases, rate=0.2):
        values = np.column_stack([rng.integers(v.cardinality, size=cases) for v in variables])
        flags = rng.random((cases, len(variables))) < rate
        return Dataset(tuple(variables), values.reshape(cases, len(variables)), flags)

    return build
