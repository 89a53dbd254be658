import math

import numpy as np
import pytest
from scipy.special import logsumexp

from causalmix.core import NetworkStructure, Variable, topological_order
from causalmix.dataio import Dataset
from causalmix.discovery import (
    H1,
    H2,
    H3,
    HypothesisSet,
    ModelAverager,
    arc_probability,
    augment_intent,
    averaged_predict,
    causal_probability,
    encode_intents,
    enumerate_dags,
    structure_posterior,
)
from causalmix.errors import SchemaError, UsageError
from causalmix.inference import Evidence, EvidenceMode
from causalmix.sampler import MixSpec, generate_mix
from causalmix.scoring import score_structure

F_T = ("F", "T")
DO = EvidenceMode.MANIPULATED


def binary(*names):
    return tuple(Variable(name, F_T) for name in names)


@pytest.fixture
def xy_pair(two_node):
    return two_node.structure.variable("X"), two_node.structure.variable("Y")


@pytest.fixture
def experimental_xy(two_node):
    return generate_mix(two_node, MixSpec("X", "Y", m=500, n=0, seed=17))


class TestEnumerateDags:
    @pytest.mark.parametrize("n, count", [(1, 1), (2, 3), (3, 25), (4, 543)])
    def test_counts(self, n, count):
        dags = enumerate_dags(binary(*"ABCD"[:n]))
        assert len(dags) == count
        assert len({frozenset(s.arcs) for s in dags}) == count
        for s in dags:
            topological_order(s)

    def test_five_variables(self):
        assert len(enumerate_dags(binary(*"ABCDE"))) == 29281

    def test_ordered_by_arc_count(self):
        arcs = [len(s.arcs) for s in enumerate_dags(binary("A", "B", "C"))]
        assert arcs == sorted(arcs)
        assert arcs[0] == 0 and arcs[-1] == 3

    def test_limits(self):
        with pytest.raises(UsageError):
            enumerate_dags(())
        with pytest.raises(UsageError):
            enumerate_dags(binary(*"ABCDEF"))


class TestHypothesisSet:
    def test_pairwise_family(self, xy_pair):
        hyp = HypothesisSet.pairwise(*xy_pair)
        assert hyp.labels == (H1, H2, H3)
        assert hyp.structures[0].has_arc("X", "Y")
        assert hyp.structures[1].has_arc("Y", "X")
        assert hyp.structures[2].arcs == ()
        assert logsumexp(hyp.log_priors) == pytest.approx(0.0, abs=1e-12)

    def test_all_dags_uniform(self):
        hyp = HypothesisSet.all_dags(binary("A", "B", "C"))
        assert len(hyp) == 25
        assert hyp.log_priors[0] == pytest.approx(-math.log(25))

    def test_rejects_bad_families(self, xy_pair):
        s = HypothesisSet.pairwise(*xy_pair).structures
        with pytest.raises(UsageError):
            HypothesisSet((), ())
        with pytest.raises(UsageError):
            HypothesisSet((s[0], s[0]), (math.log(0.5),) * 2)
        with pytest.raises(UsageError):
            HypothesisSet((s[0], s[1]), (0.0, -math.inf))
        with pytest.raises(UsageError):
            HypothesisSet((s[0], s[1]), (math.log(0.6), math.log(0.6)))
        with pytest.raises(UsageError):
            HypothesisSet((s[0], s[1]), (math.log(0.5),) * 2, ("A", "A"))
        other = NetworkStructure.from_names(binary("P", "Q"))
        with pytest.raises(SchemaError):
            HypothesisSet((s[0], other), (math.log(0.5),) * 2)

    def test_priors_may_sum_below_one(self, xy_pair):
        hyp = HypothesisSet.pairwise(*xy_pair, log_priors=(math.log(0.1),) * 3)
        assert hyp.index(H3) == 2
        with pytest.raises(UsageError):
            hyp.index("H4")


class TestStructurePosterior:
    def test_empty_data_is_uniform(self, xy_pair):
        d = Dataset.empty(xy_pair)
        posterior = structure_posterior(d, HypothesisSet.pairwise(*xy_pair))
        assert posterior.posteriors == pytest.approx([1 / 3] * 3, abs=1e-12)

    def test_observational_data_cannot_orient(self, two_node):
        d = generate_mix(two_node, MixSpec("X", "Y", m=0, n=300, seed=5))
        hyp = HypothesisSet.pairwise(two_node.structure.variable("X"), two_node.structure.variable("Y"))
        posterior = structure_posterior(d, hyp)
        assert posterior.posterior_of(H1) == pytest.approx(posterior.posterior_of(H2), abs=1e-9)
        assert posterior.posterior_of(H3) < 0.01

    def test_large_observational_sample_splits_between_directions(self, xy_pair, two_node):
        d = generate_mix(two_node, MixSpec("X", "Y", m=0, n=50_000, seed=8))
        posterior = structure_posterior(d, HypothesisSet.pairwise(*xy_pair))
        assert 1.0 - posterior.posterior_of(H1) == pytest.approx(0.5, abs=0.02)

    def test_experiments_identify_direction(self, xy_pair, experimental_xy):
        posterior = structure_posterior(experimental_xy, HypothesisSet.pairwise(*xy_pair))
        assert posterior.posterior_of(H1) > 0.95
        assert posterior.best() == H1
        assert posterior.posteriors.sum() == pytest.approx(1.0, abs=1e-9)

    def test_relabelling_swaps_h1_and_h2(self, xy_pair, experimental_xy):
        x, y = xy_pair
        forward = structure_posterior(experimental_xy, HypothesisSet.pairwise(x, y))
        swapped = structure_posterior(experimental_xy.project(["Y", "X"]), HypothesisSet.pairwise(y, x))
        assert swapped.posterior_of(H1) == pytest.approx(forward.posterior_of(H2), abs=1e-12)
        assert swapped.posterior_of(H2) == pytest.approx(forward.posterior_of(H1), abs=1e-12)

    def test_constant_prior_shift(self, xy_pair, table1):
        d = table1_as_xy(table1, xy_pair)
        base = structure_posterior(d, HypothesisSet.pairwise(*xy_pair))
        shifted = structure_posterior(d, HypothesisSet.pairwise(*xy_pair, log_priors=(math.log(0.1),) * 3))
        assert shifted.posteriors == pytest.approx(base.posteriors, abs=1e-12)

    def test_schema_mismatch(self, xy_pair):
        d = Dataset.empty(binary("P", "Q"))
        with pytest.raises(SchemaError):
            structure_posterior(d, HypothesisSet.pairwise(*xy_pair))


def table1_as_xy(table1, xy_pair):
    """Table-1 cases relabelled onto the (X, Y) pair."""
    return Dataset(xy_pair, table1.values, table1.manipulated)


class TestFeatures:
    def test_pairwise_arc_on_empty_data(self, xy_pair):
        d = Dataset.empty(xy_pair)
        assert arc_probability(d, HypothesisSet.pairwise(*xy_pair), "X", "Y") == pytest.approx(1 / 3)

    def test_independent_pair_puts_little_mass_on_arcs(self):
        x, y = binary("X", "Y")
        values = np.tile([[0, 0], [0, 1], [1, 0], [1, 1]], (500, 1))
        flags = np.zeros_like(values, dtype=bool)
        flags[:500, 0] = True
        flags[500:1000, 1] = True
        d = Dataset((x, y), values, flags)
        assert arc_probability(d, HypothesisSet.pairwise(x, y), "X", "Y") < 0.05

    def test_arc_probability_matches_direct_sum(self, make_dataset):
        variables = (Variable("A", F_T), Variable("B", ("lo", "mid", "hi")), Variable("C", F_T))
        hyp = HypothesisSet.all_dags(variables)
        rng = np.random.default_rng(21)
        d = make_dataset(rng, variables, 40, rate=0.3)
        log_joint = np.array([score_structure(d, s, lp).log_joint for s, lp in zip(hyp.structures, hyp.log_priors)])
        weights = np.exp(log_joint - logsumexp(log_joint))
        with_arc = [w for s, w in zip(hyp.structures, weights) if s.has_arc("A", "B")]
        assert len(with_arc) == 8
        assert arc_probability(d, hyp, "A", "B") == pytest.approx(sum(with_arc), abs=1e-12)

    def test_causal_probability_covers_direct_arcs(self, make_dataset):
        variables = binary("A", "B", "C")
        hyp = HypothesisSet.all_dags(variables)
        d = make_dataset(np.random.default_rng(4), variables, 30)
        posterior = structure_posterior(d, hyp)
        assert causal_probability(posterior, "A", "C") >= arc_probability(d, hyp, "A", "C") - 1e-12


class TestModelAveraging:
    def test_empty_data_predicts_uniform(self, xy_pair):
        d = Dataset.empty(xy_pair)
        for mode in EvidenceMode:
            result = averaged_predict(d, HypothesisSet.pairwise(*xy_pair), "Y", Evidence("X", "T", mode))
            assert result.vector == pytest.approx([0.5, 0.5])

    def test_convex_combination(self, xy_pair, two_node):
        d = generate_mix(two_node, MixSpec("X", "Y", m=10, n=10, seed=2))
        averager = ModelAverager(d, HypothesisSet.pairwise(*xy_pair))
        for given in (Evidence("X", "F"), Evidence("X", "T", DO)):
            per = np.array([p.vector for p in averager.per_structure("Y", given)])
            mixed = averager.predict("Y", given).vector
            assert mixed.sum() == pytest.approx(1.0, abs=1e-9)
            assert np.all(mixed >= per.min(axis=0) - 1e-12)
            assert np.all(mixed <= per.max(axis=0) + 1e-12)

    def test_no_arc_structure_predicts_marginal(self, xy_pair, table1):
        d = table1_as_xy(table1, xy_pair)
        only_h3 = HypothesisSet((HypothesisSet.pairwise(*xy_pair).structures[2],), (0.0,), (H3,))
        # Y observed in 7 cases, 4 of them T; a_jk = 1/2
        expected = [(3 + 0.5) / 8, (4 + 0.5) / 8]
        for mode in EvidenceMode:
            assert averaged_predict(d, only_h3, "Y", Evidence("X", "F", mode)).vector == pytest.approx(expected)

    def test_manipulated_effect_predicts_marginal(self, xy_pair, table1):
        d = table1_as_xy(table1, xy_pair)
        averager = ModelAverager(d, HypothesisSet.pairwise(*xy_pair))
        # under Y -> X, do(X) cuts the only arc and leaves Y at its own marginal
        under_h2 = averager.per_structure("Y", Evidence("X", "T", DO))[1]
        assert under_h2.vector == pytest.approx(averager.networks[1].cpt("Y")[0])

    def test_target_must_differ_from_given(self, xy_pair):
        averager = ModelAverager(Dataset.empty(xy_pair), HypothesisSet.pairwise(*xy_pair))
        with pytest.raises(UsageError):
            averager.predict("X", Evidence("X", "T"))


class TestIntents:
    def test_augment_adds_intent_parent(self, xy_pair):
        s = NetworkStructure.from_names(xy_pair, {"Y": ["X"]})
        augmented = augment_intent(s, "Y")
        assert augmented.variable("M_Y").states == ("0", "1", "2")
        assert augmented.parent_names("Y") == ("X", "M_Y")
        assert augmented.parent_names("X") == ()
        with pytest.raises(UsageError):
            augment_intent(augmented, "Y")

    def test_encode_intents(self, xy_pair, table1):
        d = table1_as_xy(table1, xy_pair)
        encoded = encode_intents(d, ["X", "Y"])
        assert encoded.names == ("X", "Y", "M_X", "M_Y")
        assert not encoded.manipulated.any()
        assert encoded.values[0].tolist() == [1, 1, 2, 0]
        assert encoded.values[3].tolist() == [0, 0, 1, 0]
        assert encoded.values[10].tolist() == [0, 0, 0, 1]

    def test_encode_rejects_other_manipulations(self, xy_pair, table1):
        with pytest.raises(SchemaError):
            encode_intents(table1_as_xy(table1, xy_pair), ["X"])

    def test_augmented_family_agrees_with_deterministic(self, xy_pair, two_node):
        d = generate_mix(two_node, MixSpec("X", "Y", m=400, n=100, seed=31))
        hyp = HypothesisSet.pairwise(*xy_pair)
        deterministic = structure_posterior(d, hyp)
        with_intents = structure_posterior(encode_intents(d, ["X", "Y"]), hyp.augmented(["X", "Y"]))
        assert with_intents.posteriors == pytest.approx(deterministic.posteriors, abs=0.05)
