import numpy as np
import pytest
from scipy.stats import chisquare

from causalmix.core import CausalNetwork, NetworkStructure, Variable
from causalmix.errors import UnknownStateError, UnknownVariableError, UsageError
from causalmix.inference import Evidence, EvidenceMode, Query, query
from causalmix.sampler import (
    MixSpec,
    case_stream,
    case_uniforms,
    draw_block,
    draw_case,
    draw_manipulated_case,
    forward_block,
    generate_intent_mix,
    generate_mix,
)

F_T = ("F", "T")


def root_network(probabilities, name="R"):
    states = tuple(f"s{k}" for k in range(len(probabilities)))
    structure = NetworkStructure.from_names((Variable(name, states),))
    return CausalNetwork(structure, (np.array([probabilities]),), name="root")


def empirical_joint(block):
    flat = np.ravel_multi_index(tuple(block.values.T), tuple(v.cardinality for v in block.variables))
    return np.bincount(flat, minlength=int(np.prod([v.cardinality for v in block.variables])))


def expected_joint(net, manipulated):
    """Joint of all variables when `manipulated` is set to a uniformly chosen state."""
    targets = net.names
    if manipulated is None:
        return query(net, Query(targets)).vector
    r = net.structure.variable(manipulated).cardinality
    return sum(query(net, Query(targets, (Evidence(manipulated, k, EvidenceMode.MANIPULATED),))).vector
               for k in range(r)) / r


class TestDrawCase:
    def test_deterministic_network(self):
        a, b = Variable("A", F_T), Variable("B", F_T)
        structure = NetworkStructure.from_names((a, b), {"B": ["A"]})
        net = CausalNetwork(structure, (np.array([[0.0, 1.0]]), np.array([[0.0, 1.0], [1.0, 0.0]])))
        rng = np.random.default_rng(0)
        for _ in range(20):
            case = draw_case(net, {}, rng)
            assert case.values == (1, 0)
            assert case.is_observational

    def test_manipulated_cell_flagged(self, chain):
        case = draw_case(chain, {"B": "T"}, np.random.default_rng(1))
        assert case.values[1] == 1
        assert case.manipulated == (False, True, False)

    def test_unknown_names(self, chain):
        rng = np.random.default_rng(0)
        with pytest.raises(UnknownVariableError):
            draw_case(chain, {"Z": "T"}, rng)
        with pytest.raises(UnknownStateError):
            draw_case(chain, {"A": "MAYBE"}, rng)

    def test_root_frequency(self):
        net = root_network([0.3, 0.7])
        block = draw_block(net, 10_000, np.random.default_rng(2))
        assert block.values[:, 0].mean() == pytest.approx(0.7, abs=0.02)

    def test_single_draw_has_one_manipulated_cell(self, chain):
        case = draw_manipulated_case(chain, "C", np.random.default_rng(3))
        assert sum(case.manipulated) == 1
        assert case.manipulated[2]


class TestManipulationChoice:
    @pytest.mark.parametrize("states", [2, 4])
    def test_uniform_over_states(self, states):
        net = root_network([0.9] + [0.1 / (states - 1)] * (states - 1))
        rng = np.random.default_rng(4)
        draws = [draw_manipulated_case(net, "R", rng).values[0] for _ in range(10_000)]
        shares = np.bincount(draws, minlength=states) / 10_000
        assert shares == pytest.approx(np.full(states, 1 / states), abs=0.02)


class TestEmpiricalJoint:
    def test_goodness_of_fit(self, make_network):
        rng = np.random.default_rng(5)
        for _ in range(8):
            net = make_network(rng, int(rng.integers(2, 5)), max_parents=3)
            for manipulated in (None, str(rng.choice(net.names))):
                block = draw_block(net, 10_000, rng, manipulated=[manipulated] if manipulated else [])
                observed = empirical_joint(block)
                expected = expected_joint(net, manipulated)
                support = expected > 0
                assert observed[~support].sum() == 0
                f_exp = expected[support] / expected[support].sum() * observed.sum()
                assert chisquare(observed[support], f_exp).pvalue > 0.001

    def test_flags_follow_manipulation_set(self, chain):
        block = draw_block(chain, 50, np.random.default_rng(6), manipulated=["A", "C"])
        assert block.manipulated[:, [0, 2]].all()
        assert not block.manipulated[:, 1].any()

    def test_keep_projects_columns(self, chain):
        block = draw_block(chain, 10, np.random.default_rng(7), manipulated=["A"], keep=["C", "A"])
        assert block.names == ("C", "A")
        assert block.manipulated[:, 1].all()


class TestGenerateMix:
    def test_composition(self, chain):
        data = generate_mix(chain, MixSpec("A", "C", m=4, n=3, seed=9))
        assert data.names == ("A", "C")
        assert len(data) == 7
        assert data.manipulated.tolist() == [
            [True, False], [True, False],
            [False, True], [False, True],
            [False, False], [False, False], [False, False],
        ]

    def test_empty(self, chain):
        data = generate_mix(chain, MixSpec("A", "B", 0, 0))
        assert len(data) == 0
        assert data.names == ("A", "B")

    def test_deterministic(self, alarm):
        spec = MixSpec("HYPOVOLEMIA", "BP", 40, 40, seed=123)
        assert generate_mix(alarm, spec) == generate_mix(alarm, spec)
        assert generate_mix(alarm, spec) != generate_mix(alarm, MixSpec("HYPOVOLEMIA", "BP", 40, 40, seed=124))

    def test_blocks_are_independent_of_sizes(self, chain):
        small = generate_mix(chain, MixSpec("A", "C", 2, 5, seed=3))
        large = generate_mix(chain, MixSpec("A", "C", 2, 50, seed=3))
        assert np.array_equal(small.values[:2], large.values[:2])

    def test_growing_n_keeps_earlier_cases(self, alarm):
        small = generate_mix(alarm, MixSpec("HYPOVOLEMIA", "BP", 6, 10, seed=8))
        large = generate_mix(alarm, MixSpec("HYPOVOLEMIA", "BP", 6, 40, seed=8))
        assert small == large.permuted(range(16))

    def test_each_case_is_addressable(self, alarm):
        spec = MixSpec("HYPOVOLEMIA", "BP", 6, 4, seed=21)
        data = generate_mix(alarm, spec)
        width = len(alarm.structure)
        for k in range(len(data)):
            target = "HYPOVOLEMIA" if k < 3 else "BP" if k < 6 else None
            alone = forward_block(alarm, case_uniforms(spec.seed, k, 1, width),
                                  manipulated=[target] if target else [], keep=["HYPOVOLEMIA", "BP"])
            assert alone.values[0].tolist() == data.values[k].tolist()
            assert alone.manipulated[0].tolist() == data.manipulated[k].tolist()

    @pytest.mark.parametrize("m, n, x", [(3, 0, "C"), (-2, 0, "C"), (2, -1, "C"), (2, 2, "A")])
    def test_bad_specs(self, m, n, x):
        with pytest.raises(UsageError):
            MixSpec("A", x, m, n)

    def test_unknown_variable(self, chain):
        with pytest.raises(UnknownVariableError):
            generate_mix(chain, MixSpec("A", "Q", 2, 2))


class TestIntentMix:
    def test_columns_and_full_compliance(self, chain):
        data = generate_intent_mix(chain, MixSpec("A", "C", m=200, n=20, seed=4), compliance=1.0)
        assert data.names == ("A", "C", "M_A", "M_C")
        assert data.variable("M_A").states == ("0", "1", "2")
        assert not data.manipulated.any()
        values = data.values
        x_block, y_block, passive = values[:100], values[100:200], values[200:]
        assert np.array_equal(x_block[:, 0], x_block[:, 2] - 1)
        assert (x_block[:, 3] == 0).all()
        assert np.array_equal(y_block[:, 1], y_block[:, 3] - 1)
        assert (passive[:, 2:] == 0).all()

    def test_growing_n_keeps_earlier_cases(self, chain):
        small = generate_intent_mix(chain, MixSpec("A", "C", 4, 3, seed=2), compliance=0.5)
        large = generate_intent_mix(chain, MixSpec("A", "C", 4, 30, seed=2), compliance=0.5)
        assert np.array_equal(small.values, large.values[:7])

    def test_compliance_range(self, chain):
        with pytest.raises(UsageError):
            generate_intent_mix(chain, MixSpec("A", "C", 2, 2), compliance=1.5)


def test_case_stream_is_reproducible():
    a = case_stream(42, 1, 2).random(5)
    b = case_stream(42, 1, 2).random(5)
    c = case_stream(42, 2, 1).random(5)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)


def test_case_uniforms_rows_follow_case_streams():
    block = case_uniforms(42, 5, 3, 4)
    assert block.shape == (3, 4)
    for k in range(3):
        assert np.array_equal(block[k], case_stream(42, 5 + k).random(4))
    assert case_uniforms(42, 0, 0, 4).shape == (0, 4)


def test_forward_block_needs_one_uniform_per_variable(chain):
    with pytest.raises(UsageError):
        forward_block(chain, np.zeros((2, 2)))
