import numpy as np
import pytest

from causalmix.core import Variable
from causalmix.dataio import CaseRecord, Dataset, load_dataset, parse_dataset, save_dataset, write_dataset
from causalmix.errors import ParseError, SchemaError


def test_single_observed_case():
    d = parse_dataset("vars: X{F,T}\nT\n")
    assert len(d) == 1
    assert d.cases == [CaseRecord((1,), (False,))]


def test_manipulated_cell():
    d = parse_dataset("vars: X{F,T}, Y{F,T}\n!T,F\n")
    assert d.cases[0] == CaseRecord((1, 0), (True, False))


def test_table1_fixture(table1):
    assert len(table1) == 11
    assert table1.manipulation_counts() == {"X1": 2, "X2": 4}
    assert not table1.manipulated[:7, 1].any()
    assert table1.manipulated[7:, 1].all()


@pytest.mark.parametrize("text, message", [
    ("vars: X{F,T}\nMAYBE\n", "unknown state"),
    ("vars: X{F,T}, Y{F,T}\nT\n", "row has 1 cells"),
    ("vars: X{F,T}, X{F,T}\nT,T\n", "duplicate variable"),
    ("vars: X{F,T}, Y{F,T}\nT,\n", "missing value"),
    ("T,F\n", "header"),
    ("vars: X{!a,b}\n!a\n", "invalid state label"),
    ("vars: X{a b,c}\nc\n", "invalid state label"),
    ("vars: X{-a,b}\nb\n", "invalid state label"),
])
def test_parse_errors(text, message):
    with pytest.raises(ParseError, match=message):
        parse_dataset(text)


def test_comments_and_blank_lines():
    d = parse_dataset("# header next\nvars: X{F,T}\n\nT  # trailing\n!F\n")
    assert len(d) == 2
    assert d.manipulated[:, 0].tolist() == [False, True]


def test_round_trip_table1(table1, tmp_path):
    path = tmp_path / "t1.cmx"
    save_dataset(table1, path)
    assert load_dataset(path) == table1


def test_round_trip_header_only():
    empty = Dataset.empty((Variable("X", ("F", "T")),))
    again = parse_dataset(write_dataset(empty))
    assert again == empty
    assert len(again) == 0


def test_round_trip_three_four_state_variables():
    rng = np.random.default_rng(11)
    variables = tuple(Variable(n, ("ZERO", "LOW", "NORMAL", "HIGH")) for n in ("A", "B", "C"))
    d = Dataset(variables, rng.integers(4, size=(25, 3)), rng.random((25, 3)) < 0.3)
    assert parse_dataset(write_dataset(d)) == d


def test_project_concat_permute(table1):
    x2 = table1.project(["X2", "X1"])
    assert x2.names == ("X2", "X1")
    assert np.array_equal(x2.values[:, 0], table1.values[:, 1])
    doubled = table1.concat(table1)
    assert len(doubled) == 22
    reversed_ = table1.permuted(range(10, -1, -1))
    assert reversed_.cases[0] == table1.cases[-1]
    with pytest.raises(SchemaError):
        table1.concat(x2)


def test_out_of_range_values_rejected():
    with pytest.raises(KeyError):
        Dataset((Variable("X", ("F", "T")),), np.array([[2]]), np.array([[False]]))


@pytest.mark.parametrize("states", [("!a", "b"), ("a#1", "b"), ("a b", "c"), ("x,y", "z")])
def test_unwritable_state_labels_rejected(states):
    d = Dataset((Variable("X", states),), [[0]], [[False]])
    with pytest.raises(SchemaError, match="not a valid label"):
        write_dataset(d)
