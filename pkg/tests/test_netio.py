import numpy as np
import pytest

from causalmix.config import FIXTURES_DIR
from causalmix.core import CausalNetwork, NetworkStructure, Variable
from causalmix.errors import NormalizationError, ParseError, SchemaError
from causalmix.netio import load_network, parse_document, parse_network, save_network, write_network

TWO_NODE = """
# two binary variables
network tiny
variable X1 { states: F, T }
variable X2 { states: F, T }
probability ( X1 ) { 0.5, 0.5; }
probability ( X2 | X1 ) {
  [T]: 0.2, 0.8;   # rows in any order
  [F]: 0.9, 0.1;
}
"""


def test_parse_two_node():
    net = parse_network(TWO_NODE)
    assert net.name == "tiny"
    assert net.names == ("X1", "X2")
    assert net.structure.parent_names("X2") == ("X1",)
    assert net.cpt("X2") == pytest.approx(np.array([[0.9, 0.1], [0.2, 0.8]]))


def test_alarm_size(alarm):
    assert len(alarm.structure) == 37
    assert len(alarm.structure.arcs) == 46
    assert alarm.structure.parent_names("CATECHOL") == ("ARTCO2", "INSUFFANESTH", "SAO2", "TPR")
    assert alarm.cpt("CATECHOL").shape == (54, 2)


def test_missing_row_names_child_and_combination():
    text = TWO_NODE.replace("[T]: 0.2, 0.8;", "")
    with pytest.raises(ParseError, match=r"'X2'.*\[X1=T\]"):
        parse_network(text)


def test_duplicate_row():
    text = TWO_NODE.replace("[T]: 0.2, 0.8;", "[F]: 0.2, 0.8;")
    with pytest.raises(ParseError, match="duplicate row"):
        parse_network(text)


def test_undeclared_variable_has_position():
    text = "network n\nvariable A { states: F, T }\nprobability ( B ) { 0.5, 0.5; }\n"
    with pytest.raises(ParseError) as info:
        parse_network(text)
    assert "undeclared variable 'B'" in str(info.value)
    assert (info.value.line, info.value.column) == (3, 15)


def test_syntax_error_position():
    with pytest.raises(ParseError) as info:
        parse_network("network n\nvariable A { states F, T }\n")
    assert info.value.line == 2


def test_wrong_value_count():
    with pytest.raises(ParseError, match="expected 2"):
        parse_network(TWO_NODE.replace("{ 0.5, 0.5; }", "{ 0.2, 0.3, 0.5; }"))


def test_row_sum_checked_on_load():
    with pytest.raises(NormalizationError):
        parse_network(TWO_NODE.replace("[F]: 0.9, 0.1;", "[F]: 0.9, 0.2;"))


def test_document_can_skip_validation():
    doc = parse_document(TWO_NODE.replace("[F]: 0.9, 0.1;", "[F]: 0.9, 0.2;"))
    net = doc.to_network(validate=False)
    assert net.cpt("X2")[0].sum() == pytest.approx(1.1)


def test_round_trip_alarm(alarm):
    again = parse_network(write_network(alarm))
    assert again.structurally_equal(alarm)
    assert again.name == "alarm"


def test_round_trip_four_state_variable(tmp_path):
    a = Variable("A", ("ZERO", "LOW", "NORMAL", "HIGH"))
    b = Variable("B", ("no", "yes"))
    structure = NetworkStructure.from_names((a, b), {"B": ["A"]})
    rng = np.random.default_rng(3)
    net = CausalNetwork(structure, (rng.dirichlet(np.ones(4), size=1), rng.dirichlet(np.ones(2), size=4)),
                        name="four")
    path = tmp_path / "four.cbn"
    save_network(net, path)
    assert load_network(path).structurally_equal(net, tol=1e-12)


def test_fixtures_load():
    for name in ("chain.cbn", "two_node.cbn", "single.cbn"):
        assert load_network(FIXTURES_DIR / name).structure


def test_unwritable_state_label_rejected():
    x = Variable("X", ("!on", "off"))
    net = CausalNetwork(NetworkStructure.from_names((x,)), (np.array([[0.5, 0.5]]),), name="bad")
    with pytest.raises(SchemaError, match="not a valid label"):
        write_network(net)


def test_state_label_must_be_a_name():
    with pytest.raises(ParseError, match="state label"):
        parse_network("network n\nvariable X { states: -a, b }\nprobability ( X ) { 0.5, 0.5; }\n")
