"""
Reader and writer for `.cbn` causal network documents.

    # comment
    network alarm
    variable X1 { states: F, T }
    variable X2 { states: F, T }
    probability ( X1 ) { 0.5, 0.5; }
    probability ( X2 | X1 ) { [F]: 0.9, 0.1; [T]: 0.2, 0.8; }

Whitespace is insignificant. Rows of a probability block may come in any
order but every parent joint state needs exactly one row.
"""

import logging
import re
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import product
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

import numpy as np

from causalmix.config import ALARM_PATH
from causalmix.core import LABEL_PATTERN, CausalNetwork, NetworkStructure, Variable, ensure_valid
from causalmix.errors import NetworkError, ParseError

logger = logging.getLogger(__name__)

_TOKEN = re.compile(
    r"(?P<space>[ \t\r\f]+)"
    r"|(?P<newline>\n)"
    r"|(?P<comment>#[^\n]*)"
    r"|(?P<punct>[{}()\[\],;:|])"
    r"|(?P<word>[A-Za-z0-9_.+\-]+)"
    r"|(?P<bad>.)"
)


@dataclass
class Token:
    kind: str
    text: str
    line: int
    column: int


@dataclass
class ProbabilityBlock:
    child: str
    parents: Tuple[str, ...]
    rows: Dict[Tuple[str, ...], List[float]] = field(default_factory=dict)
    line: int = 0


@dataclass
class NetworkDocument:
    """Parsed but not yet assembled network text."""
    name: str
    variables: List[Variable] = field(default_factory=list)
    probabilities: Dict[str, ProbabilityBlock] = field(default_factory=dict)

    def to_network(self, validate: bool = True) -> CausalNetwork:
        """Assemble the network; every variable needs a complete probability block."""
        by_name = {v.name: v for v in self.variables}
        missing = [v.name for v in self.variables if v.name not in self.probabilities]
        if missing:
            raise ParseError(f"no probability block for: {', '.join(missing)}")

        structure = NetworkStructure.from_names(
            self.variables, {child: block.parents for child, block in self.probabilities.items()}
        )
        tables = []
        for variable in self.variables:
            block = self.probabilities[variable.name]
            parent_states = [by_name[p].states for p in block.parents]
            rows = []
            for combo in product(*parent_states):
                if combo not in block.rows:
                    absent = ", ".join(f"{p}={s}" for p, s in zip(block.parents, combo))
                    raise ParseError(
                        f"probability block for '{variable.name}' is missing the row [{absent}]",
                        block.line,
                    )
                rows.append(block.rows[combo])
            tables.append(np.array(rows, dtype=float))
        net = CausalNetwork(structure, tuple(tables), name=self.name)
        return ensure_valid(net) if validate else net


def _tokenize(text: str) -> List[Token]:
    tokens = []
    line, line_start = 1, 0
    for match in _TOKEN.finditer(text):
        kind = match.lastgroup
        column = match.start() - line_start + 1
        if kind == "newline":
            line += 1
            line_start = match.end()
        elif kind == "bad":
            raise ParseError(f"unexpected character {match.group()!r}", line, column)
        elif kind not in ("space", "comment"):
            tokens.append(Token(kind, match.group(), line, column))
    tokens.append(Token("eof", "", line, len(text) - line_start + 1))
    return tokens


class _DocumentParser:
    """Recursive-descent parser over the token list."""

    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.pos = 0
        self.document: Optional[NetworkDocument] = None

    def peek(self) -> Token:
        return self.tokens[self.pos]

    def advance(self) -> Token:
        token = self.tokens[self.pos]
        if token.kind != "eof":
            self.pos += 1
        return token

    def error(self, message: str, token: Optional[Token] = None) -> ParseError:
        token = token or self.peek()
        found = f"'{token.text}'" if token.kind != "eof" else "end of input"
        return ParseError(f"{message}, found {found}", token.line, token.column)

    def expect(self, text: str) -> Token:
        token = self.peek()
        if token.text != text or token.kind == "eof":
            raise self.error(f"expected '{text}'")
        return self.advance()

    def accept(self, text: str) -> bool:
        if self.peek().text == text and self.peek().kind != "eof":
            self.advance()
            return True
        return False

    def name(self, what: str) -> Token:
        token = self.peek()
        if token.kind != "word" or not LABEL_PATTERN.fullmatch(token.text):
            raise self.error(f"expected {what}")
        return self.advance()

    def number(self) -> float:
        token = self.peek()
        if token.kind != "word":
            raise self.error("expected a probability")
        try:
            value = float(token.text)
        except ValueError:
            raise self.error("expected a probability") from None
        self.advance()
        return value

    def parse(self) -> NetworkDocument:
        self.expect("network")
        self.document = NetworkDocument(name=self.name("network name").text)
        while self.peek().kind != "eof":
            keyword = self.peek()
            if keyword.text == "variable":
                self.variable_block()
            elif keyword.text == "probability":
                self.probability_block()
            else:
                raise self.error("expected 'variable' or 'probability'")
        return self.document

    def variable_block(self) -> None:
        self.expect("variable")
        name_token = self.name("variable name")
        if any(v.name == name_token.text for v in self.document.variables):
            raise ParseError(f"variable '{name_token.text}' declared twice", name_token.line, name_token.column)
        self.expect("{")
        self.expect("states")
        self.expect(":")
        states = [self.name("state label").text]
        while self.accept(","):
            if self.peek().text == "}":
                break
            states.append(self.name("state label").text)
        self.expect("}")
        try:
            self.document.variables.append(Variable(name_token.text, tuple(states)))
        except NetworkError as e:
            raise ParseError(str(e), name_token.line, name_token.column) from None

    def declared(self, token: Token) -> Variable:
        for variable in self.document.variables:
            if variable.name == token.text:
                return variable
        raise ParseError(f"undeclared variable '{token.text}'", token.line, token.column)

    def probability_block(self) -> None:
        start = self.expect("probability")
        self.expect("(")
        child_token = self.name("child variable")
        child = self.declared(child_token)
        if child.name in self.document.probabilities:
            raise ParseError(f"second probability block for '{child.name}'", start.line, start.column)
        parents: List[Variable] = []
        if self.accept("|"):
            parents.append(self.declared(self.name("parent variable")))
            while self.accept(","):
                parents.append(self.declared(self.name("parent variable")))
        self.expect(")")
        block = ProbabilityBlock(child.name, tuple(p.name for p in parents), line=start.line)

        self.expect("{")
        while not self.accept("}"):
            row_token = self.peek()
            combo: Tuple[str, ...] = ()
            if self.accept("["):
                labels = []
                if self.peek().text != "]":
                    labels.append(self.name("parent state"))
                    while self.accept(","):
                        labels.append(self.name("parent state"))
                self.expect("]")
                self.expect(":")
                if len(labels) != len(parents):
                    raise ParseError(
                        f"row for '{child.name}' names {len(labels)} parent states, expected {len(parents)}",
                        row_token.line, row_token.column,
                    )
                for parent, label in zip(parents, labels):
                    if label.text not in parent.states:
                        raise ParseError(f"'{label.text}' is not a state of '{parent.name}'", label.line, label.column)
                combo = tuple(label.text for label in labels)
            elif parents:
                raise self.error(f"expected '[' opening a parent state row of '{child.name}'")

            values = [self.number()]
            while self.accept(","):
                values.append(self.number())
            self.expect(";")
            if len(values) != child.cardinality:
                raise ParseError(
                    f"row for '{child.name}' has {len(values)} values, expected {child.cardinality}",
                    row_token.line, row_token.column,
                )
            if combo in block.rows:
                shown = ", ".join(f"{p.name}={s}" for p, s in zip(parents, combo)) or "no parents"
                raise ParseError(f"duplicate row [{shown}] for '{child.name}'", row_token.line, row_token.column)
            block.rows[combo] = values
        self.document.probabilities[child.name] = block


def parse_document(text: str) -> NetworkDocument:
    return _DocumentParser(text).parse()


def parse_network(text: str) -> CausalNetwork:
    """Parse `.cbn` text into a validated network."""
    net = parse_document(text).to_network()
    logger.debug("parsed network '%s': %d variables, %d arcs", net.name, len(net.structure), len(net.structure.arcs))
    return net


def _safe_name(name: str) -> str:
    cleaned = re.sub(r"[^A-Za-z0-9_.\-]", "_", name) or "network"
    return cleaned if LABEL_PATTERN.fullmatch(cleaned) else f"n{cleaned}"


def write_network(net: CausalNetwork) -> str:
    """Render a network as `.cbn` text; floats use their shortest exact repr."""
    structure = net.structure
    for variable in structure.variables:
        variable.require_writable()
    lines = [f"network {_safe_name(net.name)}", ""]
    for variable in structure.variables:
        lines.append(f"variable {variable.name} {{ states: {', '.join(variable.states)} }}")
    lines.append("")
    for i, variable in enumerate(structure.variables):
        parents = [structure.variables[p] for p in structure.parents[i]]
        head = variable.name
        if parents:
            head += " | " + ", ".join(p.name for p in parents)
        lines.append(f"probability ( {head} ) {{")
        combos = product(*[p.states for p in parents])
        for combo, row in zip(combos, net.cpts[i]):
            values = ", ".join(repr(float(v)) for v in row)
            prefix = f"[{', '.join(combo)}]: " if parents else ""
            lines.append(f"  {prefix}{values};")
        lines.append("}")
    return "\n".join(lines) + "\n"


def load_network(path: Union[str, Path]) -> CausalNetwork:
    return parse_network(Path(path).read_text(encoding="utf-8"))


def save_network(net: CausalNetwork, path: Union[str, Path]) -> None:
    Path(path).write_text(write_network(net), encoding="utf-8")


@lru_cache(maxsize=1)
def load_alarm() -> CausalNetwork:
    """The bundled 37-node ALARM network."""
    return load_network(ALARM_PATH)
