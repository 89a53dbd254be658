"""
Seeded forward (logic) sampling from a causal network, with optional
manipulation of chosen variables, and the generators of mixed
experimental/observational datasets for a node pair.
"""

import logging
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from causalmix.core import (
    Assignments,
    CausalNetwork,
    ancestors,
    intent_variable,
    parent_configurations,
    resolve_assignments,
    surgery,
    topological_order,
)
from causalmix.dataio import CaseRecord, Dataset
from causalmix.errors import UsageError

logger = logging.getLogger(__name__)

SEED_MASK = (1 << 64) - 1


@dataclass(frozen=True)
class MixSpec:
    """m/2 cases with x manipulated, m/2 with y manipulated, n with both observed."""
    x: str
    y: str
    m: int
    n: int
    seed: int = 0

    def __post_init__(self):
        if self.x == self.y:
            raise UsageError("x and y must be different variables")
        if self.m < 0 or self.m % 2:
            raise UsageError(f"m must be even and non-negative, got {self.m}")
        if self.n < 0:
            raise UsageError(f"n must be non-negative, got {self.n}")


def case_stream(seed: int, *index: int) -> np.random.Generator:
    """Independent generator for (seed, index...), derived by SeedSequence hashing."""
    return np.random.default_rng(np.random.SeedSequence([seed & SEED_MASK, *index]))



def case_uniforms(seed: int, first: int, count: int, width: int) -> np.ndarray:
    """
    A (count, width) array whose row k comes from case_stream(seed, first + k).

    Every case owns its stream, so a case's values depend only on the seed
    and its index, never on how the cases are split into blocks or workers.
    """
    rows = [case_stream(seed, first + k).random(width) for k in range(count)]
    return np.array(rows, dtype=float).reshape(count, width)


def _pick_states(rows: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Inverse-CDF categorical draw per row of a (count, r) probability array, u in [0, 1)."""
    cumulative = np.cumsum(rows, axis=1)
    states = ((u * cumulative[:, -1])[:, None] >= cumulative).sum(axis=1)
    return np.minimum(states, rows.shape[1] - 1)


def _draw_states(rows: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    return _pick_states(rows, rng.random(rows.shape[0]))


def draw_case(net: CausalNetwork, manipulations: Assignments, rng: np.random.Generator) -> CaseRecord:
    """Ancestral sampling on the surgically modified network."""
    settings = resolve_assignments(net.structure, manipulations)
    cut = surgery(net, manipulations)
    structure = cut.structure
    values = np.zeros((1, len(structure)), dtype=np.int64)
    for name in topological_order(structure):
        i = structure.index_of(name)
        j = parent_configurations(structure, i, values)
        values[0, i] = _draw_states(cut.cpts[i][j], rng)[0]
    flags = tuple(i in settings for i in range(len(structure)))
    return CaseRecord(tuple(values[0]), flags)


def draw_manipulated_case(net: CausalNetwork, target: str, rng: np.random.Generator) -> CaseRecord:
    """Manipulate target to a uniformly drawn state, then draw_case."""
    variable = net.structure.variable(target)
    state = int(rng.integers(variable.cardinality))
    return draw_case(net, {target: state}, rng)


def forward_block(net: CausalNetwork, uniforms: np.ndarray, manipulated: Sequence[str] = (),
                  keep: Optional[Sequence[str]] = None) -> Dataset:
    """
    Ancestral sampling driven by a (count, variables) array of uniforms.

    Column i feeds node i. A manipulated node is set to state floor(u r)
    from its own column, so its state is uniform over its r states.
    """
    structure = net.structure
    count = uniforms.shape[0]
    if uniforms.shape[1:] != (len(structure),):
        raise UsageError(f"need one uniform per variable ({len(structure)}), got shape {uniforms.shape}")
    targets = list(dict.fromkeys(manipulated))
    states = {}
    for name in targets:
        i = structure.index_of(name)
        r = structure.variables[i].cardinality
        states[name] = np.minimum((uniforms[:, i] * r).astype(np.int64), r - 1)
    cut = surgery(net, {name: 0 for name in targets})
    cut_structure = cut.structure

    wanted = set(keep if keep is not None else structure.names)
    needed = set(wanted)
    for name in wanted:
        needed |= ancestors(cut_structure, name)

    values = np.zeros((count, len(structure)), dtype=np.int64)
    for name in topological_order(cut_structure):
        if name not in needed:
            continue
        i = cut_structure.index_of(name)
        if name in states:
            values[:, i] = states[name]
            continue
        j = parent_configurations(cut_structure, i, values)
        values[:, i] = _pick_states(cut.cpts[i][j], uniforms[:, i])

    flags = np.zeros_like(values, dtype=bool)
    for name in targets:
        flags[:, structure.index_of(name)] = True
    block = Dataset(structure.variables, values, flags)
    return block.project(keep) if keep is not None else block


def draw_block(net: CausalNetwork, count: int, rng: np.random.Generator,
               manipulated: Sequence[str] = (), keep: Optional[Sequence[str]] = None) -> Dataset:
    """
    Vectorised draws of count cases sharing one manipulated variable set.

    Each manipulated variable gets its own uniformly drawn state per case.
    With keep, only those columns (and the nodes they depend on) are drawn.
    """
    return forward_block(net, rng.random((count, len(net.structure))), manipulated, keep)


def _mix_blocks(spec: MixSpec):
    """(first case index, count, manipulated target or None) for the three blocks, in order."""
    half = spec.m // 2
    return ((0, half, spec.x), (half, half, spec.y), (spec.m, spec.n, None))


def generate_mix(net: CausalNetwork, spec: MixSpec) -> Dataset:
    """
    The mixed dataset for a pair, projected onto (x, y).

    Cases come in a fixed order (x manipulated, y manipulated, observational)
    and case k is drawn from case_stream(seed, k).
    """
    pair = [spec.x, spec.y]
    for name in pair:
        net.structure.index_of(name)
    width = len(net.structure)
    blocks = [
        forward_block(net, case_uniforms(spec.seed, first, count, width),
                      manipulated=[target] if target else [], keep=pair)
        for first, count, target in _mix_blocks(spec)
    ]
    data = blocks[0].concat(blocks[1]).concat(blocks[2])
    logger.debug("generated mix %s/%s m=%d n=%d seed=%d", spec.x, spec.y, spec.m, spec.n, spec.seed)
    return data


def generate_intent_mix(net: CausalNetwork, spec: MixSpec, compliance: float = 1.0) -> Dataset:
    """
    Mixed data under nondeterministic manipulation.

    Columns are (x, y, M_x, M_y), all observed. In an experimental case the
    intended state is obeyed with probability compliance; otherwise the
    variable takes its passively drawn value. Case k is drawn from
    case_stream(seed, k), as in generate_mix.
    """
    if not 0.0 <= compliance <= 1.0:
        raise UsageError(f"compliance must lie in [0, 1], got {compliance}")
    pair = [spec.x, spec.y]
    structure = net.structure
    width = len(structure)
    parts = []
    for first, count, target in _mix_blocks(spec):
        # per case: the complying world, the passive world, the compliance draw
        uniforms = case_uniforms(spec.seed, first, count, 2 * width + 1)
        intents = np.zeros((count, 2), dtype=np.int64)
        passive = forward_block(net, uniforms[:, width:2 * width], keep=pair).values
        if target is None:
            values = passive
        else:
            forced = forward_block(net, uniforms[:, :width], manipulated=[target], keep=pair).values
            intended = forced[:, pair.index(target)]
            complied = uniforms[:, 2 * width] < compliance
            values = np.where(complied[:, None], forced, passive)
            intents[:, pair.index(target)] = intended + 1
        parts.append(np.hstack([values, intents]))

    variables = tuple(structure.variable(name) for name in pair)
    variables += tuple(intent_variable(v) for v in variables)
    values = np.vstack(parts) if parts else np.zeros((0, 4), dtype=np.int64)
    return Dataset(variables, values, np.zeros_like(values, dtype=bool))
