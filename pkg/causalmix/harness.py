"""
Experiment harness: sample node pairs from a gold network, generate mixed
datasets over an (m, n) grid, learn each pair, and write the error tables.

Every (pair, m, n, replication) task draws from its own seed, derived from
the master seed and the task's coordinates, so results do not depend on the
worker count or on the order in which tasks finish.
"""

import json
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from functools import lru_cache
from itertools import combinations
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

import numpy as np
import pandas as pd
from pydantic import BaseModel, Field, ValidationError, field_validator

from causalmix.config import ALARM_PATH
from causalmix.core import (
    CausalNetwork,
    DEFAULT_CONFOUNDER_RULE,
    ConfounderRule,
    PairClass,
    PairTaxonomy,
    ancestors,
    classify_pair,
    pair_taxonomy,
)
from causalmix.discovery import H1, H2, H3
from causalmix.errors import UsageError
from causalmix.evalmetrics import PairEvaluation, evaluate_pair
from causalmix.netio import load_network
from causalmix.sampler import MixSpec, case_stream, generate_mix

logger = logging.getLogger(__name__)

DEFAULT_GRID = (0, 50, 100, 300, 500)
METRICS = ("serr", "operr", "mperr")
CATEGORIES = ("related-unconfounded", "unrelated-unconfounded")

# first word of the seed entropy, keeping pair sampling and cell streams apart
PAIR_SAMPLING_STREAM, CELL_STREAM = 0, 1


class ExperimentConfig(BaseModel):
    """One run of the (m, n) grid."""
    gold_network: Path = Field(default=ALARM_PATH, description="Gold-standard .cbn network")
    pair_sample_size: int = Field(100, ge=1, description="Node pairs drawn from the gold network")
    pairs_per_category: Optional[int] = Field(None, ge=1, description="Cap on evaluated pairs per category")
    m_grid: List[int] = Field(default_factory=lambda: list(DEFAULT_GRID), description="Experimental case counts")
    n_grid: List[int] = Field(default_factory=lambda: list(DEFAULT_GRID), description="Observational case counts")
    extended_n: List[int] = Field(default_factory=list, description="Extra n values run with m = 0")
    replications: int = Field(1, ge=1, description="Datasets drawn per pair and cell")
    master_seed: int = Field(0, ge=0)
    output_dir: Path = Field(default=Path("results"))
    workers: int = Field(1, ge=1)
    confounder_rule: ConfounderRule = DEFAULT_CONFOUNDER_RULE

    @field_validator("gold_network", mode="before")
    @classmethod
    def resolve_alias(cls, v):
        if isinstance(v, str) and v.strip().lower() == "alarm":
            return ALARM_PATH
        return v

    @field_validator("m_grid")
    @classmethod
    def validate_m_grid(cls, v):
        if not v:
            raise ValueError("m grid must not be empty")
        if any(m < 0 or m % 2 for m in v):
            raise ValueError("m values must be even and non-negative")
        return sorted(set(v))

    @field_validator("n_grid")
    @classmethod
    def validate_n_grid(cls, v):
        if not v:
            raise ValueError("n grid must not be empty")
        if any(n < 0 for n in v):
            raise ValueError("n values must be non-negative")
        return sorted(set(v))

    @field_validator("extended_n")
    @classmethod
    def validate_extended_n(cls, v):
        if any(n < 0 for n in v):
            raise ValueError("extended n values must be non-negative")
        return sorted(set(v))

    def cells(self) -> List[Tuple[int, int]]:
        """(m, n) pairs to run, grid first, then the extended observational sweep."""
        grid = [(m, n) for n in self.n_grid for m in self.m_grid]
        return grid + [(0, n) for n in self.extended_n if (0, n) not in grid]


def load_config(path: Union[str, Path]) -> ExperimentConfig:
    """Read a JSON config; a relative gold_network resolves against the file's directory."""
    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise UsageError(f"config file not found: {path}") from None
    except json.JSONDecodeError as e:
        raise UsageError(f"config file {path} is not valid JSON: {e}") from None
    try:
        cfg = ExperimentConfig.model_validate(raw)
    except ValidationError as e:
        raise UsageError(f"invalid experiment config {path}:\n{e}") from None
    if not cfg.gold_network.is_absolute():
        cfg = cfg.model_copy(update={"gold_network": (path.parent / cfg.gold_network).resolve()})
    if not cfg.gold_network.is_file():
        raise UsageError(f"gold network not found: {cfg.gold_network}")
    return cfg


@dataclass(frozen=True)
class SampledPair:
    x: str
    y: str
    pair_class: PairClass
    h_true: Optional[str]

    @property
    def category(self) -> str:
        return self.pair_class.label


@dataclass(frozen=True)
class GridRow:
    """One evaluated (pair, m, n, replication) task."""
    pair_index: int
    category: str
    m: int
    n: int
    replication: int
    evaluation: PairEvaluation


@dataclass(frozen=True)
class TableCell:
    m: int
    n: int
    metric: str
    category: str
    mean: float
    std: float


@dataclass
class ExperimentResult:
    pairs: List[SampledPair]
    rows: List[GridRow]
    cells: List[TableCell]
    files: List[Path]


def true_hypothesis(net: CausalNetwork, x: str, y: str, pair_class: PairClass) -> Optional[str]:
    """H1/H2 by ancestry for related pairs, H3 for unrelated; None when confounded."""
    if pair_class.confounded:
        return None
    if not pair_class.causally_related:
        return H3
    return H1 if x in ancestors(net.structure, y) else H2


def sample_pairs(net: CausalNetwork, count: int, rng: np.random.Generator,
                 rule: ConfounderRule = DEFAULT_CONFOUNDER_RULE) -> List[SampledPair]:
    """Uniform sample of unordered node pairs, without replacement, each classified."""
    pairs = list(combinations(net.structure.names, 2))
    if count > len(pairs):
        raise UsageError(f"cannot sample {count} pairs from a network with {len(pairs)}")
    chosen = np.sort(rng.choice(len(pairs), size=count, replace=False))
    sampled = []
    for k in chosen:
        x, y = pairs[k]
        pair_class = classify_pair(net.structure, x, y, rule)
        sampled.append(SampledPair(x, y, pair_class, true_hypothesis(net, x, y, pair_class)))
    return sampled


def taxonomy_of(pairs: List[SampledPair]) -> PairTaxonomy:
    taxonomy = PairTaxonomy()
    for pair in pairs:
        taxonomy.add(pair.pair_class)
    return taxonomy


def cell_seed(master_seed: int, pair_index: int, m: int, n: int, replication: int) -> int:
    sequence = np.random.SeedSequence([master_seed, CELL_STREAM, pair_index, m, n, replication])
    return int(sequence.generate_state(2, dtype=np.uint64)[0])


@lru_cache(maxsize=8)
def _gold(path: str) -> CausalNetwork:
    return load_network(path)


@dataclass(frozen=True)
class _Task:
    gold_path: str
    pair_index: int
    pair: SampledPair
    m: int
    n: int
    replication: int
    seed: int


def _run_task(task: _Task) -> GridRow:
    gold = _gold(task.gold_path)
    pair = task.pair
    data = generate_mix(gold, MixSpec(pair.x, pair.y, task.m, task.n, task.seed))
    evaluation = evaluate_pair(gold, data, pair.x, pair.y, pair.h_true)
    return GridRow(task.pair_index, pair.category, task.m, task.n, task.replication, evaluation)


def evaluation_pairs(cfg: ExperimentConfig, gold: CausalNetwork) -> Tuple[List[SampledPair], List[SampledPair]]:
    """(all sampled pairs, the unconfounded ones that get evaluated)."""
    rng = case_stream(cfg.master_seed, PAIR_SAMPLING_STREAM)
    sampled = sample_pairs(gold, cfg.pair_sample_size, rng, cfg.confounder_rule)
    evaluated: List[SampledPair] = []
    kept: Dict[str, int] = {}
    for pair in sampled:
        if pair.category not in CATEGORIES:
            continue
        if cfg.pairs_per_category is not None and kept.get(pair.category, 0) >= cfg.pairs_per_category:
            continue
        kept[pair.category] = kept.get(pair.category, 0) + 1
        evaluated.append(pair)
    logger.info("sampled %d pairs, evaluating %d (%s)", len(sampled), len(evaluated),
                ", ".join(f"{c}={kept.get(c, 0)}" for c in CATEGORIES))
    return sampled, evaluated


def evaluate_grid(cfg: ExperimentConfig, pairs: Optional[List[SampledPair]] = None) -> List[GridRow]:
    """Evaluate every (pair, m, n, replication) task, in a fixed order."""
    gold_path = str(cfg.gold_network)
    if not Path(gold_path).is_file():
        raise UsageError(f"gold network not found: {gold_path}")
    if pairs is None:
        _, pairs = evaluation_pairs(cfg, _gold(gold_path))

    tasks = [
        _Task(gold_path, k, pair, m, n, rep, cell_seed(cfg.master_seed, k, m, n, rep))
        for m, n in cfg.cells()
        for k, pair in enumerate(pairs)
        for rep in range(cfg.replications)
    ]
    start = time.time()
    if cfg.workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as executor:
            rows = list(executor.map(_run_task, tasks, chunksize=max(1, len(tasks) // (4 * cfg.workers))))
    else:
        rows = [_run_task(task) for task in tasks]
    logger.info("evaluated %d tasks over %d cells in %.1fs", len(rows), len(cfg.cells()), time.time() - start)
    return rows


def rows_frame(rows: List[GridRow]) -> pd.DataFrame:
    """Long-form table, one row per task."""
    return pd.DataFrame([
        {
            "pair_index": r.pair_index,
            "x": r.evaluation.x,
            "y": r.evaluation.y,
            "category": r.category,
            "h_true": r.evaluation.h_true,
            "m": r.m,
            "n": r.n,
            "replication": r.replication,
            **{metric: getattr(r.evaluation, metric) for metric in METRICS},
        }
        for r in rows
    ])


def summarize(rows: List[GridRow]) -> List[TableCell]:
    """
    Per (category, m, n, metric): the mean over replications of the pair
    average, with the population standard deviation across replications.
    """
    if not rows:
        return []
    frame = rows_frame(rows)
    per_replication = frame.groupby(["category", "m", "n", "replication"])[list(METRICS)].mean()
    grouped = per_replication.groupby(level=["category", "m", "n"])
    means, stds = grouped.mean(), grouped.std(ddof=0)

    cells = []
    for (category, m, n), mean_row in means.iterrows():
        for metric in METRICS:
            cells.append(TableCell(int(m), int(n), metric, str(category),
                                   float(mean_row[metric]), float(stds.loc[(category, m, n), metric])))
    order = {c: k for k, c in enumerate(CATEGORIES)}
    cells.sort(key=lambda c: (METRICS.index(c.metric), order.get(c.category, len(order)), c.n, c.m))
    return cells


def run_grid(cfg: ExperimentConfig) -> List[TableCell]:
    return summarize(evaluate_grid(cfg))


def _format_cell(mean: float, std: float) -> str:
    return f"{mean:.6g} ({std:.6g})"


def emit_tables(cells: List[TableCell], output_dir: Union[str, Path]) -> List[Path]:
    """One `{metric}_{category}.csv` per metric and category: rows by n, columns by m."""
    if not cells:
        raise UsageError("no table cells to write")
    output_dir = Path(output_dir)
    output_dir.mkdir(parents=True, exist_ok=True)
    frame = pd.DataFrame([asdict(c) for c in cells])
    frame["value"] = [_format_cell(c.mean, c.std) for c in cells]

    written = []
    groups = frame.groupby(["metric", "category"], sort=False)
    for (metric, category), group in groups:
        table = group.pivot(index="n", columns="m", values="value").sort_index().sort_index(axis=1)
        table = table.fillna("")
        table.columns = [str(m) for m in table.columns]
        path = output_dir / f"{metric}_{category}.csv"
        table.to_csv(path, index_label="n\\m", lineterminator="\n")
        written.append(path)
    logger.info("wrote %d tables to %s", len(written), output_dir)
    return written


def emit_taxonomy(taxonomy: PairTaxonomy, path: Union[str, Path]) -> Path:
    """2x2 pair counts with totals, in the layout of a confounded/unconfounded table."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame = pd.DataFrame(taxonomy.rows(), columns=["pairs", "confounded", "unconfounded", "total"])
    frame.to_csv(path, index=False, lineterminator="\n")
    return path


def emit_pair_report(rows: List[GridRow], path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    rows_frame(rows).to_csv(path, index=False, float_format="%.9g", lineterminator="\n")
    return path


def run_experiment(cfg: ExperimentConfig) -> ExperimentResult:
    """The full run: metric tables, both taxonomies, and the per-pair report."""
    if not cfg.gold_network.is_file():
        raise UsageError(f"gold network not found: {cfg.gold_network}")
    gold = _gold(str(cfg.gold_network))
    sampled, evaluated = evaluation_pairs(cfg, gold)
    if not evaluated:
        raise UsageError("the pair sample holds no unconfounded pairs to evaluate")
    rows = evaluate_grid(cfg, evaluated)
    cells = summarize(rows)

    files = emit_tables(cells, cfg.output_dir)
    files.append(emit_taxonomy(pair_taxonomy(gold.structure, cfg.confounder_rule), cfg.output_dir / "taxonomy_all.csv"))
    files.append(emit_taxonomy(taxonomy_of(sampled), cfg.output_dir / "taxonomy_sampled.csv"))
    files.append(emit_pair_report(rows, cfg.output_dir / "pairs.csv"))
    return ExperimentResult(sampled, rows, cells, files)
