"""
Command-line interface: python -m causalmix <command> [options]

Exit codes: 0 success, 1 usage error (bad flags, arguments or config),
2 data or format error (unparseable files, invalid networks, schema
mismatches).
"""

import argparse
import logging
import re
import sys
from pathlib import Path
from typing import List, Optional, Sequence

import numpy as np
from pydantic import ValidationError

from causalmix.config import get_settings
from causalmix.core import (
    DEFAULT_CONFOUNDER_RULE,
    ConfounderRule,
    NetworkStructure,
    Variable,
    pair_taxonomy,
    topological_order,
    validate_network,
)
from causalmix.dataio import load_dataset, save_dataset
from causalmix.discovery import HypothesisSet, ModelAverager, structure_posterior
from causalmix.errors import CausalMixError, CycleError, UsageError
from causalmix.harness import ExperimentConfig, load_config, run_experiment
from causalmix.inference import Evidence, EvidenceMode
from causalmix.log import configure_logging
from causalmix.netio import load_network, parse_document
from causalmix.sampler import MixSpec, generate_intent_mix, generate_mix
from causalmix.scoring import default_prior, log_joint_score, log_marginal_likelihood, tally_counts

logger = logging.getLogger(__name__)

EXIT_OK, EXIT_USAGE, EXIT_DATA = 0, 1, 2

_ARC = re.compile(r"^\s*([A-Za-z0-9_][A-Za-z0-9_.\-]*)\s*->\s*([A-Za-z0-9_][A-Za-z0-9_.\-]*)\s*$")


class _ArgumentParser(argparse.ArgumentParser):
    """argparse with usage errors mapped to exit code 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _number(value: float) -> str:
    return f"{value:.10g}"


def parse_structure(text: str, variables: Sequence[Variable]) -> NetworkStructure:
    """'none', or comma-separated arcs such as 'X1->X2' or 'A->B, B->C'."""
    if text.strip().lower() == "none":
        return NetworkStructure.from_names(variables)
    arcs = []
    for part in text.split(","):
        match = _ARC.match(part)
        if not match:
            raise UsageError(f"malformed structure '{text}': expected 'none' or arcs like 'X->Y'")
        arcs.append((match.group(1), match.group(2)))
    names = {v.name for v in variables}
    for parent, child in arcs:
        for name in (parent, child):
            if name not in names:
                raise UsageError(f"structure names '{name}', which is not a dataset variable")
        if parent == child:
            raise UsageError(f"self-loop '{parent}->{child}' in structure")
    if len(set(arcs)) != len(arcs):
        raise UsageError(f"structure '{text}' repeats an arc")
    structure = NetworkStructure.from_arcs(variables, arcs)
    try:
        topological_order(structure)
    except CycleError as e:
        raise UsageError(f"structure '{text}' is cyclic: {e}") from None
    return structure


def _pair_variables(data, x: str, y: str):
    if x == y:
        raise UsageError("--x and --y must name different variables")
    return data.variable(x), data.variable(y)


def cmd_score(args) -> int:
    data = load_dataset(args.data)
    structure = parse_structure(args.structure, data.variables)
    prior = default_prior(structure, args.prior_ess_uniform)
    log_marginal = log_marginal_likelihood(tally_counts(data, structure), prior)
    print(f"log_marginal={_number(log_marginal)}")
    print(f"marginal={_number(float(np.exp(log_marginal)))}")
    if args.structure_prior is not None:
        if not 0.0 < args.structure_prior <= 1.0:
            raise UsageError("--structure-prior must lie in (0, 1]")
        score = log_joint_score(float(np.log(args.structure_prior)), log_marginal)
        print(f"log_joint={_number(score.log_joint)}")
        print(f"joint={_number(float(np.exp(score.log_joint)))}")
    return EXIT_OK


def cmd_posterior(args) -> int:
    data = load_dataset(args.data)
    hyp = HypothesisSet.pairwise(*_pair_variables(data, args.x, args.y))
    posterior = structure_posterior(data, hyp, lambda s: default_prior(s, args.prior_ess_uniform))
    for label, p in posterior.as_dict().items():
        print(f"P({label})={_number(p)}")
    return EXIT_OK


def cmd_sample(args) -> int:
    net = load_network(args.network)
    spec = MixSpec(args.x, args.y, args.m, args.n, args.seed)
    if args.compliance is None:
        data = generate_mix(net, spec)
    else:
        data = generate_intent_mix(net, spec, args.compliance)
    save_dataset(data, args.out)
    print(f"wrote {len(data)} cases to {args.out}")
    return EXIT_OK


def _given_evidence(variable: str, text: str, mode: Optional[str]) -> Evidence:
    evidence = Evidence.parse(variable, text)
    if mode == "manipulate" and not evidence.manipulated:
        evidence = Evidence(variable, evidence.state, EvidenceMode.MANIPULATED)
    elif mode == "observe" and evidence.manipulated:
        raise UsageError(f"--given '{text}' marks a manipulation but --mode is observe")
    return evidence


def cmd_predict(args) -> int:
    data = load_dataset(args.data)
    x_var, y_var = _pair_variables(data, args.x, args.y)
    given = _given_evidence(args.x, args.given, args.mode)
    x_var.state_index(given.state)
    averager = ModelAverager(data, HypothesisSet.pairwise(x_var, y_var),
                             lambda s: default_prior(s, args.prior_ess_uniform))
    prediction = averager.predict(args.y, given)
    for state, p in prediction.as_dict().items():
        print(f"P({args.y}={state})={_number(p)}")
    return EXIT_OK


def cmd_classify(args) -> int:
    net = load_network(args.network)
    if len(net.structure) < 2:
        raise UsageError(f"network '{net.name}' has fewer than two variables, so no pairs")
    taxonomy = pair_taxonomy(net.structure, ConfounderRule(args.rule))
    width = max(len(str(taxonomy.total)), 5)
    print(f"{'':<10} {'confounded':>{width + 6}} {'unconfounded':>{width + 6}} {'total':>{width}}")
    for label, confounded, unconfounded, total in taxonomy.rows():
        print(f"{label:<10} {confounded:>{width + 6}} {unconfounded:>{width + 6}} {total:>{width}}")
    return EXIT_OK


def cmd_experiment(args) -> int:
    cfg = load_config(args.config)
    updates = {}
    if args.workers is not None:
        updates["workers"] = args.workers
    if args.output_dir is not None:
        updates["output_dir"] = Path(args.output_dir)
    if updates:
        try:
            cfg = ExperimentConfig.model_validate({**cfg.model_dump(), **updates})
        except ValidationError as e:
            raise UsageError(f"invalid experiment options:\n{e}") from None
    result = run_experiment(cfg)
    for cell in result.cells:
        print(f"{cell.metric} {cell.category} m={cell.m} n={cell.n} "
              f"mean={_number(cell.mean)} std={_number(cell.std)}")
    for path in result.files:
        print(f"wrote {path}")
    return EXIT_OK


def cmd_validate(args) -> int:
    text = Path(args.network).read_text(encoding="utf-8")
    report = validate_network(parse_document(text).to_network(validate=False))
    print(report)
    return EXIT_OK if report.ok else EXIT_DATA


def build_parser() -> argparse.ArgumentParser:
    parser = _ArgumentParser(prog="causalmix",
                             description="Causal structure learning from mixed experimental and observational data")
    parser.add_argument("--log-level", choices=("DEBUG", "INFO", "WARNING", "ERROR"), type=str.upper)
    commands = parser.add_subparsers(dest="command", metavar="command", required=True)

    def add_prior_flag(p):
        p.add_argument("--prior-ess-uniform", nargs="?", type=float, const=1.0, default=1.0, metavar="ESS",
                       help="Dirichlet prior ESS/(q r) per cell (default ESS = 1)")

    p = commands.add_parser("score", help="log marginal likelihood of one structure")
    p.add_argument("--data", required=True)
    p.add_argument("--structure", required=True, help="'none' or arcs such as 'X1->X2'")
    p.add_argument("--structure-prior", type=float, help="also print the joint score under this prior")
    add_prior_flag(p)
    p.set_defaults(handler=cmd_score)

    p = commands.add_parser("posterior", help="P(H1), P(H2), P(H3) for a node pair")
    p.add_argument("--data", required=True)
    p.add_argument("--x", required=True)
    p.add_argument("--y", required=True)
    add_prior_flag(p)
    p.set_defaults(handler=cmd_posterior)

    p = commands.add_parser("sample", help="draw a mixed dataset for a node pair")
    p.add_argument("--network", required=True)
    p.add_argument("--x", required=True)
    p.add_argument("--y", required=True)
    p.add_argument("--m", type=int, required=True, help="experimental cases (even)")
    p.add_argument("--n", type=int, required=True, help="observational cases")
    p.add_argument("--seed", type=int, help="default: CAUSALMIX_SEED, else 0")
    p.add_argument("--out", required=True)
    p.add_argument("--compliance", type=float,
                   help="record intents M_x, M_y and obey them with this probability")
    p.set_defaults(handler=cmd_sample)

    p = commands.add_parser("predict", help="model-averaged distribution of y given x")
    p.add_argument("--data", required=True)
    p.add_argument("--x", required=True)
    p.add_argument("--y", required=True)
    p.add_argument("--given", required=True, help="state of x; prefix '!' to manipulate")
    p.add_argument("--mode", choices=("observe", "manipulate"))
    add_prior_flag(p)
    p.set_defaults(handler=cmd_predict)

    p = commands.add_parser("classify", help="count node pairs by causal relatedness and confounding")
    p.add_argument("--network", help="default: CAUSALMIX_GOLD_NETWORK, else the bundled ALARM")
    p.add_argument("--rule", choices=[r.value for r in ConfounderRule], default=DEFAULT_CONFOUNDER_RULE.value)
    p.set_defaults(handler=cmd_classify)

    p = commands.add_parser("experiment", help="run the (m, n) grid and write the tables")
    p.add_argument("--config", required=True)
    p.add_argument("--workers", type=int)
    p.add_argument("--output-dir")
    p.set_defaults(handler=cmd_experiment)

    p = commands.add_parser("validate", help="check a network file and list every problem")
    p.add_argument("--network", required=True)
    p.set_defaults(handler=cmd_validate)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        settings = get_settings(log_level=args.log_level)
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    configure_logging(settings.log_level)
    if args.command == "experiment" and args.workers is None and settings.workers > 1:
        args.workers = settings.workers
    if args.command == "sample" and args.seed is None:
        args.seed = settings.seed
    if args.command == "classify" and args.network is None:
        args.network = str(settings.gold_network)
    logger.debug("command %s with %s", args.command, vars(args))

    try:
        return args.handler(args)
    except UsageError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except CausalMixError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_DATA
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_DATA
