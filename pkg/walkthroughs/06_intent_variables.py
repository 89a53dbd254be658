#!/usr/bin/env python3
"""
06 - When Manipulations Do Not Always Work
Record what the experimenter intended and learn how often it took.

This demonstrates:
1. Intent variables M_x with 0 meaning 'just observe'
2. Imperfect compliance in simulated experiments
3. Scoring the augmented family as plain observational data
"""

import sys
import os
from dotenv import load_dotenv

# Add parent directory to path
sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))
from causalmix.config import FIXTURES_DIR
from causalmix.discovery import HypothesisSet, encode_intents, structure_posterior
from causalmix.netio import load_network
from causalmix.sampler import MixSpec, generate_intent_mix, generate_mix
from causalmix.scoring import posterior_params, default_prior, tally_counts

# Load environment variables
load_dotenv()

def main():
    print("🎯 Intent Variables")
    print("=" * 40)

    net = load_network(FIXTURES_DIR / "two_node.cbn")
    hyp = HypothesisSet.pairwise(net.structure.variable("X"), net.structure.variable("Y"))
    augmented = hyp.augmented(["X", "Y"])
    spec = MixSpec("X", "Y", m=400, n=100, seed=6)

    deterministic = generate_mix(net, spec)
    print(f"Deterministic:      {structure_posterior(deterministic, hyp).as_dict()}")
    print(f"Same, as intents:   {structure_posterior(encode_intents(deterministic, ['X', 'Y']), augmented).as_dict()}")

    for compliance in (0.9, 0.6):
        data = generate_intent_mix(net, spec, compliance)
        posterior = structure_posterior(data, augmented)
        print(f"Compliance {compliance:.0%}:    {posterior.as_dict()}")

    structure = augmented.structures[0]
    data = generate_intent_mix(net, spec, 0.6)
    learned = posterior_params(tally_counts(data, structure), default_prior(structure), structure)
    print("\n📋 Learned P(X | M_X):")
    for state, row in zip(structure.variable("M_X").states, learned.cpt("X")):
        print(f"  M_X={state}: {row.round(3).tolist()}")

    print("\n✅ Compliance is learned from data, not assumed!")

if __name__ == "__main__":
    main()
