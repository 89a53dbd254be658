#!/usr/bin/env python3
"""
04 - Which Way Does the Arrow Point?
Posterior over X -> Y, Y -> X and no arc as data accumulates.

This demonstrates:
1. Observational data alone cannot orient the arc
2. A few experiments break the tie
3. Structure error 1 - P(H_true | D)
"""

import sys
import os
from dotenv import load_dotenv

# Add parent directory to path
sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))
from causalmix.config import FIXTURES_DIR
from causalmix.discovery import H1, HypothesisSet, structure_posterior
from causalmix.evalmetrics import serr
from causalmix.netio import load_network
from causalmix.sampler import MixSpec, generate_mix

# Load environment variables
load_dotenv()

def main():
    print("🧭 Which Way Does the Arrow Point?")
    print("=" * 40)

    net = load_network(FIXTURES_DIR / "two_node.cbn")
    hyp = HypothesisSet.pairwise(net.structure.variable("X"), net.structure.variable("Y"))

    print(f"{'m':>5} {'n':>5}   {'P(H1)':>7} {'P(H2)':>7} {'P(H3)':>7}   SErr")
    for m, n in [(0, 0), (0, 50), (0, 500), (10, 0), (50, 0), (50, 500)]:
        data = generate_mix(net, MixSpec("X", "Y", m, n, seed=1))
        posterior = structure_posterior(data, hyp)
        p = posterior.posteriors
        print(f"{m:>5} {n:>5}   {p[0]:7.3f} {p[1]:7.3f} {p[2]:7.3f}   {serr(posterior, H1):.3f}")

    print("\n✅ Passive data finds the dependence; experiments find its direction!")

if __name__ == "__main__":
    main()
