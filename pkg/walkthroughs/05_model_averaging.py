#!/usr/bin/env python3
"""
05 - Predicting by Model Averaging
Predict Y from X without committing to one structure.

This demonstrates:
1. Per-structure predictions from posterior-mean parameters
2. Weighting them by the structure posterior
3. Observational versus manipulation predictions
"""

import sys
import os
from dotenv import load_dotenv

# Add parent directory to path
sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))
from causalmix.config import FIXTURES_DIR
from causalmix.discovery import HypothesisSet, ModelAverager
from causalmix.inference import Evidence, EvidenceMode
from causalmix.netio import load_network
from causalmix.sampler import MixSpec, generate_mix

# Load environment variables
load_dotenv()

def main():
    print("⚖️ Predicting by Model Averaging")
    print("=" * 40)

    net = load_network(FIXTURES_DIR / "two_node.cbn")
    data = generate_mix(net, MixSpec("Y", "X", m=20, n=20, seed=4))
    hyp = HypothesisSet.pairwise(net.structure.variable("X"), net.structure.variable("Y"))
    averager = ModelAverager(data.project(["X", "Y"]), hyp)
    print(f"Posterior: {averager.posterior.as_dict()}")

    for mode in EvidenceMode:
        given = Evidence("Y", "T", mode)
        print(f"\n🔮 P(X | Y=T), {mode.value}:")
        for label, prediction in zip(hyp.labels, averager.per_structure("X", given)):
            print(f"  {label}: {prediction.as_dict()}")
        print(f"  averaged: {averager.predict('X', given).as_dict()}")

    print("\n✅ Setting an effect tells you nothing about its cause!")

if __name__ == "__main__":
    main()
