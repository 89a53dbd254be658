#!/usr/bin/env python3
"""
02 - Seeing versus Doing
Compare observing a variable with setting it by hand.

This demonstrates:
1. Exact inference with observed evidence
2. Graph surgery for manipulated evidence
3. Why the two answers differ upstream but not downstream
"""

import sys
import os
from dotenv import load_dotenv

# Add parent directory to path
sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))
from causalmix.config import FIXTURES_DIR
from causalmix.core import surgery
from causalmix.inference import Evidence, EvidenceMode, Query, marginal, query
from causalmix.netio import load_network

# Load environment variables
load_dotenv()

def main():
    print("🔪 Seeing versus Doing")
    print("=" * 40)

    net = load_network(FIXTURES_DIR / "chain.cbn")
    print(f"Network: {net.structure.describe()}")

    for name in net.names:
        print(f"  P({name}=T) = {marginal(net, name)['T']:.3f}")

    seen = Evidence("B", "T")
    done = Evidence("B", "T", EvidenceMode.MANIPULATED)

    print("\n👀 Observing B=T:")
    print(f"  P(A=T | B=T)     = {query(net, Query(('A',), (seen,)))['T']:.3f}")
    print(f"  P(C=T | B=T)     = {query(net, Query(('C',), (seen,)))['T']:.3f}")

    print("\n✋ Setting B=T:")
    print(f"  P(A=T | do(B=T)) = {query(net, Query(('A',), (done,)))['T']:.3f}")
    print(f"  P(C=T | do(B=T)) = {query(net, Query(('C',), (done,)))['T']:.3f}")

    cut = surgery(net, {"B": "T"})
    print(f"\nAfter surgery: {cut.structure.describe()}")

    print("\n✅ Manipulation cuts the arcs into B, so A keeps its prior!")

if __name__ == "__main__":
    main()
