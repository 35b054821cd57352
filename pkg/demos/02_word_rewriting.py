"""Pull a dominant letter to the front of a matrix word.

The word A3^2 A2^2 A1^3 contains m=3 copies of A1.  Swapping A1 blocks
leftwards past the other runs produces A1^3 times the rest, plus one
commutator term per swap.  The block size decides which commutators
appear.

Run:  python3 demos/02_word_rewriting.py
"""
import numpy as np

from dwellcert import SubsystemFamily, example_family
from dwellcert.word_rewriter import audit_counts, decompose, evaluate_decomposition, parse_word

base = example_family()
fam = SubsystemFamily([base[1], base[2], 0.5 * np.eye(2)])
word = parse_word("3^2 2^2 1^3")

for delta in (2, 1):
    dec = decompose(word, target=1, m=3, delta=delta)
    print(f"\n{word} with blocks of {delta}: {len(dec.terms)} terms")
    for term in dec.terms:
        print("   ", term)
    _, _, residual = evaluate_decomposition(dec, fam)
    audit = audit_counts(dec, N=3, m=3, delta=delta)
    print(f"  residual {residual:.2e}; counts {audit.actual} within bounds: {audit.all_within}")
