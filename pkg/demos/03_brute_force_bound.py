"""Check the certified bound on every admissible product.

For short horizons the set of dwell-admissible switching segments is
small enough to list.  Each product's norm is compared with c e^{-lambda t}.
A rate that is too ambitious is caught immediately.

Run:  python3 demos/03_brute_force_bound.py
"""
from dwellcert import certify, example_family
from dwellcert.switching_sim import brute_force_bound_check, compute_basis_c, count_admissible_words

fam = example_family()
cert = certify(fam, 2)
c = compute_basis_c(fam, 2, cert.lam, cert.m)

for max_len in (6, 9, 12, 15):
    rep = brute_force_bound_check(fam, 2, cert.lam, c, max_len)
    print(f"length <= {max_len:2d}: {count_admissible_words(2, 2, max_len):6d} words, "
          f"worst slack {rep.max_violation:+.3e}, pass={rep.passed}")

greedy = 0.5
rep = brute_force_bound_check(fam, 2, greedy, compute_basis_c(fam, 2, greedy, cert.m), 15)
print(f"\nlambda={greedy}: pass={rep.passed}, worst word {rep.worst_word}")
