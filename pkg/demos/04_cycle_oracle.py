"""Counting cycles by brute force as a check on the linear system.

Truncating each family to finitely many members and enumerating root
cycles up to length L gives lower bounds for phi that increase in L and
in the truncation size.  On the full 3-shift the gap shrinks like (2x)^L.
"""
from rftflow import build_quotient, enumerate_cycles, load_spec, phi_truncated, solve_phi, truncate

# Full 3-shift: 2^(L-1) cycles of length L
spec = load_spec("fullshift_n3")
poly = enumerate_cycles(truncate(spec), "a", 10)
print("cycles by length:", poly.counts_by_length())
exact = solve_phi(build_quotient(spec), 0.2).phi
for L in (2, 4, 6, 8, 10):
    print(f"L = {L:2d}  gap = {exact - phi_truncated(poly, 0.2, L):.3e}   (2x)^L/(1-2x) = {0.4 ** L / 0.6:.3e}")

# example1: a family truncated at N members
print()
spec = load_spec("example1")
q = build_quotient(spec)
x = 0.3
exact = solve_phi(q, x).phi
print(f"phi({x}) = {exact:.10f}")
for n in (2, 5, 10, 20):
    poly = enumerate_cycles(truncate(spec, n), "3", 8)
    print(f"N = {n:2d}  truncated phi at L = 8: {phi_truncated(poly, x):.10f}")
