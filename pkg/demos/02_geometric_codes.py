"""Geometric codes: a countable graph with two infinite families.

Vertices are the integers with |v| >= 2, heights 2 ln(1.25 |v|), and edges
between sign classes with a handful of forbidden transitions.  The
follower/leader partition collapses the infinite graph into eight classes,
and phi is then the solution of an 8x8 linear system.
"""
import numpy as np

from rftflow import build_quotient, load_spec, refine_partition, solve_entropy, solve_phi

spec = load_spec("example2")

# Partition of the vertex set
for block in refine_partition(spec):
    print("class:", block.describe())

# Quotient rooted at 2 and its adjacency pattern
q = build_quotient(spec, "2")
names = q.describe()
print()
print("quotient order:", names)
print(q.adj.astype(int))

# phi grows from 0 and blows up at the first singular point of M(x)
r = solve_entropy(q)
print()
for x in np.linspace(0.05, 0.99 * r.r_phi, 8):
    ev = solve_phi(q, float(x))
    print(f"x = {x:.4f}  phi = {ev.phi:10.6f}  det M = {ev.detM:+.6f}")

print()
print(f"x_hat      = {r.x_hat:.12f}")
print(f"entropy    = {r.entropy:.12f}")
print(f"x_tilde0   = {r.x_tilde0:.6f}  (phi is singular here)")
print(f"r_F        = {r.r_F.value:.6f}")
print(f"mme        = {r.mme.value}")

# The entropy does not depend on the root
for w in ("3", "-2", "pos[4]"):
    print(f"root {w:>6}: h = {solve_entropy(build_quotient(spec, w)).entropy:.12f}")
