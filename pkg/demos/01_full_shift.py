"""Full shifts: the simplest special flows, where the answer is known.

On the complete graph with n vertices and constant height 1 every word is
allowed, so the flow is a suspension of the full n-shift and its entropy
is ln n.  The generating function of root-cycles is x / (1 - (n - 1) x).
"""
import math

import numpy as np

from rftflow import build_quotient, solve_entropy, solve_phi
from rftflow.spec import complete_graph

# One class, one block: the quotient has just the root and the rest.
q = build_quotient(complete_graph(4))
print("quotient classes:", q.describe())
print("bands:", q.bands)

# phi against the closed form on a grid below 1/(n-1)
xs = np.linspace(0.0, 0.3, 7)
for x in xs:
    ev = solve_phi(q, float(x))
    print(f"x = {x:.2f}  phi = {ev.phi:.12f}  closed form = {x / (1 - 3 * x):.12f}")

# Entropy for n = 2..10
print()
print(" n   entropy            ln n               mme")
for n in range(2, 11):
    r = solve_entropy(build_quotient(complete_graph(n)))
    print(f"{n:2d}   {r.entropy:.15f}  {math.log(n):.15f}  {r.mme.value}")
