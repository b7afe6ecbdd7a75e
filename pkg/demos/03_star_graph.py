"""A star graph where no measure of maximal entropy exists.

A hub connects to floor(2^k / k^2) spokes of height k for every k >= 2.
The vertex series has radius exactly 1/2 and still converges there, and
phi(1/2) stays well below 1.  So phi never reaches 1: x_hat sits at the
radius, h = ln 2, and the maximizing measure fails to exist.
"""
import math

import numpy as np

from rftflow import build_quotient, load_spec, solve_entropy, solve_phi
from rftflow.series import class_radius

spec = load_spec("example3")
spokes = next(c for c in spec.classes if not c.is_finite)
radius = class_radius(spokes)
print(f"series radius: {radius.exact} (converges there: {radius.converges_at_radius})")

q = build_quotient(spec)
for x in np.linspace(0.1, 0.5, 5):
    ev = solve_phi(q, float(x), strict=False)
    print(f"x = {x:.2f}  phi in [{ev.phi:.10f}, {ev.phi_upper:.10f}]")

r = solve_entropy(q)
print()
print(f"x_hat = {r.x_hat}, h = {r.entropy:.15f}, ln 2 = {math.log(2):.15f}")
print(f"phi(x_hat) = {r.phi_at_xhat:.6f} < 1")
print(f"mme = {r.mme.value}")
