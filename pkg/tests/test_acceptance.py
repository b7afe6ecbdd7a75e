"""Acceptance criteria, one test each, at the stated tolerances.

Every test records a single PASS/FAIL line that is printed in the pytest
terminal summary (and to stdout with ``-s``).
"""
import math
import warnings

import numpy as np

from conftest import ACCEPTANCE_LINES
from oracles import example1_phi
from rftflow.entropy import Mme, first_singular_point, solve_entropy
from rftflow.genfun import (
    determinant_identity,
    phi_closed_form,
    phi_local_perturbation,
    solve_phi,
)
from rftflow.generators import random_finite_spec
from rftflow.oracle import enumerate_cycles, phi_truncated, truncate
from rftflow.quotient import build_quotient, refine_partition, tree_level_check
from rftflow.series import class_radius
from rftflow.spec import complete_graph, load_spec


def record(number: int, title: str, ok: bool, detail: str) -> None:
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {title}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)


def random_specs(count: int, seed: int, **kwargs):
    rng = np.random.default_rng(seed)
    return [random_finite_spec(rng, **kwargs) for _ in range(count)]


def test_full_shift_family():
    worst, verdicts = 0.0, set()
    for n in range(2, 11):
        r = solve_entropy(build_quotient(complete_graph(n, 1.0)))
        worst = max(worst, abs(r.entropy - math.log(n)))
        verdicts.add(r.mme)
    ok = worst < 1e-9 and verdicts == {Mme.EXISTS}
    record(1, "full shifts n = 2..10", ok, f"max |h - ln n| = {worst:.2e}, mme {sorted(v.value for v in verdicts)}")
    assert ok


def test_geometric_code_example():
    r = solve_entropy(build_quotient(load_spec("example2"), "2"))
    ok = abs(r.entropy - 0.8665) <= 5e-4 and r.mme is Mme.EXISTS
    record(2, "geometric codes", ok, f"h = {r.entropy:.6f}, mme {r.mme.value}")
    assert ok


def test_star_graph_example():
    spec = load_spec("example3")
    q = build_quotient(spec)
    r = solve_entropy(q)
    spokes = next(c for c in spec.classes if not c.is_finite)
    radius = class_radius(spokes)
    ok = (radius.exact == 0.5 and r.phi_at_xhat < 0.85 and r.x_hat == 0.5
          and abs(r.entropy - math.log(2)) < 1e-9 and r.mme is Mme.DOES_NOT_EXIST)
    record(3, "star graph", ok,
           f"r_F = {radius.exact}, phi(1/2) = {r.phi_at_xhat:.4f}, h - ln 2 = {r.entropy - math.log(2):.1e}, "
           f"mme {r.mme.value}")
    assert ok


def test_four_evaluations_agree():
    spec = load_spec("example1")
    q = build_quotient(spec, "3")
    x0 = first_singular_point(q)
    worst = 0.0
    for x in np.linspace(x0 / 50, 0.99 * x0, 50):
        x = float(x)
        values = [solve_phi(q, x).phi, phi_closed_form(q, x),
                  phi_local_perturbation(spec, x, "3"), example1_phi(x)]
        worst = max(worst, max(values) - min(values))
    ok = worst < 1e-9
    record(4, "four phi evaluations on example1", ok, f"50 points in (0, {x0:.6f}), max spread {worst:.2e}")
    assert ok


def _identity_gap(q, fractions=(0.2, 0.5, 0.8)) -> float:
    cap = solve_entropy(q).r_phi
    gap = 0.0
    for f in fractions:
        lhs, rhs = determinant_identity(q, f * cap)
        gap = max(gap, abs(lhs - rhs))
    return gap


def test_determinant_identity():
    gaps = [_identity_gap(build_quotient(load_spec("example1"), "3")),
            _identity_gap(build_quotient(load_spec("example2"), "2"))]
    gaps += [_identity_gap(build_quotient(s)) for s in random_specs(100, 5)]
    worst = max(gaps)
    ok = worst < 1e-9
    record(5, "determinant identity", ok, f"example1, example2 and 100 random specs, max gap {worst:.2e}")
    assert ok


def test_cycle_oracle_convergence():
    # heights in [3, 5]: the tail beyond L = 20 is then provably below 1e-5
    worst, monotone = 0.0, True
    for spec in random_specs(20, 11, height_range=(3.0, 5.0)):
        q = build_quotient(spec)
        x = 0.8 * solve_entropy(q).x_hat
        exact = solve_phi(q, x).phi
        poly = enumerate_cycles(truncate(spec), spec.root, 20)
        partial = [phi_truncated(poly, x, n) for n in range(1, 21)]
        monotone &= all(b >= a for a, b in zip(partial, partial[1:]))
        worst = max(worst, abs(exact - partial[-1]))
    ok = worst < 1e-5 and monotone
    record(6, "cycle oracle at L = 20", ok, f"20 random specs, max gap {worst:.2e}, monotone {monotone}")
    assert ok


def test_partition_refinement():
    ex1 = [b.describe() for b in refine_partition(load_spec("example1"))]
    ex2 = [b.describe() for b in refine_partition(load_spec("example2"))]
    ok = (ex1 == ["{3}", "{4, 5}", "rest[k>=6]"]
          and ex2 == ["{2}", "{3}", "{pos[4], pos[5]}", "pos[k>=6]",
                      "{-2}", "{-3}", "{neg[4], neg[5]}", "neg[k>=6]"])
    record(7, "partition refinement", ok, f"example1: {len(ex1)} classes, example2: {len(ex2)} classes")
    assert ok


def test_structural_properties():
    bundled = [load_spec(n) for n in ("example1", "example2", "example3", "fullshift_n3", "subsystem3")]
    randoms = random_specs(30, 17)
    failures = []

    # root independence
    root_gap = 0.0
    for spec in [bundled[0], bundled[1], *randoms[:15]]:
        roots = spec.finite_labels
        hs = [solve_entropy(build_quotient(spec, w)).entropy for w in roots[:4]]
        root_gap = max(root_gap, max(hs) - min(hs))
    if root_gap >= 1e-8:
        failures.append("root independence")

    # scaling law
    scale_gap = 0.0
    for spec in [bundled[0], bundled[1], bundled[2], *randoms[:5]]:
        h = solve_entropy(build_quotient(spec)).entropy
        for c in (0.5, 2.0, 3.0):
            hc = solve_entropy(build_quotient(spec.scaled(c))).entropy
            scale_gap = max(scale_gap, abs(hc - h / c))
    if scale_gap >= 1e-8:
        failures.append("height scaling")

    # positive path sums and monotone phi on grids below the first singular point
    positive = monotone = True
    for spec in [*bundled, *randoms]:
        q = build_quotient(spec)
        r_phi = solve_entropy(q).r_phi
        prev = -1.0
        for x in np.linspace(0.0, 0.99 * r_phi, 25)[1:]:
            ev = solve_phi(q, float(x), strict=False)
            positive &= bool(ev.in_domain and np.all(np.asarray(ev.A) > 0))
            monotone &= ev.phi >= prev
            prev = ev.phi
    if not positive:
        failures.append("positivity")
    if not monotone:
        failures.append("monotonicity")

    # tree-level bound on every accepted spec
    levels_ok = all(tree_level_check(build_quotient(s))[1] for s in [*bundled, *randoms])
    if not levels_ok:
        failures.append("tree levels")

    ok = not failures
    record(8, "structural properties", ok,
           f"root gap {root_gap:.1e}, scaling gap {scale_gap:.1e}, positivity {positive}, "
           f"monotone {monotone}, levels {levels_ok}")
    assert ok, failures


def test_subsystem_soft_check():
    r = solve_entropy(build_quotient(load_spec("subsystem3")))
    ok = abs(r.entropy - 0.8417) <= 5e-3
    record(9, "sub-system soft check (non-blocking)", ok, f"h = {r.entropy:.6f} vs 0.8417")
    if not ok:
        warnings.warn(f"sub-system entropy {r.entropy:.6f} differs from 0.8417 by more than 5e-3")
