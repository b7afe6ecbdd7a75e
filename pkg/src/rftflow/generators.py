"""Random finite specs for property tests."""
from __future__ import annotations

import numpy as np

from .expr import const
from .spec import COMPLETE, EdgeDecl, FiniteClass, RftSpec


def random_finite_spec(rng: np.random.Generator, max_vertices: int = 8, density: float = 0.4,
                       height_grid: float = 0.25, height_range=(1.0, 3.0)) -> RftSpec:
    """A strongly connected graph on at most ``max_vertices`` named vertices.

    A random Hamiltonian cycle guarantees strong connectivity; other edges
    (loops included) are added independently with probability ``density``.
    Heights are drawn uniformly from a grid so that cycle weights collide,
    which keeps brute-force cycle counting cheap.  The graph is written as
    the complete graph minus the missing edges, split over a random number
    of declared classes.
    """
    n = int(rng.integers(1, max_vertices + 1))
    labels = [f"v{i}" for i in range(n)]
    adj = rng.random((n, n)) < density
    order = rng.permutation(n)
    for a, b in zip(order, np.roll(order, -1)):
        adj[a, b] = True
    lo, hi = height_range
    steps = int(round((hi - lo) / height_grid))
    heights = lo + height_grid * rng.integers(0, steps + 1, size=n)
    cuts = sorted(set(rng.integers(1, n, size=int(rng.integers(0, n))).tolist())) if n > 1 else []
    bounds = [0, *cuts, n]
    classes = tuple(
        FiniteClass(f"c{j}", tuple((labels[i], const(float(heights[i]))) for i in range(a, b)))
        for j, (a, b) in enumerate(zip(bounds, bounds[1:]))
    )
    forbidden = tuple((labels[i], labels[j]) for i in range(n) for j in range(n) if not adj[i, j])
    return RftSpec(classes, EdgeDecl(COMPLETE, frozenset(), forbidden), labels[0])
