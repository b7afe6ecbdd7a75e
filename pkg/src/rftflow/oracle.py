"""Brute-force cycle counting on a finite truncation of the graph.

The truncation keeps every named vertex and the first ``N`` indices of each
family (each index with its multiplicity).  Counting root-cycles of length
at most ``L`` on it gives a polynomial-like lower bound for the generating
function that does not use the quotient graph at all.
"""
from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass

import numpy as np

from .spec import RftSpec

QUANTUM = 1e-12
MAX_ENTRIES = 5_000_000


class BudgetExceeded(RuntimeError):
    """The enumeration would exceed its bookkeeping budget."""


@dataclass(frozen=True)
class TruncatedGraph:
    labels: tuple
    heights: np.ndarray
    copies: np.ndarray          # number of identical vertices behind each label
    adjacency: np.ndarray       # bool

    def index(self, label: str) -> int:
        return self.labels.index(label)


def truncate(spec: RftSpec, n: int = 10) -> TruncatedGraph:
    """Named vertices plus the first ``n`` indices of every family.

    Family indices with multiplicity 0 are skipped.  Named family members
    keep their own label; their index still counts towards ``n``.
    """
    named = spec.named_members()
    labels, heights, copies, classes = [], [], [], []
    for c in spec.classes:
        if c.is_finite:
            for label, h in zip(c.labels, c.heights()):
                labels.append(label)
                heights.append(h)
                copies.append(1)
                classes.append(c.name)
            continue
        for k in range(c.k0, c.k0 + n):
            m = c.mult_at(k)
            if m == 0:
                continue
            if k in named.get(c.name, ()):
                m = 1
            labels.append(c.member_label(k))
            heights.append(c.height_at(k))
            copies.append(m)
            classes.append(c.name)
    forbidden = spec.edges.forbidden_set
    size = len(labels)
    adj = np.zeros((size, size), dtype=bool)
    for i in range(size):
        for j in range(size):
            adj[i, j] = spec.class_edge(classes[i], classes[j]) and (labels[i], labels[j]) not in forbidden
    return TruncatedGraph(tuple(labels), np.array(heights), np.array(copies, dtype=object), adj)


@dataclass(frozen=True)
class CyclePoly:
    """Counts of root-cycles by total height, kept separately per length.

    ``by_length[n - 1]`` maps a bucketed weight ``round(f*/quantum)`` to the
    number of cycles of length ``n`` with that weight.
    """

    by_length: tuple
    quantum: float = QUANTUM

    @property
    def max_len(self) -> int:
        return len(self.by_length)

    @property
    def terms(self) -> dict:
        """Weight -> count over all lengths."""
        total: Counter = Counter()
        for layer in self.by_length:
            for b, c in layer.items():
                total[b * self.quantum] += c
        return dict(total)

    def counts_by_length(self) -> list[int]:
        return [sum(layer.values()) for layer in self.by_length]

    def __bool__(self) -> bool:
        return any(self.by_length)


def enumerate_cycles(tg: TruncatedGraph, root: str, max_len: int,
                     max_entries: int = MAX_ENTRIES, quantum: float = QUANTUM) -> CyclePoly:
    """All paths ``root -> root`` of length ``<= max_len`` avoiding the root inside.

    Interior vertices may repeat.  Paths are counted exactly by dynamic
    programming over (current vertex, accumulated weight).

    Raises
    ------
    BudgetExceeded
        If more than ``max_entries`` distinct (vertex, weight) states would
        be held at once.
    """
    if max_len < 1:
        raise ValueError("max_len must be at least 1")
    w = tg.index(root)
    if tg.copies[w] != 1:
        raise ValueError("root must be a single vertex")
    qh = [int(round(h / quantum)) for h in tg.heights]
    n = len(tg.labels)
    succ = [[j for j in np.flatnonzero(tg.adjacency[i]) if j != w] for i in range(n)]
    back = tg.adjacency[:, w]

    layers = []
    # state: vertex -> Counter(weight accumulated before leaving the vertex -> count)
    first = Counter({qh[w]: 1}) if tg.adjacency[w, w] else Counter()
    layers.append(dict(first))
    current = {j: Counter({qh[w]: int(tg.copies[j])}) for j in succ[w]}
    for _ in range(2, max_len + 1):
        closing: Counter = Counter()
        nxt: dict = {}
        entries = 0
        for v, dist in current.items():
            hv = qh[v]
            moved = Counter({b + hv: c for b, c in dist.items()})
            if back[v]:
                closing.update(moved)
            for u in succ[v]:
                target = nxt.setdefault(u, Counter())
                mu = int(tg.copies[u])
                for b, c in moved.items():
                    target[b] += c * mu
        entries = sum(len(d) for d in nxt.values())
        if entries > max_entries:
            raise BudgetExceeded(f"{entries} weight states exceed the budget {max_entries}")
        layers.append(dict(closing))
        current = nxt
    return CyclePoly(tuple(layers), quantum)


def phi_truncated(poly: CyclePoly, x: float, max_len: int | None = None) -> float:
    """``sum count * x^weight`` over cycles of length at most ``max_len``."""
    if x == 0:
        return 0.0
    lx = math.log(x)
    layers = poly.by_length if max_len is None else poly.by_length[:max_len]
    return math.fsum(
        float(c) * math.exp(b * poly.quantum * lx) for layer in layers for b, c in layer.items()
    )
