"""Follower/leader partition of the vertex set and the quotient graph.

Every vertex of a spec belongs to one *item*: an explicitly named vertex
(a finite-class vertex, or a family member referred to by ``forbid`` or
``root``) or the *tail* of a family, i.e. all of its members that are not
named.  Edges between items are all-or-nothing because forbidden pairs
only touch named vertices, so the follower and leader sets of a vertex are
unions of items and can be compared exactly.  Grouping items by these two
signatures gives the coarsest partition on which both are constant.

The quotient graph for a root ``w`` splits ``w`` off its block and orders
the remaining classes in three bands:

1. classes missing at least one outgoing edge (``ell`` of them),
2. classes with every outgoing edge but missing some incoming edge,
3. the class (at most one) with all incoming and outgoing edges.
"""
from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .series import (
    DEFAULT_TOL,
    ZERO_VALUE,
    RadiusEstimate,
    SeriesValue,
    family_series,
    min_radius,
)
from .spec import RftSpec, SpecError


class GraphError(SpecError):
    """The described graph is not a connected countable Markov graph."""


class RftError(SpecError):
    """The partition cannot be made finite (defensive check)."""


@dataclass(frozen=True)
class FamilyTail:
    """The members of a family that are not named individually."""

    family: object  # FamilyClass
    excluded: tuple = ()

    @property
    def start(self) -> int:
        k = self.family.k0
        while k in self.excluded:
            k += 1
        return k

    def describe(self) -> str:
        k = self.start
        rest = sorted(e for e in self.excluded if e > k)
        text = f"{self.family.name}[k>={k}"
        if rest:
            text += ", k not in {" + ", ".join(map(str, rest)) + "}"
        return text + "]"

    def sum(self, x: float, tol: float, strict: bool = True) -> SeriesValue:
        fam = self.family
        fs = family_series(fam.k0, fam.height, fam.mult)
        total = fs.sum(x, tol, strict=strict)
        if not self.excluded or x == 0:
            return total
        named = math.fsum(x ** fam.height_at(k) for k in self.excluded)
        return SeriesValue(max(total.value - named, 0.0), total.tail_bound)

    @property
    def radius(self) -> RadiusEstimate:
        fam = self.family
        return family_series(fam.k0, fam.height, fam.mult).radius


@dataclass(frozen=True)
class Item:
    cls: str            # name of the declared class
    label: str | None   # vertex label for named vertices
    tail: FamilyTail | None = None

    def describe(self) -> str:
        return self.label if self.label is not None else self.tail.describe()


@dataclass(frozen=True)
class Block:
    """A class of the partition: named vertices plus family tails."""

    labels: tuple
    tails: tuple = ()

    @property
    def is_finite(self) -> bool:
        return not self.tails

    def describe(self) -> str:
        parts = []
        if self.labels:
            parts.append("{" + ", ".join(self.labels) + "}")
        parts.extend(t.describe() for t in self.tails)
        return " + ".join(parts)

    def key(self) -> frozenset:
        """Order-free identity: labels and tail descriptions."""
        return frozenset(self.labels) | frozenset(t.describe() for t in self.tails)


def _items(spec: RftSpec) -> list[Item]:
    named = spec.named_members()
    items = []
    for c in spec.classes:
        if c.is_finite:
            items.extend(Item(c.name, label) for label in c.labels)
        else:
            ks = named.get(c.name, [])
            items.extend(Item(c.name, c.member_label(k)) for k in ks)
            items.append(Item(c.name, None, FamilyTail(c, tuple(ks))))
    return items


def _item_adjacency(spec: RftSpec, items: list[Item]) -> np.ndarray:
    n = len(items)
    adj = np.zeros((n, n), dtype=bool)
    forbidden = spec.edges.forbidden_set
    for i, a in enumerate(items):
        for j, b in enumerate(items):
            if not spec.class_edge(a.cls, b.cls):
                continue
            if a.label is not None and b.label is not None and (a.label, b.label) in forbidden:
                continue
            adj[i, j] = True
    return adj


def _check_connected(items: list[Item], adj: np.ndarray) -> None:
    n = len(items)
    ncomp, _ = connected_components(csr_matrix(adj), directed=True, connection="strong")
    if ncomp > 1:
        raise GraphError("graph is not strongly connected")
    if n == 1 and not adj[0, 0]:
        raise GraphError("graph has no edges")


def _blocks_from_items(items, adj) -> tuple[list[Block], list[list[int]]]:
    groups: dict = {}
    order = []
    for i in range(len(items)):
        sig = (adj[i].tobytes(), adj[:, i].tobytes())
        if sig not in groups:
            groups[sig] = []
            order.append(sig)
        groups[sig].append(i)
    members = [groups[s] for s in order]
    blocks = []
    for idx in members:
        labels = tuple(items[i].label for i in idx if items[i].label is not None)
        tails = tuple(items[i].tail for i in idx if items[i].tail is not None)
        blocks.append(Block(labels, tails))
    return blocks, members


def refine_partition(spec: RftSpec) -> list[Block]:
    """Coarsest partition with constant follower and leader sets.

    Blocks are listed in order of their first vertex in the declaration.

    Raises
    ------
    GraphError
        If the graph is not strongly connected.
    """
    items = _items(spec)
    adj = _item_adjacency(spec, items)
    _check_connected(items, adj)
    blocks, _ = _blocks_from_items(items, adj)
    return blocks


@dataclass(frozen=True)
class QuotientGraph:
    """Quotient of the graph by the root-refined partition.

    Class 0 is ``{root}``; ``adjacency[i, j]`` says every vertex of class
    ``i`` has an edge to every vertex of class ``j``.  Classes
    ``1..ell`` miss some outgoing edge, ``ell+1..m`` have all of them.
    """

    spec: RftSpec
    root: str
    classes: tuple          # Blocks, index 0 is {root}
    adjacency: tuple        # tuple of tuples of bool
    bands: tuple            # band number (1, 2, 3) per class; 0 for the root
    ell: int

    @property
    def m(self) -> int:
        return len(self.classes) - 1

    @property
    def adj(self) -> np.ndarray:
        return np.array(self.adjacency, dtype=bool).reshape(self.m + 1, self.m + 1)

    def followers(self, i: int) -> frozenset:
        return frozenset(j for j, e in enumerate(self.adjacency[i]) if e)

    def leaders(self, i: int) -> frozenset:
        return frozenset(j for j in range(self.m + 1) if self.adjacency[j][i])

    @property
    def root_height(self) -> float:
        return self.spec.height_of(self.root)

    def alpha(self, i: int, x: float, tol: float = DEFAULT_TOL, strict: bool = True) -> SeriesValue:
        """Class series ``sum_{v in V_i} x^f(v)``."""
        block = self.classes[i]
        if x == 0:
            return ZERO_VALUE
        named = math.fsum(x ** self.spec.height_of(lab) for lab in block.labels)
        total = SeriesValue(named, 0.0)
        for tail in block.tails:
            total = total + tail.sum(x, tol / max(len(block.tails), 1), strict)
        return total

    def alphas(self, x: float, tol: float = DEFAULT_TOL, strict: bool = True) -> list[SeriesValue]:
        n = self.m + 1
        return [self.alpha(i, x, tol / n, strict) for i in range(n)]

    @property
    def radius(self) -> RadiusEstimate:
        """Radius of convergence of the full vertex series."""
        return min_radius(t.radius for b in self.classes for t in b.tails)

    def describe(self) -> list[str]:
        return [b.describe() for b in self.classes]


def build_quotient(spec: RftSpec, root: str | None = None) -> QuotientGraph:
    """Build the quotient graph rooted at a named vertex.

    Raises
    ------
    SpecError
        If ``root`` does not name a single vertex.
    GraphError
        If the graph is not strongly connected.
    """
    root = spec.default_root if root is None else root
    if root != spec.root:
        spec = spec.with_root(root)
    try:
        spec.resolve(root)
    except KeyError:
        raise SpecError(f"root {root!r} is not a named vertex") from None
    items = _items(spec)
    adj = _item_adjacency(spec, items)
    _check_connected(items, adj)
    blocks, members = _blocks_from_items(items, adj)
    root_item = next(i for i, it in enumerate(items) if it.label == root)

    # split the root off its block
    groups = []
    for idx in members:
        if root_item in idx:
            groups.insert(0, [root_item])
            rest = [i for i in idx if i != root_item]
            if rest:
                groups.append(rest)
        else:
            groups.append(idx)
    k = len(groups)
    cadj = np.zeros((k, k), dtype=bool)
    for a, ga in enumerate(groups):
        for b, gb in enumerate(groups):
            cadj[a, b] = adj[ga[0], gb[0]]

    full_out = cadj.all(axis=1)
    full_in = cadj.all(axis=0)
    band = np.where(~full_out, 1, np.where(~full_in, 2, 3))
    order = [0] + sorted(range(1, k), key=lambda i: (band[i], i))
    if np.count_nonzero(band[1:] == 3) > 1:
        raise RftError("more than one class with all edges")  # cannot happen after merging
    groups = [groups[i] for i in order]
    cadj = cadj[np.ix_(order, order)]
    bands = (0,) + tuple(int(band[i]) for i in order[1:])

    classes = []
    for g in groups:
        labels = tuple(items[i].label for i in g if items[i].label is not None)
        tails = tuple(items[i].tail for i in g if items[i].tail is not None)
        classes.append(Block(labels, tails))
    return QuotientGraph(
        spec=spec,
        root=root,
        classes=tuple(classes),
        adjacency=tuple(tuple(bool(v) for v in row) for row in cadj),
        bands=bands,
        ell=sum(1 for b in bands if b == 1),
    )


def tree_level_check(q: QuotientGraph) -> tuple[dict, bool]:
    """Breadth-first levels of the quotient classes from the root class.

    Returns the first BFS level (root at 0) at which each class appears and
    whether every class appears by tree level ``m - k + 2``, where tree
    levels count the root as level 1 and ``k`` is the number of non-root
    classes following the root.
    """
    adj = q.adj
    levels = {0: 0}
    queue = deque([0])
    while queue:
        i = queue.popleft()
        for j in np.flatnonzero(adj[i]):
            j = int(j)
            if j not in levels:
                levels[j] = levels[i] + 1
                queue.append(j)
    k = int(np.count_nonzero(adj[0, 1:]))
    bound = q.m - k + 2
    ok = len(levels) == q.m + 1 and all(lv + 1 <= bound for lv in levels.values())
    return levels, ok
