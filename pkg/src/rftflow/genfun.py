"""Generating function of simple root-cycles on the quotient graph.

For ``x`` in the domain, the path-counting functions ``A_i(x)`` (sum over
paths from class ``i`` to the root that avoid the root in between) solve
the linear system ``M(x) A = -b`` with

    M_ij = alpha_i(x) [i -> j] - delta_ij,      b_i = alpha_i(x) [i -> 0],

over the non-root classes, and the cycle generating function is
``phi(x) = alpha_00 + sum_j alpha_0 [0 -> j] A_j``.

Three further evaluators of the same quantity are provided for
cross-checking: block elimination of the classes that have every outgoing
edge (:func:`phi_closed_form`), a vertex-level version for complete graphs
with finitely many edges removed (:func:`phi_local_perturbation`) and the
one-line formula for complete graphs (:func:`phi_bernoulli`).
"""
from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import linalg

from .quotient import QuotientGraph
from .series import DEFAULT_TOL, SeriesDivergence, alpha
from .spec import COMPLETE, RftSpec

SINGULAR_RTOL = 1e-14


class Status(str, enum.Enum):
    IN_DOMAIN = "InDomain"
    SINGULAR = "SingularAtOrBefore"
    BEYOND_RADIUS = "BeyondSeriesRadius"


class DomainError(ArithmeticError):
    """The requested evaluator is not valid at this point."""


class NotLocalPerturbation(ValueError):
    """The graph is not a complete graph minus finitely many edges."""


@dataclass(frozen=True)
class WeightedSystem:
    """Class series at one ``x`` arranged as the linear system ``M A = -b``."""

    x: float
    alpha: tuple            # SeriesValue per class, index 0 is the root
    adjacency: np.ndarray   # (m+1) x (m+1) bool

    @property
    def m(self) -> int:
        return len(self.alpha) - 1

    def values(self, upper: bool = False) -> np.ndarray:
        return np.array([a.upper if upper else a.value for a in self.alpha])

    def alpha_matrix(self, upper: bool = False) -> np.ndarray:
        """``alpha_ij = alpha_i`` on edges of the quotient graph, 0 elsewhere."""
        a = self.values(upper)
        return a[:, None] * self.adjacency

    def matrix(self, upper: bool = False) -> np.ndarray:
        return self.alpha_matrix(upper)[1:, 1:] - np.eye(self.m)

    def rhs(self, upper: bool = False) -> np.ndarray:
        return -self.alpha_matrix(upper)[1:, 0]


@dataclass(frozen=True)
class GenFunEval:
    x: float
    phi: float
    A: tuple
    detM: float
    status: Status
    phi_upper: float = math.nan     # phi with every class series at its upper bound

    @property
    def in_domain(self) -> bool:
        return self.status is Status.IN_DOMAIN


def assemble(q: QuotientGraph, x: float, tol: float = DEFAULT_TOL, strict: bool = True) -> WeightedSystem:
    """Evaluate every class series at ``x``."""
    if x < 0:
        raise ValueError("x must be non-negative")
    return WeightedSystem(x, tuple(q.alphas(x, tol, strict)), q.adj)


def _lu_det(mat: np.ndarray):
    """LU factors and determinant; ``None`` factors when numerically singular."""
    n = mat.shape[0]
    if n == 0:
        return None, 1.0
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", linalg.LinAlgWarning)
        lu, piv = linalg.lu_factor(mat, check_finite=True)
    sign = (-1.0) ** np.count_nonzero(piv != np.arange(n))
    det = float(sign * np.prod(np.diag(lu)))
    scale = float(np.prod(np.maximum(np.linalg.norm(mat, axis=1), 1e-300)))
    if abs(det) <= SINGULAR_RTOL * scale:
        return None, det
    return (lu, piv), det


def _phi_from(sys: WeightedSystem, upper: bool):
    mat = sys.matrix(upper)
    factors, det = _lu_det(mat)
    m = sys.m
    a0 = sys.values(upper)[0]
    adj0 = sys.adjacency[0]
    alpha00 = a0 if adj0[0] else 0.0
    if m == 0:
        return alpha00, np.zeros(0), 1.0
    if factors is None:
        return math.nan, np.full(m, math.nan), det
    A = linalg.lu_solve(factors, sys.rhs(upper))
    phi = alpha00 + a0 * float(np.dot(adj0[1:], A))
    return phi, A, det


def is_valid_solution(m: int, det: float, A: np.ndarray, x: float) -> bool:
    """Below the first singular point: ``det M`` keeps the sign of ``det M(0)``
    and the path sums are positive."""
    if not math.isfinite(det) or det == 0 or np.any(~np.isfinite(A)):
        return False
    if math.copysign(1.0, det) != (-1.0) ** m:
        return False
    return x == 0 or bool(np.all(A > 0))


def solve_phi(q: QuotientGraph, x: float, tol: float = DEFAULT_TOL, strict: bool = True) -> GenFunEval:
    """Evaluate ``phi`` by solving the linear system at ``x``.

    The status is ``BeyondSeriesRadius`` when a class series diverges at
    ``x`` (or ``x >= 1`` with infinitely many vertices) and
    ``SingularAtOrBefore`` when ``M`` is singular at ``x`` or the solution
    is not the positive branch, meaning ``x`` is at or past the first
    singular point.  With ``strict=False`` class series whose tail bound
    cannot reach ``tol`` are accepted (used at the radius itself).
    """
    if x < 0:
        raise ValueError("x must be non-negative")
    if x > 1 or (x == 1 and not q.spec.is_finite):
        return GenFunEval(x, math.inf, (), math.nan, Status.BEYOND_RADIUS)
    try:
        sys = assemble(q, x, tol, strict)
    except SeriesDivergence:
        return GenFunEval(x, math.inf, (), math.nan, Status.BEYOND_RADIUS)
    phi, A, det = _phi_from(sys, upper=False)
    if not is_valid_solution(sys.m, det, A, x):
        return GenFunEval(x, math.inf, tuple(A), det, Status.SINGULAR)
    phi_up, A_up, det_up = _phi_from(sys, upper=True)
    if not is_valid_solution(sys.m, det_up, A_up, x):
        phi_up = math.inf
    return GenFunEval(x, float(phi), tuple(float(a) for a in A), det, Status.IN_DOMAIN, float(phi_up))


# -- block elimination --------------------------------------------------------

@dataclass(frozen=True)
class ClosedFormParts:
    """Ingredients of the block-eliminated formula for ``phi``.

    ``C`` is the leading ``ell x ell`` block of ``M`` (classes missing an
    outgoing edge).  The other classes have all outgoing edges, so their
    path sums are ``alpha_k * S`` with ``S = 1 + sum_j A_j``; solving for
    ``S`` gives ``S = (1 + sigma) / denominator``.
    """

    ell: int
    C: np.ndarray
    zeta: float             # band-2 class series
    alpha_m: float          # band-3 class series (0 if there is none)
    F: np.ndarray           # per band-1 class: series of its band-2/3 followers
    F_root: float           # the same for the root
    alpha_H: float          # band-1 path sums weighted by full-edge followers, from the root
    alpha_H_tilde: float    # the same summed over all band-1 classes
    sigma: float            # band-1 path sums into the root
    phi_tilde: float        # root cycles through band-1 classes only

    @property
    def denominator(self) -> float:
        return 1.0 - self.zeta - self.alpha_m - self.alpha_H_tilde


def closed_form_parts(q: QuotientGraph, x: float, tol: float = DEFAULT_TOL,
                      system: WeightedSystem | None = None) -> ClosedFormParts:
    sys = system if system is not None else assemble(q, x, tol)
    ell, m = q.ell, q.m
    a = sys.values()
    adj = sys.adjacency
    band = np.array(q.bands)
    full = band >= 2                                  # classes with every out-edge
    C = sys.matrix()[:ell, :ell]
    F = np.array([float(np.dot(adj[i, 1:] & full[1:], a[1:])) for i in range(1, ell + 1)])
    F_root = float(np.dot(adj[0, 1:] & full[1:], a[1:]))
    zeta = float(a[band == 2].sum())
    alpha_m = float(a[band == 3].sum())
    first = adj[0, 1:ell + 1]
    if ell:
        if _lu_det(C)[0] is None:
            raise DomainError("leading block is singular")
        y = linalg.solve(C, -a[1:ell + 1] * F)
        z = linalg.solve(C, -a[1:ell + 1] * adj[1:ell + 1, 0])
    else:
        y = z = np.zeros(0)
    alpha00 = a[0] if adj[0, 0] else 0.0
    return ClosedFormParts(
        ell=ell,
        C=C,
        zeta=zeta,
        alpha_m=alpha_m,
        F=F,
        F_root=F_root,
        alpha_H=float(np.dot(first, y)),
        alpha_H_tilde=float(y.sum()),
        sigma=float(z.sum()),
        phi_tilde=float(a[0] * np.dot(first, z) + alpha00),
    )


def phi_closed_form(q: QuotientGraph, x: float, tol: float = DEFAULT_TOL) -> float:
    """``phi`` by eliminating the classes that have every outgoing edge.

    Raises
    ------
    DomainError
        If the leading block is singular or the denominator
        ``1 - zeta - alpha_m - alpha_H_tilde`` is not positive.
    """
    if x == 0:
        return 0.0
    p = closed_form_parts(q, x, tol)
    den = p.denominator
    if not den > 0:
        raise DomainError(f"denominator {den:.6g} is not positive at x={x!r}")
    a0 = x ** q.root_height
    return a0 * (p.F_root + p.alpha_H) * (1.0 + p.sigma) / den + p.phi_tilde


def determinant_identity(q: QuotientGraph, x: float, tol: float = DEFAULT_TOL) -> tuple[float, float]:
    """Both sides of ``det M / ((-1)^(m-ell) det C) = 1 - zeta - alpha_m - alpha_H_tilde``."""
    sys = assemble(q, x, tol)
    p = closed_form_parts(q, x, tol, system=sys)
    det_m = float(np.linalg.det(sys.matrix())) if q.m else 1.0
    det_c = float(np.linalg.det(p.C)) if q.ell else 1.0
    lhs = det_m / ((-1.0) ** (q.m - q.ell) * det_c)
    return lhs, p.denominator


# -- vertex-level forms -------------------------------------------------------

def phi_bernoulli(spec: RftSpec, x: float, root: str | None = None, tol: float = DEFAULT_TOL) -> float:
    """``x^f(w) / (1 + x^f(w) - F(x))`` for a complete graph (no forbidden edges)."""
    if spec.edges.mode != COMPLETE or spec.edges.forbidden:
        raise NotLocalPerturbation("graph is not complete")
    root = spec.default_root if root is None else root
    if x == 0:
        return 0.0
    aw = x ** spec.height_of(root)
    den = 1.0 + aw - _total_series(spec, x, tol)
    if not den > 0:
        raise DomainError(f"denominator {den:.6g} is not positive at x={x!r}")
    return aw / den


def _total_series(spec: RftSpec, x: float, tol: float) -> float:
    n = len(spec.classes)
    return math.fsum(alpha(c, x, tol / n).value for c in spec.classes)


def phi_local_perturbation(spec: RftSpec, x: float, root: str | None = None,
                           tol: float = DEFAULT_TOL) -> float:
    """``phi`` for a complete graph with a finite set ``D`` of edges removed.

    Works at vertex level: with ``U`` the sources of removed edges together
    with the root, path sums through ``U`` minus the root are given by the
    resolvent ``(I - B)^-1`` of the weighted adjacency ``B`` on that finite
    set, and every other vertex has all outgoing edges.

    Raises
    ------
    NotLocalPerturbation
        For graphs declared with class pairs.
    DomainError
        If the denominator is not positive.
    """
    if spec.edges.mode != COMPLETE:
        raise NotLocalPerturbation("graph is not a complete graph minus finitely many edges")
    root = spec.default_root if root is None else root
    if x == 0:
        return 0.0
    D = spec.edges.forbidden_set
    sources = list(dict.fromkeys(a for a, _ in spec.edges.forbidden))
    inner = [v for v in sources if v != root]                 # vertices of the reduced graph
    U = set(sources) | {root}
    xf = {v: x ** spec.height_of(v) for v in U | {b for _, b in D}}
    total = _total_series(spec, x, tol)
    mass_U = math.fsum(xf[v] for v in U)

    def outside_followers(v):
        # series of the followers of v that lie outside U
        return total - mass_U - math.fsum(xf[z] for (u, z) in D if u == v and z not in U)

    n = len(inner)
    B = np.array([[xf[v] if (v, u) not in D else 0.0 for u in inner] for v in inner]).reshape(n, n)
    beta = linalg.inv(np.eye(n) - B) if n else np.zeros((0, 0))
    weight_F = np.array([xf[v] * outside_followers(v) for v in inner])
    into_root = np.array([xf[v] if (v, root) not in D else 0.0 for v in inner])
    from_root = np.array([(root, v) not in D for v in inner], dtype=float)

    alpha_inner = beta @ weight_F if n else np.zeros(0)     # per starting vertex
    sigma = float((beta @ into_root).sum()) if n else 0.0
    aw = xf[root]
    alpha00 = aw if (root, root) not in D else 0.0
    phi_reduced = aw * float(from_root @ (beta @ into_root)) + alpha00 if n else alpha00
    den = 1.0 + mass_U - total - float(alpha_inner.sum())
    if not den > 0:
        raise DomainError(f"denominator {den:.6g} is not positive at x={x!r}")
    F_root = outside_followers(root)
    return phi_reduced + aw * (F_root + float(from_root @ alpha_inner)) * (1.0 + sigma) / den
