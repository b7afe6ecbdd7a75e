"""Entropy of the special flow and the maximal-entropy-measure verdict.

With ``phi`` the generating function of simple root-cycles, the entropy is
``h = -ln x_hat`` where ``x_hat = sup{x : phi(x) <= 1}``.  ``phi`` is
increasing from ``phi(0) = 0`` and finite below ``r(phi)``, the first
singular point of ``M(x)`` (or the radius of the vertex series when there
is none).  So either ``phi`` crosses 1 below ``r(phi)``, in which case a
measure of maximal entropy exists, or ``phi`` stays below 1 and
``x_hat = r(phi)``, in which case it does not.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .genfun import Status, solve_phi
from .quotient import QuotientGraph
from .series import DEFAULT_TOL, RadiusEstimate, SeriesError

SCAN_POINTS = 512
SCAN_TOL = 1e-8
X_TOL = 1e-13


class Mme(str, enum.Enum):
    EXISTS = "Exists"
    DOES_NOT_EXIST = "DoesNotExist"
    UNDETERMINED = "Undetermined"


class InfiniteEntropy(ArithmeticError):
    """The vertex series diverges for every ``x > 0``."""


class ToleranceNotReached(ArithmeticError):
    """``phi`` could not be compared with 1 at the requested accuracy."""


@dataclass(frozen=True)
class EntropyReport:
    x_hat: float
    entropy: float
    r_F: RadiusEstimate
    x_tilde0: float | None
    r_phi: float
    phi_at_xhat: float
    mme: Mme
    path: str
    bracket: tuple          # (lo, hi) enclosing x_hat
    root: str


def _domain_cap(q: QuotientGraph) -> tuple[float, bool]:
    """Upper end of the x-range and whether it is a genuine radius."""
    r = q.radius
    if r.value == 0:
        raise InfiniteEntropy("the vertex series diverges for every x > 0")
    if r.value >= 1.0:
        return 1.0, False
    return r.value, True


def _valid(q: QuotientGraph, x: float, tol: float) -> bool:
    try:
        return solve_phi(q, x, tol, strict=False).status is Status.IN_DOMAIN
    except SeriesError:
        return False


def scan_grid(u: float, n: int = SCAN_POINTS) -> np.ndarray:
    """Uniform points on ``(0, u)`` followed by points accumulating at ``u``."""
    n_geo = min(n // 4, 40)
    uniform = u * np.arange(1, n - n_geo + 1) / (n - n_geo + 1)
    geometric = u * (1.0 - 2.0 ** -np.arange(1, n_geo + 1) / (n - n_geo + 1))
    return np.unique(np.concatenate([uniform, geometric]))


def first_singular_point(q: QuotientGraph, tol: float = DEFAULT_TOL, n: int = SCAN_POINTS,
                         xtol: float = X_TOL) -> float | None:
    """Smallest ``x`` below the series radius where ``M(x)`` becomes singular.

    The sign of ``det M`` and the positivity of the path sums are scanned
    on a grid; the first failure is refined by bisection.  Returns ``None``
    when ``M`` stays regular up to the radius (or up to 1).
    """
    u, _ = _domain_cap(q)
    if q.m == 0:
        return None
    lo = 0.0
    for x in scan_grid(u, n):
        if _valid(q, float(x), SCAN_TOL):
            lo = float(x)
            continue
        hi = float(x)
        while hi - lo > xtol * max(hi, 1e-300):
            mid = 0.5 * (lo + hi)
            if _valid(q, mid, tol):
                lo = mid
            else:
                hi = mid
        return hi
    if q.spec.is_finite and not _valid(q, 1.0, tol):
        # singular at exactly 1 for a finite graph
        return 1.0
    return None


def _compare(q: QuotientGraph, x: float, tol: float) -> bool | None:
    """Is ``phi(x) <= 1``?  ``None`` when the tail bounds straddle 1."""
    try:
        ev = solve_phi(q, x, tol, strict=False)
    except SeriesError:
        return None
    if ev.status is not Status.IN_DOMAIN:
        return False
    if ev.phi > 1.0:
        return False
    if ev.phi_upper <= 1.0:
        return True
    return None


def solve_entropy(q: QuotientGraph, tol: float = DEFAULT_TOL, xtol: float = X_TOL,
                  n: int = SCAN_POINTS) -> EntropyReport:
    """Compute ``x_hat``, the entropy and the maximal-measure verdict.

    Raises
    ------
    InfiniteEntropy
        If the vertex series has radius 0.
    ToleranceNotReached
        If ``phi`` cannot be compared with 1 at some bisection point.
    """
    u, is_radius = _domain_cap(q)
    r_F = q.radius
    x0 = first_singular_point(q, tol, n, xtol)
    r_phi = x0 if x0 is not None else u

    lo, hi = 0.0, r_phi
    mme = Mme.EXISTS        # phi blows up at a singular point or a divergent radius
    if x0 is None and not r_F.diverges_at_radius:
        at_cap = _compare(q, u, tol)
        if at_cap is not False:
            # phi stays at or below 1 on the whole domain
            lo = hi = u
            ev = solve_phi(q, u, tol, strict=False)
            if at_cap and is_radius and ev.phi_upper < 1.0 - tol:
                mme = Mme.DOES_NOT_EXIST
            elif not is_radius and abs(ev.phi - 1.0) <= tol:
                mme = Mme.EXISTS
            else:
                mme = Mme.UNDETERMINED
    while hi - lo > xtol * hi:
        mid = 0.5 * (lo + hi)
        verdict = _compare(q, mid, tol)
        if verdict is None:
            raise ToleranceNotReached(f"phi({mid!r}) cannot be separated from 1")
        if verdict:
            lo = mid
        else:
            hi = mid
    if mme is Mme.EXISTS and x0 is None and is_radius and hi >= u * (1.0 - 1e-9):
        mme = Mme.UNDETERMINED

    x_hat = 0.5 * (lo + hi)
    ev = solve_phi(q, x_hat, tol, strict=False)
    if not ev.in_domain:
        ev = solve_phi(q, lo, tol, strict=False)
    return EntropyReport(
        x_hat=x_hat,
        entropy=-math.log(x_hat),
        r_F=r_F,
        x_tilde0=x0,
        r_phi=r_phi,
        phi_at_xhat=ev.phi,
        mme=mme,
        path="linear-system",
        bracket=(lo, hi),
        root=q.root,
    )


def mme_verdict(report: EntropyReport) -> Mme:
    return report.mme
