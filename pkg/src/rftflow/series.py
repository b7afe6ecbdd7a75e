"""Vertex series ``sum_v x^f(v)`` with truncation-error bounds.

Finite classes are summed exactly.  An infinite family contributes
``sum_{k >= k0} m(k) x^g(k)`` and is evaluated by, in order of preference,

1. a closed form when ``g`` is exactly affine in ``k`` (geometric series) or
   in ``ln k`` (Hurwitz zeta) and ``m`` is a constant,
2. direct summation with a geometric tail bound from the eventual ratio
   ``t(k+1)/t(k) <= q < 1``,
3. direct summation with a power-law tail bound ``C k^-s``, ``s > 1``, when
   the asymptotic expansion says the terms decay polynomially (this is what
   makes evaluation *at* the radius of convergence possible).

The ratio and power bounds are verified numerically over a window of
terms, so they are rigorous only up to that numerical check and floating
point rounding.
"""
from __future__ import annotations

import functools
import math
import threading
from dataclasses import dataclass

import numpy as np
from scipy import special

from . import asymptotics as asy
from .asymptotics import ZERO as ZERO_ORDER
from .expr import ExprDomainError, evaluate_array, log_evaluate_array

DEFAULT_TOL = 1e-12
MAX_TERMS = 1 << 22
_WINDOW = 64


class SeriesError(ArithmeticError):
    """A class series could not be evaluated to the requested accuracy."""


class SeriesDivergence(SeriesError):
    """The series diverges at the requested point."""


class TailBoundError(SeriesError):
    """No tail bound within tolerance was found inside the term budget."""


@dataclass(frozen=True)
class SeriesValue:
    """A truncated series: the true sum lies in ``[value, value + tail_bound]``."""

    value: float
    tail_bound: float = 0.0

    @property
    def upper(self) -> float:
        return self.value + self.tail_bound

    def __add__(self, other: "SeriesValue") -> "SeriesValue":
        return SeriesValue(self.value + other.value, self.tail_bound + other.tail_bound)

    def __radd__(self, other):
        if other == 0:
            return self
        return NotImplemented


ZERO_VALUE = SeriesValue(0.0, 0.0)


@dataclass(frozen=True)
class RadiusEstimate:
    """Bracket ``lower <= r <= upper`` for a radius of convergence.

    ``exact`` is filled in when the radius is known analytically, and
    ``converges_at_radius`` records whether the series is finite at ``r``
    itself (``None`` when unknown or when ``r`` is infinite).
    """

    lower: float
    upper: float
    exact: float | None = None
    converges_at_radius: bool | None = None

    @property
    def value(self) -> float:
        return self.exact if self.exact is not None else self.lower

    @property
    def diverges_at_radius(self) -> bool:
        return self.exact is not None and self.converges_at_radius is False

    def cap(self) -> float:
        """The effective upper end of the x-domain, ``min(r, 1)``."""
        return min(self.value, 1.0)


INFINITE_RADIUS = RadiusEstimate(math.inf, math.inf, math.inf, None)


def min_radius(radii) -> RadiusEstimate:
    radii = list(radii)
    if not radii:
        return INFINITE_RADIUS
    lower = min(r.lower for r in radii)
    upper = min(r.upper for r in radii)
    if all(r.exact is not None for r in radii):
        exact = min(r.exact for r in radii)
        at = [r.converges_at_radius for r in radii if r.exact == exact]
        conv = False if False in at else (None if None in at else True)
        return RadiusEstimate(exact, exact, exact, conv if math.isfinite(exact) else None)
    return RadiusEstimate(lower, upper, None, None)


class FamilySeries:
    """Numerical evaluator for ``sum_{k >= k0} m(k) x^g(k)``.

    Instances cache the per-index arrays ``ln m(k)`` and ``g(k)`` (they do
    not depend on ``x``), so repeated evaluation on an x-grid is cheap.
    """

    def __init__(self, k0: int, height, mult=None):
        self.k0 = int(k0)
        self.height = height
        self.mult = mult
        self._lock = threading.Lock()
        self._ks = np.empty(0)
        self._logm = np.empty(0)
        self._g = np.empty(0)
        self._analyse()

    # -- analysis -------------------------------------------------------------
    def _analyse(self) -> None:
        self.height_exp = self.mult_log_exp = None
        self.closed_form = None
        try:
            self.height_exp = asy.expand(self.height)
            self.mult_log_exp = (
                asy.Expansion() if self.mult is None else asy.expand_log(self.mult)
            )
        except (asy.NotExpandable, ExprDomainError, OverflowError, ZeroDivisionError):
            self.height_exp = self.mult_log_exp = None
        mult_const = self._constant_multiplicity()
        h = self.height_exp
        if h is not None and h.exact and mult_const is not None:
            orders = {o for o, c in h.terms.items() if c != 0}
            slope = h.coef((1.0, 0, 0))
            logc = h.coef(asy.LN_K)
            if orders <= {(1.0, 0, 0), asy.ZERO} and slope > 0:
                self.closed_form = ("geometric", slope, h.coef(asy.ZERO), mult_const)
            elif orders <= {asy.LN_K, asy.ZERO} and logc > 0:
                self.closed_form = ("hurwitz", logc, h.coef(asy.ZERO), mult_const)
        self.radius = self._radius()

    def _constant_multiplicity(self) -> float | None:
        if self.mult is None:
            return 1.0
        try:
            e = asy.expand(self.mult)
        except (asy.NotExpandable, ExprDomainError):
            return None
        if e.exact and set(e.terms) <= {asy.ZERO}:
            c = e.coef(asy.ZERO)
            if c >= 0 and float(c).is_integer():
                return c
        return None

    def _radius(self) -> RadiusEstimate:
        if self.height_exp is not None:
            try:
                lam, at = asy.critical_log_x(self.mult_log_exp, self.height_exp)
            except asy.NotExpandable:
                pass
            else:
                r = math.exp(lam)
                return RadiusEstimate(r, r, r, at if lam < 0 else None)
        return self._probe_radius()

    def _probe_radius(self) -> RadiusEstimate:
        """Bracket the radius from the decay slope of ln t(k) against ln k."""
        ks = np.array([1e4, 1e5, 1e6]) + self.k0
        logm = self._log_mult(ks)
        g = evaluate_array(self.height, ks)

        def verdict(x):
            lt = logm + math.log(x) * g
            slope = (lt[2] - lt[1]) / math.log(ks[2] / ks[1])
            if slope < -1.05:
                return True
            if slope > -0.95:
                return False
            return None

        lo, hi = 0.0, 1.0
        if verdict(1.0 - 1e-9):
            return RadiusEstimate(1.0, 1.0, None, None)
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            v = verdict(mid)
            if v is None:
                break
            if v:
                lo = mid
            else:
                hi = mid
        return RadiusEstimate(lo, hi, None, None)

    # -- per-index arrays -----------------------------------------------------
    def _log_mult(self, ks: np.ndarray) -> np.ndarray:
        if self.mult is None:
            return np.zeros_like(ks)
        plain = evaluate_array(self.mult, ks)
        small = np.isfinite(plain) & (np.abs(plain) < 2.0 ** 53)
        bad = small & ((plain < 0) | (plain != np.floor(plain)))
        if np.any(bad):
            k = int(ks[np.flatnonzero(bad)[0]])
            raise ExprDomainError("multiplicity is not a non-negative integer", k)
        return log_evaluate_array(self.mult, ks)

    def _arrays(self, n: int):
        with self._lock:
            have = self._ks.size
            if have < n:
                target = max(n, 2 * have)
                ks = np.arange(self.k0 + have, self.k0 + target, dtype=float)
                g = evaluate_array(self.height, ks)
                if np.any(g <= 0):
                    k = int(ks[np.flatnonzero(g <= 0)[0]])
                    raise ExprDomainError("height is not positive", k)
                self._ks = np.concatenate([self._ks, ks])
                self._g = np.concatenate([self._g, g])
                self._logm = np.concatenate([self._logm, self._log_mult(ks)])
            return self._ks[:n], self._logm[:n], self._g[:n]

    def term(self, k: int, x: float) -> float:
        """The single term ``m(k) x^g(k)``."""
        ks, logm, g = self._arrays(k - self.k0 + 1)
        if x == 0:
            return 0.0
        return float(np.exp(logm[-1] + math.log(x) * g[-1]))

    # -- summation ------------------------------------------------------------
    def decay_exponent(self, x: float) -> float | None:
        """``s`` with terms ``~ k^-s`` at this ``x``, if the decay is polynomial."""
        if self.height_exp is None or x <= 0:
            return None
        t = self.mult_log_exp + self.height_exp.scale(math.log(x))
        if t.orders_above(asy.LN_K) or not t.known_above(asy.LNLN_K):
            return None
        return -t.coef(asy.LN_K)

    def limit_ratio(self, x: float) -> float | None:
        """Limit of ``t(k+1)/t(k)`` at this ``x`` from the asymptotic expansion."""
        if self.height_exp is None or x <= 0:
            return None
        t = self.mult_log_exp + self.height_exp.scale(math.log(x))
        top = t.orders_above(ZERO_ORDER)
        if not top or not t.known_above(top[0]):
            return None
        o, c = top[0], t.coef(top[0])
        if o > (1.0, 0, 0):
            return 0.0 if c < 0 else math.inf
        if o == (1.0, 0, 0):
            return math.exp(c)
        return 1.0

    def sum(self, x: float, tol: float = DEFAULT_TOL, *, max_terms: int = MAX_TERMS,
            strict: bool = True, method: str | None = None) -> SeriesValue:
        """Evaluate the family sum at ``x``.

        ``method`` forces ``"closed"`` or ``"direct"``; by default a closed
        form is used when available.  With ``strict=False`` a result whose
        tail bound exceeds ``tol`` is returned instead of raising.
        """
        if x < 0:
            raise ValueError("x must be non-negative")
        if x == 0:
            return ZERO_VALUE
        r = self.radius
        if r.exact is not None:
            if x > r.exact * (1 + 1e-14):
                raise SeriesDivergence(f"x={x!r} is beyond the radius {r.exact!r}")
            if x >= r.exact * (1 - 1e-14) and r.converges_at_radius is not True:
                raise SeriesDivergence(f"series diverges at its radius {r.exact!r}")
        if x >= 1.0 and self.closed_form is None:
            raise SeriesDivergence("x >= 1 with infinitely many vertices")
        if self.closed_form is not None and method != "direct":
            value = self._closed(x)
            if value is not None:
                return SeriesValue(value, 0.0)
        return self._direct(x, tol, max_terms, strict)

    def _closed(self, x: float) -> float | None:
        kind, a, d, c = self.closed_form
        lx = math.log(x)
        if kind == "geometric":
            q = math.exp(a * lx)
            if q >= 1.0:
                raise SeriesDivergence("geometric ratio >= 1")
            return c * math.exp((d + a * self.k0) * lx) / (1.0 - q)
        s = -a * lx
        if s <= 1.0:
            raise SeriesDivergence("Hurwitz exponent <= 1")
        return c * math.exp(d * lx) * float(special.zeta(s, self.k0))

    def _direct(self, x: float, tol: float, max_terms: int, strict: bool) -> SeriesValue:
        lx = math.log(x)
        s = self.decay_exponent(x)
        q_lim = self.limit_ratio(x)
        n = 256
        best = None
        while True:
            ks, logm, g = self._arrays(n)
            lt = logm + lx * g
            terms = np.exp(lt)
            total = float(np.sum(terms))
            bound = self._tail_bound(ks, lt, terms, s, q_lim)
            best = SeriesValue(total, bound)
            if bound <= tol:
                return best
            if n >= max_terms:
                break
            n = min(2 * n, max_terms)
        if strict:
            raise TailBoundError(
                f"tail bound {best.tail_bound:.3g} > tol {tol:.3g} after {n} terms at x={x!r}"
            )
        return best

    @staticmethod
    def _tail_bound(ks, lt, terms, s, q_lim=None) -> float:
        w = min(max(_WINDOW, ks.size // 4), ks.size - 1)
        win_lt = lt[-w - 1:]
        bounds = [math.inf]
        if np.all(np.isfinite(win_lt)):
            ratios = np.exp(np.diff(win_lt))
            half = ratios.size // 2
            q = float(ratios.max())
            if q_lim is not None:
                # ratios approach q_lim, so their future sup is at most max(q, q_lim)
                q = max(q, q_lim)
                trend_ok = True
            else:
                trend_ok = ratios[half:].max() <= ratios[:half].max() * (1 + 1e-9)
            if q < 1.0 and trend_ok:
                q = q + (1.0 - q) * 1e-3
                bounds.append(float(terms[-1]) * q / (1.0 - q))
        if s is not None and s > 1.0:
            sp = 1.0 + 0.9 * (s - 1.0)
            with np.errstate(divide="ignore"):
                scaled = lt[-w - 1:] + sp * np.log(ks[-w - 1:])
            half = scaled.size // 2
            if scaled[half:].max() <= scaled[:half].max() + 1e-12:
                c = math.exp(float(scaled.max()))
                kk = float(ks[-1])
                bounds.append(c * kk ** (1.0 - sp) / (sp - 1.0))
        return min(bounds)


@functools.lru_cache(maxsize=256)
def family_series(k0: int, height, mult) -> FamilySeries:
    return FamilySeries(k0, height, mult)


def finite_sum(heights, x: float) -> SeriesValue:
    """Exact ``sum x^h`` over a finite list of heights."""
    if x == 0:
        return ZERO_VALUE
    return SeriesValue(math.fsum(x ** h for h in heights), 0.0)


def alpha(decl, x: float, tol: float = DEFAULT_TOL) -> SeriesValue:
    """Class series ``sum_{v in class} x^f(v)`` for a declared class.

    Finite classes give an exact sum; families are summed by
    :class:`FamilySeries` with the tail bound kept below ``tol``.
    """
    if not 0 <= x < 1 and not (x == 1 and decl.is_finite):
        raise ValueError(f"x must lie in [0, 1), got {x!r}")
    if decl.is_finite:
        return finite_sum(decl.heights(), x)
    return family_series(decl.k0, decl.height, decl.mult).sum(x, tol)


def class_radius(decl) -> RadiusEstimate:
    if decl.is_finite:
        return INFINITE_RADIUS
    return family_series(decl.k0, decl.height, decl.mult).radius


def radius_F(spec) -> RadiusEstimate:
    """Radius of convergence of the whole vertex series of ``spec``."""
    return min_radius(class_radius(c) for c in spec.classes if not c.is_finite)
