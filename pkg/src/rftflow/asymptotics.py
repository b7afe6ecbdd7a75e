"""Asymptotic expansions of index expressions as ``k -> infinity``.

An expansion is a finite sum of monomials ``c * k^s * (ln k)^t * (ln ln k)^u``
together with an error order: every omitted term is ``O`` of the monomial
with exponents ``err`` (``None`` means the expansion is exact for every
``k >= 2``).  Monomials are compared lexicographically on ``(s, t, u)``,
which is their order of growth.

Two expansions are computed per expression:

* :func:`expand` -- the value ``e(k)`` itself (used for heights),
* :func:`expand_log` -- ``ln e(k)`` (used for multiplicities, which may grow
  like ``2^k`` and so have no polynomial-type value expansion).

The series ``sum_k m(k) x^g(k)`` is then governed by
``T(k) = expand_log(m) + ln(x) * expand(g)``; :func:`series_converges`
decides convergence from ``T`` and :func:`critical_log_x` finds the value of
``ln x`` where the decision flips, i.e. the radius of convergence.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

from .expr import BinOp, Call, Expr, Neg, Num, Var

Order = tuple  # (s, t, u)

ZERO: Order = (0.0, 0, 0)
LN_K: Order = (0.0, 1, 0)
LNLN_K: Order = (0.0, 0, 1)
FLOOR: Order = (-6.0, 0, 0)   # terms below this are folded into the error order
_EPS = 1e-12


class NotExpandable(Exception):
    """The expression falls outside the recognised shapes."""


def _add_orders(a: Order, b: Order) -> Order:
    return (a[0] + b[0], a[1] + b[1], a[2] + b[2])


def _max_order(a, b):
    if a is None:
        return b
    if b is None:
        return a
    return max(a, b)


@dataclass
class Expansion:
    terms: dict = field(default_factory=dict)
    err: Order | None = None

    @classmethod
    def constant(cls, c: float) -> "Expansion":
        return cls({ZERO: float(c)} if c != 0 else {})

    def copy(self) -> "Expansion":
        return Expansion(dict(self.terms), self.err)

    @property
    def exact(self) -> bool:
        return self.err is None

    def coef(self, order: Order) -> float:
        return self.terms.get(order, 0.0)

    def known_above(self, order: Order) -> bool:
        """True when every term of order ``> order`` is known exactly."""
        return self.err is None or self.err <= order

    def lead(self) -> tuple[Order, float]:
        live = [o for o, c in self.terms.items() if c != 0]
        if not live:
            raise NotExpandable("expansion has no known leading term")
        o = max(live)
        if self.err is not None and self.err >= o:
            raise NotExpandable("leading term is swamped by the error term")
        return o, self.terms[o]

    def orders_above(self, order: Order) -> list:
        return sorted((o for o, c in self.terms.items() if o > order and c != 0), reverse=True)

    def _clean(self) -> "Expansion":
        out = {}
        err = self.err
        for o, c in self.terms.items():
            if abs(c) <= 1e-300:
                continue
            if o < FLOOR or (err is not None and o <= err):
                err = _max_order(err, o)
                continue
            out[o] = c
        return Expansion(out, err)

    def __add__(self, other: "Expansion") -> "Expansion":
        terms = dict(self.terms)
        for o, c in other.terms.items():
            new = terms.get(o, 0.0) + c
            scale = max(abs(terms.get(o, 0.0)), abs(c))
            terms[o] = 0.0 if abs(new) <= _EPS * scale else new
        return Expansion(terms, _max_order(self.err, other.err))._clean()

    def __neg__(self) -> "Expansion":
        return Expansion({o: -c for o, c in self.terms.items()}, self.err)

    def __sub__(self, other: "Expansion") -> "Expansion":
        return self + (-other)

    def scale(self, c: float) -> "Expansion":
        if c == 0:
            return Expansion()
        return Expansion({o: c * v for o, v in self.terms.items()}, self.err)

    def __mul__(self, other: "Expansion") -> "Expansion":
        terms: dict = {}
        for o1, c1 in self.terms.items():
            for o2, c2 in other.terms.items():
                o = _add_orders(o1, o2)
                terms[o] = terms.get(o, 0.0) + c1 * c2
        err = None
        if self.err is not None:
            err = _max_order(err, _add_orders(self.err, _top(other)))
        if other.err is not None:
            err = _max_order(err, _add_orders(other.err, _top(self)))
        return Expansion(terms, err)._clean()

    def shifted(self, order: Order) -> "Expansion":
        """Multiply by the monomial of the given order."""
        terms = {_add_orders(o, order): c for o, c in self.terms.items()}
        err = None if self.err is None else _add_orders(self.err, order)
        return Expansion(terms, err)._clean()


def _top(e: Expansion) -> Order:
    orders = [o for o, c in e.terms.items() if c != 0]
    if e.err is not None:
        orders.append(e.err)
    return max(orders) if orders else FLOOR


def _small_series(u: Expansion, coefs) -> Expansion:
    """Sum ``coefs[j] * u^j`` for an o(1) expansion ``u``, truncated at FLOOR."""
    result = Expansion.constant(coefs[0])
    power = Expansion.constant(1.0)
    for c in coefs[1:]:
        power = power * u
        if not power.terms:
            break
        result = result + power.scale(c)
    if power.terms:
        result.err = _max_order(result.err, _top(power * u))
    return result


def _split_lead(e: Expansion) -> tuple[Order, float, Expansion]:
    o, c = e.lead()
    rest = Expansion({q: v / c for q, v in e.terms.items() if q != o}, e.err)
    return o, c, rest.shifted((-o[0], -o[1], -o[2]))


_NTERMS = 12


def power_const(e: Expansion, p: float) -> Expansion:
    if float(p).is_integer() and 0 <= p <= 16:
        result = Expansion.constant(1.0)
        for _ in range(int(p)):
            result = result * e
        return result
    o, c, u = _split_lead(e)
    if c < 0 and not float(p).is_integer():
        raise NotExpandable("fractional power of a negative leading term")
    coefs = [1.0]
    for j in range(1, _NTERMS):
        coefs.append(coefs[-1] * (p - j + 1) / j)
    series = _small_series(u, coefs)
    return series.scale(math.copysign(abs(c) ** p, c if float(p) % 2 else 1.0)).shifted(
        (o[0] * p, o[1] * p, o[2] * p)
    )


def log_of(e: Expansion) -> Expansion:
    """Expansion of ``ln e`` for a positive expansion, to o(1) accuracy beyond."""
    o, c, u = _split_lead(e)
    if c <= 0:
        raise NotExpandable("logarithm of a non-positive leading term")
    if o[2] != 0:
        raise NotExpandable("ln ln ln k is outside the recognised scale")
    result = Expansion({ZERO: math.log(c)} if c != 1 else {})
    if o[0] != 0:
        result = result + Expansion({LN_K: o[0]})
    if o[1] != 0:
        result = result + Expansion({LNLN_K: float(o[1])})
    coefs = [0.0] + [(-1.0) ** (j + 1) / j for j in range(1, _NTERMS)]
    return result + _small_series(u, coefs)


def exp_of(e: Expansion) -> Expansion:
    growing = e.orders_above(ZERO)
    if growing or not e.known_above(ZERO):
        raise NotExpandable("exp of an unbounded expression has no value expansion")
    c = e.coef(ZERO)
    rest = Expansion({o: v for o, v in e.terms.items() if o != ZERO}, e.err)
    coefs = [1.0]
    for j in range(1, _NTERMS):
        coefs.append(coefs[-1] / j)
    return _small_series(rest, coefs).scale(math.exp(c))


def expand(e: Expr) -> Expansion:
    """Value expansion of ``e(k)``; raises :class:`NotExpandable` when unknown."""
    if isinstance(e, Num):
        return Expansion.constant(e.value)
    if isinstance(e, Var):
        return Expansion({(1.0, 0, 0): 1.0})
    if isinstance(e, Neg):
        return -expand(e.arg)
    if isinstance(e, Call):
        a = expand(e.arg)
        if e.fn == "ln":
            return log_of(a)
        if e.fn == "exp":
            return exp_of(a)
        if e.fn == "abs":
            _, c = a.lead()
            return a if c > 0 else -a
        # floor moves the value by less than one
        a = a.copy()
        if not a.terms or a.lead()[0] <= ZERO:
            raise NotExpandable("floor of a bounded expression")
        a.err = _max_order(a.err, ZERO)
        return a._clean()
    if e.op == "+":
        return expand(e.left) + expand(e.right)
    if e.op == "-":
        return expand(e.left) - expand(e.right)
    if e.op == "*":
        return expand(e.left) * expand(e.right)
    if e.op == "/":
        return expand(e.left) * power_const(expand(e.right), -1.0)
    right = expand(e.right)
    if right.orders_above(ZERO) or not right.known_above((-1.0, 0, 0)):
        raise NotExpandable("non-constant exponent has no value expansion")
    p = right.coef(ZERO)
    if len(right.terms) > (1 if p else 0):
        raise NotExpandable("exponent is not constant")
    return power_const(expand(e.left), p)


def expand_log(e: Expr) -> Expansion:
    """Expansion of ``ln e(k)`` for an expression that is positive for large ``k``."""
    try:
        return log_of(expand(e))
    except NotExpandable:
        pass
    if isinstance(e, Call):
        if e.fn == "exp":
            return expand(e.arg)
        if e.fn in ("abs", "floor"):
            inner = expand_log(e.arg)
            if e.fn == "floor":
                o, c = inner.lead()
                if not (o > ZERO and c > 0):
                    raise NotExpandable("floor of a bounded expression")
                inner = inner.copy()
                inner.err = _max_order(inner.err, ZERO)
            return inner
        if e.fn == "ln":
            return log_of(expand_log(e.arg))
        raise NotExpandable(e.fn)
    if isinstance(e, BinOp):
        if e.op == "*":
            return expand_log(e.left) + expand_log(e.right)
        if e.op == "/":
            return expand_log(e.left) - expand_log(e.right)
        if e.op == "^":
            if isinstance(e.left, Num) and e.left.value > 0:
                return expand(e.right).scale(math.log(e.left.value))
            return expand(e.right) * expand_log(e.left)
        la, lb = expand_log(e.left), expand_log(e.right)
        diff = la - lb
        top = diff.orders_above(ZERO)
        if top and diff.known_above(ZERO):
            if diff.coef(top[0]) > 0:
                return la
            if e.op == "+":
                return lb
            raise NotExpandable("difference with dominant negative part")
        if e.op == "+" and not top and diff.known_above((-1.0, 0, 0)):
            d = diff.coef(ZERO)
            return la + Expansion.constant(math.log1p(math.exp(-d)))
    raise NotExpandable("expression shape not recognised")


# -- series behaviour ---------------------------------------------------------

def series_converges(t: Expansion) -> bool | None:
    """Decide convergence of ``sum_k exp(T(k))`` from the expansion of ``T``.

    Returns ``None`` when the known terms do not settle the question.
    """
    above = t.orders_above(LN_K)
    if above:
        if not t.known_above(above[0]):
            return None
        return t.coef(above[0]) < 0
    if not t.known_above(LN_K):
        return None
    a = t.coef(LN_K)
    if abs(a + 1.0) > 1e-12:
        return a < -1.0
    if not t.known_above(LNLN_K):
        return None
    b = t.coef(LNLN_K)
    if abs(b + 1.0) > 1e-12:
        return b < -1.0
    return None


def critical_log_x(log_mult: Expansion, height: Expansion) -> tuple[float, bool | None]:
    """Return ``(lam, at_boundary)`` with ``exp(lam)`` the radius of convergence.

    ``lam`` is ``ln r`` (``0`` when the series converges on all of ``(0, 1)``,
    ``-inf`` when it diverges for every ``x > 0``); ``at_boundary`` is the
    convergence verdict at ``x = r`` itself (``None`` if undecided).
    """
    candidates = {0.0}
    orders = set(log_mult.terms) | set(height.terms)
    for o in orders:
        if o <= ZERO:
            continue
        q = height.coef(o)
        if q == 0:
            continue
        target = -1.0 if o in (LN_K, LNLN_K) else 0.0
        lam = (target - log_mult.coef(o)) / q
        if lam < 0:
            candidates.add(lam)
    cands = sorted(candidates)

    def conv(lam):
        return series_converges(log_mult + height.scale(lam))

    if conv(cands[0] - 1.0) is not True:
        if conv(cands[0] - 1.0) is None:
            raise NotExpandable("convergence undecided")
        return -math.inf, False
    best = None
    for lo, hi in zip(cands, cands[1:] + [None]):
        probe = (lo + hi) / 2 if hi is not None else None
        if probe is None:
            best = lo
            break
        verdict = conv(probe)
        if verdict is None:
            raise NotExpandable("convergence undecided")
        if not verdict:
            best = lo
            break
    if best is None:
        best = cands[-1]
    if best >= 0.0:
        return 0.0, None
    return best, conv(best)
