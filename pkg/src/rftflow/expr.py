"""Arithmetic expressions in the family index ``k``.

Heights and multiplicities of infinite vertex families are written as small
expressions such as ``2*ln(1.25*k)`` or ``floor(2^k/k^2)``.  This module
holds the tokenizer (shared with the spec-file parser), a recursive-descent
expression parser, a pretty printer and three evaluators:

* :func:`evaluate` -- scalar double-precision evaluation with domain checks,
* :func:`evaluate_array` -- the same over a numpy array of indices,
* :func:`log_evaluate_array` -- ``ln`` of a positive expression, computed so
  that values far outside the double range (``2^k`` for ``k`` in the
  millions) still come out finite.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Iterator, Union

import numpy as np

FUNCTIONS = ("ln", "exp", "abs", "floor")


class ExprError(ValueError):
    """Base class for expression errors."""


class ExprSyntaxError(ExprError):
    def __init__(self, message: str, line: int = 0, col: int = 0):
        self.line = line
        self.col = col
        where = f"line {line}, column {col}: " if line else ""
        super().__init__(where + message)


class ExprDomainError(ExprError):
    def __init__(self, message: str, k=None):
        self.k = k
        suffix = f" (at k={k})" if k is not None else ""
        super().__init__(message + suffix)


# -- tokens -------------------------------------------------------------------

@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    line: int
    col: int


_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r]+)
  | (?P<comment>\#[^\n]*)
  | (?P<newline>\n)
  | (?P<number>(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>[-+*/^])
  | (?P<punct>[{}()\[\],:])
    """,
    re.VERBOSE,
)


def tokenize(text: str) -> list[Token]:
    """Split ``text`` into tokens; the list always ends with an ``EOF`` token.

    Newlines are kept as ``NEWLINE`` tokens except inside brackets, so
    statements are line oriented while brace lists may span lines.
    """
    tokens: list[Token] = []
    depth = 0
    line, line_start, pos = 1, 0, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        col = pos - line_start + 1
        if m is None:
            raise ExprSyntaxError(f"unexpected character {text[pos]!r}", line, col)
        kind = m.lastgroup
        value = m.group()
        pos = m.end()
        if kind == "newline":
            if depth == 0:
                tokens.append(Token("NEWLINE", value, line, col))
            line += 1
            line_start = pos
            continue
        if kind in ("ws", "comment"):
            continue
        if kind == "punct":
            if value in "{([":
                depth += 1
            elif value in "})]":
                depth = max(depth - 1, 0)
            tokens.append(Token(value, value, line, col))
        elif kind == "op":
            tokens.append(Token("OP", value, line, col))
        else:
            tokens.append(Token(kind.upper(), value, line, col))
    tokens.append(Token("EOF", "", line, pos - line_start + 1))
    return tokens


class TokenStream:
    """Cursor over a token list with small helpers for recursive descent."""

    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.pos = 0

    def peek(self, offset: int = 0) -> Token:
        return self.tokens[min(self.pos + offset, len(self.tokens) - 1)]

    def next(self) -> Token:
        tok = self.peek()
        if tok.kind != "EOF":
            self.pos += 1
        return tok

    def at(self, kind: str, text: str | None = None) -> bool:
        tok = self.peek()
        return tok.kind == kind and (text is None or tok.text == text)

    def accept(self, kind: str, text: str | None = None) -> Token | None:
        if self.at(kind, text):
            return self.next()
        return None

    def expect(self, kind: str, text: str | None = None) -> Token:
        tok = self.peek()
        if not self.at(kind, text):
            want = text or kind
            got = tok.text or tok.kind
            raise ExprSyntaxError(f"expected {want!r}, found {got!r}", tok.line, tok.col)
        return self.next()

    def error(self, message: str) -> ExprSyntaxError:
        tok = self.peek()
        return ExprSyntaxError(message, tok.line, tok.col)


# -- AST ----------------------------------------------------------------------

@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    """The family index ``k``."""


@dataclass(frozen=True)
class Neg:
    arg: "Expr"


@dataclass(frozen=True)
class Call:
    fn: str
    arg: "Expr"


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Expr"
    right: "Expr"


Expr = Union[Num, Var, Neg, Call, BinOp]

K = Var()


def const(value: float) -> Num:
    return Num(float(value))


def uses_k(e: Expr) -> bool:
    if isinstance(e, Var):
        return True
    if isinstance(e, Num):
        return False
    if isinstance(e, (Neg, Call)):
        return uses_k(e.arg)
    return uses_k(e.left) or uses_k(e.right)


def scaled(e: Expr, c: float) -> Expr:
    """Return the expression ``c*e``."""
    return BinOp("*", const(c), e)


# -- parser -------------------------------------------------------------------

def parse_expr_tokens(ts: TokenStream) -> Expr:
    """Parse one expression from ``ts``; stops at the first token it cannot use."""
    return _parse_sum(ts)


def _parse_sum(ts: TokenStream) -> Expr:
    left = _parse_product(ts)
    while ts.at("OP", "+") or ts.at("OP", "-"):
        op = ts.next().text
        left = BinOp(op, left, _parse_product(ts))
    return left


def _parse_product(ts: TokenStream) -> Expr:
    left = _parse_unary(ts)
    while ts.at("OP", "*") or ts.at("OP", "/"):
        op = ts.next().text
        left = BinOp(op, left, _parse_unary(ts))
    return left


def _parse_unary(ts: TokenStream) -> Expr:
    if ts.accept("OP", "-"):
        return Neg(_parse_unary(ts))
    if ts.accept("OP", "+"):
        return _parse_unary(ts)
    return _parse_power(ts)


def _parse_power(ts: TokenStream) -> Expr:
    base = _parse_atom(ts)
    if ts.accept("OP", "^"):
        # right associative; the exponent may carry a sign (2^-k)
        return BinOp("^", base, _parse_unary(ts))
    return base


def _parse_atom(ts: TokenStream) -> Expr:
    tok = ts.peek()
    if tok.kind == "NUMBER":
        ts.next()
        return Num(float(tok.text))
    if tok.kind == "IDENT":
        if tok.text == "k":
            ts.next()
            return K
        if tok.text in FUNCTIONS:
            ts.next()
            ts.expect("(")
            arg = _parse_sum(ts)
            ts.expect(")")
            return Call(tok.text, arg)
        raise ExprSyntaxError(f"unknown identifier {tok.text!r} in expression", tok.line, tok.col)
    if tok.kind == "(":
        ts.next()
        inner = _parse_sum(ts)
        ts.expect(")")
        return inner
    raise ts.error(f"expected an expression, found {tok.text or tok.kind!r}")


def parse_expr(text: str) -> Expr:
    """Parse a standalone expression string."""
    ts = TokenStream([t for t in tokenize(text) if t.kind != "NEWLINE"])
    e = parse_expr_tokens(ts)
    if not ts.at("EOF"):
        raise ts.error(f"unexpected {ts.peek().text!r} after expression")
    return e


# -- printer ------------------------------------------------------------------

_PREC = {"+": 1, "-": 1, "*": 2, "/": 2, "^": 4}


def _prec(e: Expr) -> int:
    if isinstance(e, BinOp):
        return _PREC[e.op]
    if isinstance(e, Neg):
        return 3
    return 5


def format_number(v: float) -> str:
    if v.is_integer() and abs(v) < 1e16:
        return str(int(v))
    return repr(v)


def to_source(e: Expr) -> str:
    """Render ``e`` with the fewest parentheses that re-parse to the same tree."""
    if isinstance(e, Num):
        return format_number(e.value)
    if isinstance(e, Var):
        return "k"
    if isinstance(e, Call):
        return f"{e.fn}({to_source(e.arg)})"
    if isinstance(e, Neg):
        inner = to_source(e.arg)
        return f"-{inner}" if _prec(e.arg) >= 3 else f"-({inner})"
    p = _PREC[e.op]
    left, right = to_source(e.left), to_source(e.right)
    if e.op == "^":
        if _prec(e.left) <= 4:
            left = f"({left})"
        if _prec(e.right) < 3:
            right = f"({right})"
        return f"{left}^{right}"
    if _prec(e.left) < p:
        left = f"({left})"
    if _prec(e.right) <= p:
        right = f"({right})"
    return f"{left} {e.op} {right}" if p == 1 else f"{left}*{right}" if e.op == "*" else f"{left}/{right}"


# -- scalar evaluation --------------------------------------------------------

def evaluate(e: Expr, k: float = math.nan) -> float:
    """Evaluate ``e`` at index ``k`` in double precision.

    Raises :class:`ExprDomainError` for ``ln`` of a non-positive number,
    division by zero, or any result that is not a finite real.
    """
    value = _eval_scalar(e, k)
    if not math.isfinite(value):
        raise ExprDomainError(f"expression {to_source(e)!r} is not finite", _k_or_none(k))
    return value


def _k_or_none(k):
    return None if isinstance(k, float) and math.isnan(k) else k


def _eval_scalar(e: Expr, k) -> float:
    if isinstance(e, Num):
        return e.value
    if isinstance(e, Var):
        if isinstance(k, float) and math.isnan(k):
            raise ExprDomainError("index k used in a constant expression")
        return float(k)
    if isinstance(e, Neg):
        return -_eval_scalar(e.arg, k)
    if isinstance(e, Call):
        a = _eval_scalar(e.arg, k)
        if e.fn == "ln":
            if not a > 0:
                raise ExprDomainError(f"ln of non-positive value {a!r}", _k_or_none(k))
            return math.log(a)
        if e.fn == "exp":
            try:
                return math.exp(a)
            except OverflowError:
                return math.inf
        if e.fn == "abs":
            return abs(a)
        return float(math.floor(a)) if math.isfinite(a) else a
    a = _eval_scalar(e.left, k)
    b = _eval_scalar(e.right, k)
    if e.op == "+":
        return a + b
    if e.op == "-":
        return a - b
    if e.op == "*":
        return a * b
    if e.op == "/":
        if b == 0:
            raise ExprDomainError("division by zero", _k_or_none(k))
        return a / b
    try:
        r = a ** b
    except OverflowError:
        return math.inf
    except ZeroDivisionError:
        raise ExprDomainError("zero raised to a negative power", _k_or_none(k)) from None
    if isinstance(r, complex):
        raise ExprDomainError("negative base with fractional exponent", _k_or_none(k))
    return float(r)


# -- vectorised evaluation ----------------------------------------------------

def evaluate_array(e: Expr, ks: np.ndarray) -> np.ndarray:
    """Evaluate ``e`` elementwise over ``ks``.

    Overflow yields ``inf`` (the log evaluator handles those entries);
    genuine domain errors raise with the first offending index.
    """
    ks = np.asarray(ks, dtype=float)
    with np.errstate(over="ignore", under="ignore"):
        out = np.broadcast_to(_eval_vec(e, ks), ks.shape).astype(float, copy=False)
    if np.any(np.isnan(out)):
        raise ExprDomainError(f"expression {to_source(e)!r} is undefined", _first_bad(ks, np.isnan(out)))
    return out


def _first_bad(ks: np.ndarray, mask) -> float | None:
    mask = np.broadcast_to(mask, ks.shape)
    idx = np.flatnonzero(mask)
    if idx.size == 0:
        return None
    k = ks.flat[idx[0]]
    return int(k) if float(k).is_integer() else float(k)


def _eval_vec(e: Expr, ks: np.ndarray):
    if isinstance(e, Num):
        return np.float64(e.value)
    if isinstance(e, Var):
        return ks
    if isinstance(e, Neg):
        return -_eval_vec(e.arg, ks)
    if isinstance(e, Call):
        a = _eval_vec(e.arg, ks)
        if e.fn == "ln":
            bad = ~(a > 0)
            if np.any(bad):
                raise ExprDomainError("ln of non-positive value", _first_bad(ks, bad))
            return np.log(a)
        if e.fn == "exp":
            return np.exp(a)
        if e.fn == "abs":
            return np.abs(a)
        return np.floor(a)
    a = _eval_vec(e.left, ks)
    b = _eval_vec(e.right, ks)
    if e.op == "+":
        return a + b
    if e.op == "-":
        with np.errstate(invalid="ignore"):
            return a - b
    if e.op == "*":
        return a * b
    if e.op == "/":
        bad = np.asarray(b) == 0
        if np.any(bad):
            raise ExprDomainError("division by zero", _first_bad(ks, bad))
        with np.errstate(invalid="ignore"):
            return a / b
    with np.errstate(invalid="ignore", divide="ignore"):
        return np.power(a, b)


def log_evaluate_array(e: Expr, ks: np.ndarray) -> np.ndarray:
    """Return ``ln(e(k))`` elementwise for an expression that is non-negative on ``ks``.

    Entries where the plain value overflows are recomputed structurally
    (``ln(a*b) = ln a + ln b``, ``ln(c^k) = k ln c``, ``ln floor(a) ~ ln a``
    once ``a`` exceeds 2^53), so the result stays finite.  Zero values map
    to ``-inf``.
    """
    ks = np.asarray(ks, dtype=float)
    with np.errstate(over="ignore", under="ignore", divide="ignore", invalid="ignore"):
        out = _log_vec(e, ks)
    out = np.broadcast_to(out, ks.shape).astype(float, copy=False)
    if np.any(np.isnan(out)):
        raise ExprDomainError(
            f"expression {to_source(e)!r} is negative or undefined",
            _first_bad(ks, np.isnan(out)),
        )
    return out


def _log_vec(e: Expr, ks: np.ndarray):
    plain = np.broadcast_to(_eval_vec(e, ks), ks.shape)
    if np.any(plain < 0):
        raise ExprDomainError(f"expression {to_source(e)!r} is negative", _first_bad(ks, plain < 0))
    overflow = ~np.isfinite(plain)
    result = np.log(plain)
    if not np.any(overflow):
        return result
    structural = np.broadcast_to(_log_structural(e, ks), ks.shape)
    return np.where(overflow, structural, result)


def _log_structural(e: Expr, ks: np.ndarray):
    if isinstance(e, Num):
        return np.log(np.float64(e.value))
    if isinstance(e, Var):
        return np.log(ks)
    if isinstance(e, Call):
        if e.fn == "exp":
            return _eval_vec(e.arg, ks)
        if e.fn in ("abs", "floor"):
            # floor(a)/a -> 1 once a is far beyond 2^53
            return _log_vec(e.arg, ks)
        return np.log(_log_vec(e.arg, ks))
    if isinstance(e, Neg):
        return np.full(ks.shape, np.nan)
    if e.op == "*":
        return _log_vec(e.left, ks) + _log_vec(e.right, ks)
    if e.op == "/":
        return _log_vec(e.left, ks) - _log_vec(e.right, ks)
    if e.op == "^":
        return _eval_vec(e.right, ks) * _log_vec(e.left, ks)
    la = _log_vec(e.left, ks)
    lb = _log_vec(e.right, ks)
    if e.op == "+":
        return np.logaddexp(la, lb)
    return la + np.log1p(-np.exp(lb - la))


def walk(e: Expr) -> Iterator[Expr]:
    yield e
    if isinstance(e, (Neg, Call)):
        yield from walk(e.arg)
    elif isinstance(e, BinOp):
        yield from walk(e.left)
        yield from walk(e.right)
