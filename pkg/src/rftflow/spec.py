"""Declarative description of a countable graph with heights, and its file format.

A spec lists vertex classes, the class-level adjacency, a finite set of
forbidden vertex pairs and an optional root vertex::

    # Example: hub with infinitely many spokes
    class hub finite { 1: 1 }
    class spokes family k from 2 height k mult floor(2^k/k^2)
    edges pairs { (hub, spokes), (spokes, hub) }
    root 1

Finite classes carry explicit labels and constant heights.  A family
``F`` stands for the vertices ``F[k]``, ``k >= k0``, with height ``g(k)``
and ``m(k)`` copies of each index.  An individual member ``F[k]`` may be
named in ``forbid`` or ``root`` provided it is a single vertex
(``m(k) = 1``); it then behaves like an explicitly listed vertex.

Edges are either ``complete_minus_D`` (every ordered pair, loops included)
or ``pairs``, which allows an edge ``u -> v`` exactly when the classes of
``u`` and ``v`` form a listed ordered pair.  ``forbid`` removes individual
vertex edges in both modes.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from . import asymptotics as asy
from .expr import (
    Expr,
    ExprDomainError,
    ExprError,
    ExprSyntaxError,
    TokenStream,
    evaluate,
    evaluate_array,
    format_number,
    parse_expr_tokens,
    to_source,
    tokenize,
    uses_k,
)

COMPLETE = "complete_minus_D"
PAIRS = "pairs"
_CHECK_RANGE = 4096


class SpecError(ValueError):
    """Invalid chain description."""

    def __init__(self, message: str, line: int = 0, col: int = 0):
        self.line = line
        self.col = col
        where = f"line {line}, column {col}: " if line else ""
        super().__init__(where + message)


@dataclass(frozen=True)
class FiniteClass:
    """Explicitly listed vertices with constant heights."""

    name: str
    vertices: tuple  # ((label, height expression), ...)

    is_finite = True

    @property
    def labels(self) -> tuple:
        return tuple(label for label, _ in self.vertices)

    def heights(self) -> tuple:
        return tuple(evaluate(h) for _, h in self.vertices)

    def height_of(self, label: str) -> float:
        for lab, h in self.vertices:
            if lab == label:
                return evaluate(h)
        raise KeyError(label)


@dataclass(frozen=True)
class FamilyClass:
    """Vertices ``name[k]`` for ``k >= k0``, ``m(k)`` copies each, height ``g(k)``."""

    name: str
    k0: int
    height: Expr
    mult: Expr | None = None

    is_finite = False

    def member_label(self, k: int) -> str:
        return f"{self.name}[{k}]"

    def height_at(self, k: int) -> float:
        return evaluate(self.height, k)

    def mult_at(self, k: int) -> int:
        if self.mult is None:
            return 1
        return int(evaluate(self.mult, k))


ClassDecl = FiniteClass | FamilyClass


@dataclass(frozen=True)
class EdgeDecl:
    mode: str = COMPLETE
    pairs: frozenset = frozenset()      # {(class name, class name)} for PAIRS mode
    forbidden: tuple = ()               # ((label, label), ...) in declaration order

    @property
    def forbidden_set(self) -> frozenset:
        return frozenset(self.forbidden)


@dataclass(frozen=True)
class RftSpec:
    classes: tuple
    edges: EdgeDecl = field(default_factory=EdgeDecl)
    root: str | None = None

    def __post_init__(self):
        index = {}
        for c in self.classes:
            if c.is_finite:
                for label in c.labels:
                    index[label] = (c, None)
        object.__setattr__(self, "_index", index)
        object.__setattr__(self, "_by_name", {c.name: c for c in self.classes})

    def class_named(self, name: str):
        return self._by_name[name]

    def resolve(self, label: str):
        """Return ``(class, k)`` for a vertex label; ``k`` is None for finite vertices."""
        if label in self._index:
            return self._index[label]
        if label.endswith("]") and "[" in label:
            name, _, idx = label[:-1].partition("[")
            c = self._by_name.get(name)
            if c is not None and not c.is_finite:
                try:
                    k = int(idx)
                except ValueError:
                    pass
                else:
                    if k >= c.k0:
                        return c, k
        raise KeyError(label)

    def height_of(self, label: str) -> float:
        c, k = self.resolve(label)
        return c.height_of(label) if k is None else c.height_at(k)

    @property
    def finite_labels(self) -> tuple:
        return tuple(lab for c in self.classes if c.is_finite for lab in c.labels)

    @property
    def is_finite(self) -> bool:
        return all(c.is_finite for c in self.classes)

    @property
    def default_root(self) -> str:
        if self.root is not None:
            return self.root
        if self.finite_labels:
            return self.finite_labels[0]
        raise SpecError("no root given and no explicitly listed vertex to default to")

    def class_edge(self, a: str, b: str) -> bool:
        """Class-level adjacency before forbidden pairs are removed."""
        return self.edges.mode == COMPLETE or (a, b) in self.edges.pairs

    def has_edge(self, u: str, v: str) -> bool:
        """Vertex-level adjacency between two named vertices."""
        cu, _ = self.resolve(u)
        cv, _ = self.resolve(v)
        return self.class_edge(cu.name, cv.name) and (u, v) not in self.edges.forbidden_set

    def named_members(self) -> dict:
        """Family members referred to individually, as ``{family name: sorted ks}``."""
        out: dict = {}
        labels = [lab for pair in self.edges.forbidden for lab in pair]
        if self.root is not None:
            labels.append(self.root)
        for lab in labels:
            c, k = self.resolve(lab)
            if k is not None:
                out.setdefault(c.name, set()).add(k)
        return {name: sorted(ks) for name, ks in out.items()}

    def scaled(self, c: float) -> "RftSpec":
        """The same graph with every height multiplied by ``c``."""
        from .expr import scaled

        classes = []
        for d in self.classes:
            if d.is_finite:
                classes.append(FiniteClass(d.name, tuple((l, scaled(h, c)) for l, h in d.vertices)))
            else:
                classes.append(FamilyClass(d.name, d.k0, scaled(d.height, c), d.mult))
        return RftSpec(tuple(classes), self.edges, self.root)

    def with_root(self, root: str) -> "RftSpec":
        spec = RftSpec(self.classes, self.edges, root)
        _check_label(spec, root, "root")
        return spec


# -- parsing ------------------------------------------------------------------

def _fail(tok, message: str) -> SpecError:
    return SpecError(message, tok.line, tok.col)


def _parse_label(ts: TokenStream) -> tuple[str, object]:
    tok = ts.peek()
    if ts.accept("OP", "-"):
        num = ts.expect("NUMBER")
        return "-" + num.text, tok
    if ts.accept("NUMBER"):
        return tok.text, tok
    if ts.accept("IDENT"):
        if ts.accept("["):
            sign = "-" if ts.accept("OP", "-") else ""
            num = ts.expect("NUMBER")
            ts.expect("]")
            return f"{tok.text}[{sign}{num.text}]", tok
        return tok.text, tok
    raise ts.error(f"expected a vertex label, found {tok.text or tok.kind!r}")


def _parse_int(ts: TokenStream) -> int:
    tok = ts.peek()
    sign = -1 if ts.accept("OP", "-") else 1
    num = ts.expect("NUMBER")
    try:
        return sign * int(num.text)
    except ValueError:
        raise _fail(num, f"expected an integer, found {num.text!r}") from None


def _end_statement(ts: TokenStream) -> None:
    if not (ts.accept("NEWLINE") or ts.at("EOF")):
        raise ts.error(f"unexpected {ts.peek().text!r} at end of statement")


def _parse_class(ts: TokenStream, items: list, spots: dict) -> None:
    name_tok = ts.expect("IDENT")
    kind = ts.expect("IDENT")
    if kind.text == "finite":
        ts.expect("{")
        vertices = []
        while not ts.at("}"):
            label, tok = _parse_label(ts)
            ts.expect(":")
            h = parse_expr_tokens(ts)
            if uses_k(h):
                raise _fail(tok, f"height of {label!r} must be a constant")
            vertices.append((label, h))
            spots[label] = tok
            if not ts.accept(","):
                break
        ts.expect("}")
        items.append((FiniteClass(name_tok.text, tuple(vertices)), name_tok))
    elif kind.text == "family":
        var = ts.expect("IDENT")
        if var.text != "k":
            raise _fail(var, "family index must be named k")
        ts.expect("IDENT", "from")
        k0 = _parse_int(ts)
        ts.expect("IDENT", "height")
        height = parse_expr_tokens(ts)
        mult = None
        if ts.accept("IDENT", "mult"):
            mult = parse_expr_tokens(ts)
        items.append((FamilyClass(name_tok.text, k0, height, mult), name_tok))
    else:
        raise _fail(kind, f"expected 'finite' or 'family', found {kind.text!r}")


def _parse_pair_list(ts: TokenStream, element) -> list:
    ts.expect("{")
    out = []
    while not ts.at("}"):
        ts.expect("(")
        a = element(ts)
        ts.expect(",")
        b = element(ts)
        ts.expect(")")
        out.append((a, b))
        if not ts.accept(","):
            break
    ts.expect("}")
    return out


def parse_spec(text: str) -> RftSpec:
    """Parse and validate a spec file.

    Raises
    ------
    SpecError
        On syntax errors (with line and column), duplicate labels or class
        names, non-positive heights, invalid multiplicities, unknown names
        and forbidden pairs that refer to unusable vertices.
    """
    try:
        ts = TokenStream(tokenize(text))
    except ExprSyntaxError as exc:
        raise SpecError(str(exc).split(": ", 1)[-1], exc.line, exc.col) from None
    items: list = []
    spots: dict = {}
    mode_tok = None
    mode, pairs, forbidden, root = COMPLETE, [], [], None
    try:
        while not ts.at("EOF"):
            if ts.accept("NEWLINE"):
                continue
            kw = ts.expect("IDENT")
            if kw.text == "class":
                _parse_class(ts, items, spots)
            elif kw.text == "edges":
                if mode_tok is not None:
                    raise _fail(kw, "edges declared twice")
                mode_tok = kw
                which = ts.expect("IDENT")
                if which.text == COMPLETE:
                    mode = COMPLETE
                elif which.text == PAIRS:
                    mode = PAIRS
                    pairs = [
                        (a.text, b.text, a)
                        for a, b in _parse_pair_list(ts, lambda s: s.expect("IDENT"))
                    ]
                else:
                    raise _fail(which, f"unknown edge mode {which.text!r}")
            elif kw.text == "forbid":
                forbidden.extend(_parse_pair_list(ts, _parse_label))
            elif kw.text == "root":
                if root is not None:
                    raise _fail(kw, "root declared twice")
                root = _parse_label(ts)
            else:
                raise _fail(kw, f"unknown statement {kw.text!r}")
            _end_statement(ts)
    except ExprSyntaxError as exc:
        raise SpecError(str(exc).split(": ", 1)[-1], exc.line, exc.col) from None

    if not items:
        raise SpecError("no vertex classes declared")
    names: dict = {}
    labels: dict = {}
    for decl, tok in items:
        if decl.name in names:
            raise _fail(tok, f"duplicate class name {decl.name!r}")
        names[decl.name] = decl
        if decl.is_finite:
            if not decl.vertices:
                raise _fail(tok, f"finite class {decl.name!r} is empty")
            for label, _ in decl.vertices:
                if label in labels:
                    raise _fail(spots[label], f"duplicate vertex label {label!r}")
                labels[label] = decl
    for a, b, tok in pairs:
        for n in (a, b):
            if n not in names:
                raise _fail(tok, f"unknown class {n!r} in edge pairs")
    edges = EdgeDecl(
        mode,
        frozenset((a, b) for a, b, _ in pairs),
        tuple((a, b) for (a, _), (b, _) in forbidden),
    )
    spec = RftSpec(tuple(d for d, _ in items), edges, root[0] if root else None)
    for decl, tok in items:
        try:
            validate_class(decl)
        except (SpecError, ExprError) as exc:
            raise _fail(tok, f"class {decl.name!r}: {exc}") from None
    for (a, ta), (b, tb) in forbidden:
        _check_label(spec, a, "forbidden pair", ta)
        _check_label(spec, b, "forbidden pair", tb)
        if mode == PAIRS and not spec.class_edge(spec.resolve(a)[0].name, spec.resolve(b)[0].name):
            raise _fail(ta, f"forbidden pair ({a}, {b}) is not an edge at class level")
    if root is not None:
        _check_label(spec, root[0], "root", root[1])
    return spec


def _check_label(spec: RftSpec, label: str, what: str, tok=None) -> None:
    line, col = (tok.line, tok.col) if tok is not None else (0, 0)
    try:
        c, k = spec.resolve(label)
    except KeyError:
        raise SpecError(f"{what} refers to unknown vertex {label!r}", line, col) from None
    if k is not None and c.mult_at(k) != 1:
        raise SpecError(
            f"{what} refers to {label!r}, which is not a single vertex (multiplicity "
            f"{c.mult_at(k)})", line, col,
        )


def validate_class(decl) -> None:
    """Check heights are positive and multiplicities are non-negative integers.

    Families are checked on their first few thousand indices and, when the
    expressions have a recognised asymptotic shape, at infinity.
    """
    if decl.is_finite:
        for label, h in decl.vertices:
            v = evaluate(h)
            if not v > 0:
                raise SpecError(f"height of {label!r} is not positive ({format_number(v)})")
        return
    ks = np.arange(decl.k0, decl.k0 + _CHECK_RANGE, dtype=float)
    g = evaluate_array(decl.height, ks)
    bad = np.flatnonzero(~(g > 0))
    if bad.size:
        raise ExprDomainError("height is not positive", int(ks[bad[0]]))
    try:
        lead = asy.expand(decl.height).lead()
    except asy.NotExpandable:
        lead = None
    if lead is not None and lead[1] < 0:
        raise SpecError("height is not positive for large k")
    if decl.mult is None:
        return
    m = evaluate_array(decl.mult, ks)
    small = np.isfinite(m) & (np.abs(m) < 2.0 ** 53)
    bad = np.flatnonzero(small & ((m < 0) | (m != np.floor(m))) | np.isnan(m))
    if bad.size:
        raise ExprDomainError("multiplicity is not a non-negative integer", int(ks[bad[0]]))
    try:
        mlead = asy.expand_log(decl.mult).lead()
    except asy.NotExpandable:
        mlead = None
    if mlead is None and not np.any(m[-_CHECK_RANGE // 2:] >= 1):
        raise SpecError("multiplicity vanishes on the tail of the checked range")
    if mlead is not None and mlead[0] > asy.ZERO and mlead[1] < 0:
        raise SpecError("multiplicity tends to zero")


# -- printing -----------------------------------------------------------------

def format_spec(spec: RftSpec) -> str:
    """Render a spec in the file format; ``parse_spec`` inverts it."""
    lines = []
    for c in spec.classes:
        if c.is_finite:
            body = ", ".join(f"{label}: {to_source(h)}" for label, h in c.vertices)
            lines.append(f"class {c.name} finite {{ {body} }}")
        else:
            line = f"class {c.name} family k from {c.k0} height {to_source(c.height)}"
            if c.mult is not None:
                line += f" mult {to_source(c.mult)}"
            lines.append(line)
    if spec.edges.mode == COMPLETE:
        lines.append(f"edges {COMPLETE}")
    else:
        pairs = ", ".join(f"({a}, {b})" for a, b in sorted(spec.edges.pairs))
        lines.append(f"edges {PAIRS} {{ {pairs} }}")
    if spec.edges.forbidden:
        body = ", ".join(f"({a}, {b})" for a, b in spec.edges.forbidden)
        lines.append(f"forbid {{ {body} }}")
    if spec.root is not None:
        lines.append(f"root {spec.root}")
    return "\n".join(lines) + "\n"


def load_spec(path) -> RftSpec:
    """Parse a spec file from disk, or a bundled spec by name (``example2``)."""
    p = Path(path)
    if not p.exists() and not p.suffix:
        name = p.name + ".spec"
        if resources.files("rftflow.specs").joinpath(name).is_file():
            return parse_spec(resources.files("rftflow.specs").joinpath(name).read_text())
    return parse_spec(p.read_text())


def bundled_specs() -> list[str]:
    """Names of the spec files shipped with the package."""
    return sorted(
        f.name[:-5] for f in resources.files("rftflow.specs").iterdir() if f.name.endswith(".spec")
    )


def complete_graph(n: int, height: float = 1.0) -> RftSpec:
    """Full shift on ``n`` symbols with constant height."""
    from .expr import const

    labels = tuple((f"v{i}", const(height)) for i in range(n))
    return RftSpec((FiniteClass("all", labels),), EdgeDecl(COMPLETE), "v0")
