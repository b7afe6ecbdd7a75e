"""Command-line front end.

Usage::

    rftflow entropy SPEC [--root W] [--tol T] [--format text|json]
    rftflow phi SPEC --x 0.1 0.2 [--root W] [--format text|json]
    rftflow radius SPEC [--format text|json]
    rftflow oracle SPEC [--L 8] [--N 10] [--x 0.2] [--budget B] [--format text|json]
    rftflow list

``SPEC`` is a path or the name of a bundled spec (``example2``).  Exit
codes: 0 success, 2 spec or parse error, 3 numerical failure (divergence,
singularity), 4 budget exceeded.
"""
from __future__ import annotations

import argparse
import json
import math
import sys

from . import __version__
from .entropy import EntropyReport, InfiniteEntropy, ToleranceNotReached, solve_entropy
from .expr import ExprError
from .genfun import DomainError, solve_phi
from .oracle import MAX_ENTRIES, BudgetExceeded, enumerate_cycles, phi_truncated, truncate
from .quotient import build_quotient
from .series import DEFAULT_TOL, RadiusEstimate, SeriesError, TailBoundError
from .spec import SpecError, bundled_specs, load_spec

EXIT_OK, EXIT_SPEC, EXIT_NUMERIC, EXIT_BUDGET = 0, 2, 3, 4


# -- encoding -----------------------------------------------------------------

def _num(v):
    """JSON-safe number: non-finite floats become strings."""
    if v is None:
        return None
    v = float(v)
    if math.isnan(v):
        return "nan"
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return v


def decode_number(v):
    """Inverse of the JSON number encoding."""
    if isinstance(v, str):
        return float(v)
    return v


def radius_dict(r: RadiusEstimate) -> dict:
    return {
        "lower": _num(r.lower),
        "upper": _num(r.upper),
        "exact": _num(r.exact),
        "converges_at_radius": r.converges_at_radius,
    }


def report_dict(rep: EntropyReport) -> dict:
    return {
        "x_hat": _num(rep.x_hat),
        "entropy": _num(rep.entropy),
        "r_F": radius_dict(rep.r_F),
        "r_phi": _num(rep.r_phi),
        "x_tilde0": _num(rep.x_tilde0),
        "phi_at_xhat": _num(rep.phi_at_xhat),
        "mme": rep.mme.value,
        "bracket": {"lo": _num(rep.bracket[0]), "hi": _num(rep.bracket[1])},
        "path": rep.path,
        "root": rep.root,
    }


def dumps(doc) -> str:
    return json.dumps(doc, sort_keys=True, indent=2)


def _fmt(v) -> str:
    if v is None:
        return "none"
    if isinstance(v, str):
        return v
    return f"{v:.12g}"


# -- commands -----------------------------------------------------------------

def cmd_entropy(args) -> tuple[dict, list[str]]:
    spec = load_spec(args.spec)
    q = build_quotient(spec, args.root)
    rep = solve_entropy(q, args.tol)
    doc = report_dict(rep)
    r = rep.r_F
    lines = [
        f"root          {rep.root}",
        f"x_hat         {_fmt(rep.x_hat)}",
        f"entropy       {_fmt(rep.entropy)}",
        f"bracket       [{_fmt(rep.bracket[0])}, {_fmt(rep.bracket[1])}]",
        f"r_F           {_fmt(r.exact) if r.exact is not None else f'[{_fmt(r.lower)}, {_fmt(r.upper)}]'}",
        f"r_phi         {_fmt(rep.r_phi)}",
        f"x_tilde0      {_fmt(rep.x_tilde0) if rep.x_tilde0 is not None else 'none below r_F'}",
        f"phi(x_hat)    {_fmt(rep.phi_at_xhat)}",
        f"mme           {rep.mme.value}",
        f"path          {rep.path}",
    ]
    return doc, lines


def cmd_phi(args) -> tuple[dict, list[str]]:
    spec = load_spec(args.spec)
    q = build_quotient(spec, args.root)
    rows = []
    lines = [f"{'x':>14}  {'phi':>18}  {'det M':>14}  status"]
    for x in args.x:
        try:
            ev = solve_phi(q, x, args.tol)
            status, phi, det, A = ev.status.value, ev.phi, ev.detM, list(ev.A)
        except TailBoundError:
            status, phi, det, A = "BudgetExceeded", math.nan, math.nan, []
        rows.append({
            "x": _num(x), "phi": _num(phi), "detM": _num(det),
            "A": [_num(a) for a in A], "status": status,
        })
        lines.append(f"{_fmt(x):>14}  {_fmt(phi):>18}  {_fmt(det):>14}  {status}")
    return {"root": q.root, "rows": rows}, lines


def cmd_radius(args) -> tuple[dict, list[str]]:
    spec = load_spec(args.spec)
    q = build_quotient(spec, args.root)
    r = q.radius
    doc = {"r_F": radius_dict(r)}
    if r.exact is not None:
        lines = [f"r_F  {_fmt(r.exact)}  (exact)"]
    else:
        lines = [f"r_F  in [{_fmt(r.lower)}, {_fmt(r.upper)}]"]
    if r.converges_at_radius is not None:
        lines.append(f"series at r_F: {'converges' if r.converges_at_radius else 'diverges'}")
    return doc, lines


def cmd_oracle(args) -> tuple[dict, list[str]]:
    spec = load_spec(args.spec)
    q = build_quotient(spec, args.root)
    xs = args.x
    if not xs:
        xs = [0.5 * solve_entropy(q, args.tol).x_hat]
    tg = truncate(spec, args.N)
    poly = enumerate_cycles(tg, q.root, args.L, max_entries=args.budget)
    counts = poly.counts_by_length()
    doc = {"root": q.root, "L": args.L, "N": args.N, "vertices": len(tg.labels),
           "counts_by_length": counts, "points": []}
    lines = [f"truncation: {len(tg.labels)} vertices, root {q.root}, L = {args.L}"]
    if not poly:
        lines.append("no root-cycles of length <= L in the truncation")
    lines.append("cycles by length: " + " ".join(str(c) for c in counts))
    for x in xs:
        ev = solve_phi(q, x, args.tol)
        exact = ev.phi if ev.in_domain else math.nan
        partial = [phi_truncated(poly, x, n) for n in range(1, args.L + 1)]
        doc["points"].append({
            "x": _num(x), "phi": _num(exact), "status": ev.status.value,
            "truncated": [_num(p) for p in partial], "gap": _num(exact - partial[-1]),
        })
        lines.append(f"x = {_fmt(x)}: phi = {_fmt(exact)} ({ev.status.value})")
        for n, p in enumerate(partial, 1):
            lines.append(f"  L = {n:3d}  truncated = {_fmt(p):>18}  gap = {_fmt(exact - p)}")
    return doc, lines


def cmd_list(args) -> tuple[dict, list[str]]:
    names = bundled_specs()
    return {"specs": names}, names


# -- driver -------------------------------------------------------------------

def _positive(text: str) -> float:
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def _nonneg(text: str) -> float:
    v = float(text)
    if not v >= 0:
        raise argparse.ArgumentTypeError("must be non-negative")
    return v


def _count(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be at least 1")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="rftflow", description="Entropy of special flows over countable Markov chains.")
    p.add_argument("--version", action="version", version=f"rftflow {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, with_spec=True):
        if with_spec:
            sp.add_argument("spec", help="spec file or bundled spec name")
            sp.add_argument("--root", default=None, help="root vertex label (default: the root declared in the file)")
            sp.add_argument("--tol", type=_positive, default=DEFAULT_TOL, help="series tolerance")
        sp.add_argument("--format", choices=("text", "json"), default="text")

    common(sub.add_parser("entropy", help="entropy and maximal-measure verdict"))
    sp = sub.add_parser("phi", help="evaluate the cycle generating function")
    common(sp)
    sp.add_argument("--x", type=_nonneg, nargs="+", required=True)
    common(sub.add_parser("radius", help="radius of convergence of the vertex series"))
    sp = sub.add_parser("oracle", help="brute-force cycle counts on a truncation")
    common(sp)
    sp.add_argument("--L", type=_count, default=8, help="maximal cycle length")
    sp.add_argument("--N", type=_count, default=10, help="indices kept per family")
    sp.add_argument("--x", type=_nonneg, nargs="*", default=None)
    sp.add_argument("--budget", type=_count, default=MAX_ENTRIES, help="maximal number of weight states")
    common(sub.add_parser("list", help="list bundled specs"), with_spec=False)
    return p


COMMANDS = {"entropy": cmd_entropy, "phi": cmd_phi, "radius": cmd_radius,
            "oracle": cmd_oracle, "list": cmd_list}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        doc, lines = COMMANDS[args.command](args)
    except (SpecError, ExprError, OSError) as exc:
        print(f"error: {getattr(args, 'spec', '')}: {exc}", file=sys.stderr)
        return EXIT_SPEC
    except (TailBoundError, BudgetExceeded) as exc:
        print(f"error: budget exceeded: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (SeriesError, DomainError, InfiniteEntropy, ToleranceNotReached, ArithmeticError) as exc:
        print(f"error: numerical: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    if args.format == "json":
        print(dumps(doc))
    else:
        print("\n".join(lines))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
