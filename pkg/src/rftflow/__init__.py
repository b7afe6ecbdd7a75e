"""Entropy of special flows over countable Markov chains reducible to finite type.

Typical use::

    from rftflow import load_spec, build_quotient, solve_entropy

    q = build_quotient(load_spec("example2"))
    report = solve_entropy(q)
    report.entropy, report.mme
"""
__version__ = "0.1.0"

from .entropy import EntropyReport, Mme, first_singular_point, solve_entropy
from .genfun import (
    Status,
    assemble,
    determinant_identity,
    phi_bernoulli,
    phi_closed_form,
    phi_local_perturbation,
    solve_phi,
)
from .oracle import enumerate_cycles, phi_truncated, truncate
from .quotient import build_quotient, refine_partition, tree_level_check
from .series import SeriesValue, alpha, radius_F
from .spec import RftSpec, format_spec, load_spec, parse_spec

__all__ = [
    "EntropyReport", "Mme", "RftSpec", "SeriesValue", "Status",
    "alpha", "assemble", "build_quotient", "determinant_identity", "enumerate_cycles",
    "first_singular_point", "format_spec", "load_spec", "parse_spec", "phi_bernoulli",
    "phi_closed_form", "phi_local_perturbation", "phi_truncated", "radius_F",
    "refine_partition", "solve_entropy", "solve_phi", "tree_level_check", "truncate",
]
