import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rftflow.expr import parse_expr
from rftflow.generators import random_finite_spec
from rftflow.spec import (
    COMPLETE,
    PAIRS,
    SpecError,
    bundled_specs,
    format_spec,
    load_spec,
    parse_spec,
)

EXAMPLE1_TEXT = """
class a finite { 3: 2*ln(3.75) }
class b finite { 4: 2*ln(5), 5: 2*ln(6.25) }
class rest family k from 6 height 2*ln(1.25*k)
edges complete_minus_D
forbid { (3, 3), (3, 4), (3, 5), (4, 3), (5, 3) }
"""


def test_example1_spec():
    spec = parse_spec(EXAMPLE1_TEXT)
    assert len(spec.classes) == 3
    assert len(spec.edges.forbidden) == 5
    assert spec.edges.mode == COMPLETE
    assert spec.default_root == "3"


def test_single_self_loop():
    spec = parse_spec("class a finite { a: 1.0 }\nedges complete_minus_D\n")
    assert spec.finite_labels == ("a",)
    assert spec.edges.forbidden == ()
    assert spec.has_edge("a", "a")


def test_star_with_multiplicity():
    spec = load_spec("example3")
    hub, spokes = spec.classes
    assert hub.heights() == (1.0,)
    assert spokes.k0 == 2 and spokes.mult == parse_expr("floor(2^k/k^2)")
    assert spec.edges.mode == PAIRS
    assert spec.edges.pairs == {("hub", "spokes"), ("spokes", "hub")}


def test_bundled_specs_parse_and_round_trip():
    names = bundled_specs()
    assert {"example1", "example2", "example3", "fullshift_n3"} <= set(names)
    for name in names:
        spec = load_spec(name)
        assert parse_spec(format_spec(spec)) == spec


def test_family_members_resolve():
    spec = load_spec("example2")
    c, k = spec.resolve("pos[4]")
    assert c.name == "pos" and k == 4
    assert spec.height_of("neg[5]") == pytest.approx(2 * np.log(6.25))
    assert not spec.has_edge("3", "pos[4]")
    assert spec.has_edge("3", "3") is False
    assert spec.has_edge("-2", "2")


@pytest.mark.parametrize("text, fragment, line", [
    ("class a finite { x: 1 }\nclass b finite { x: 2 }", "duplicate vertex label", 2),
    ("class a finite { x: 0 }", "not positive", 1),
    ("class a finite { x: 1 - 2 }", "not positive", 1),
    ("class a family k from 1 height 1 - k", "not positive", 1),
    ("class a family k from 1 height k mult k/2", "non-negative integer", 1),
    ("class a family k from 1 height k mult 0", "vanish", 1),
    ("class a family k from 1 height ln(k - 1)", "at k=1", 1),
    ("class a family k from 1 height k + j", "unknown identifier", 1),
    ("class a finite { x: 1 }\nedges pairs { (a, b) }", "unknown class", 2),
    ("class a finite { x: 1 }\nforbid { (x, y) }", "unknown vertex", 2),
    ("class a finite { x: 1 }\nclass f family k from 2 height k mult k\nforbid { (x, f[3]) }",
     "not a single vertex", 3),
    ("class a finite { x: 1 }\nclass f family k from 2 height k\nforbid { (x, f[1]) }",
     "unknown vertex", 3),
    ("class a finite { x: 1, y: 1 }\nedges pairs { (a, a) }\nforbid { (x, y) }\n"
     "class b finite { z: 1 }\nforbid { (x, z) }", "not an edge at class level", 5),
    ("class a finite { }", "empty", 1),
    ("class a finite { x: 1 }\nroot q", "unknown vertex", 2),
    ("class a finite { x: 1 }\nedges sometimes", "unknown edge mode", 2),
    ("class a finite { x: 1 } extra", "unexpected", 1),
    ("class a finite { x: 1 }\nclass a finite { y: 1 }", "duplicate class", 2),
    ("class a finite { x: k }", "constant", 1),
    ("class a finite { x: 1 $ }", "unexpected character", 1),
])
def test_spec_errors(text, fragment, line):
    with pytest.raises(SpecError) as info:
        parse_spec(text)
    assert fragment in str(info.value)
    assert info.value.line == line


def test_syntax_error_position():
    with pytest.raises(SpecError) as info:
        parse_spec("class a finite { x: 1 }\nedges pairs { (a a) }")
    assert (info.value.line, info.value.col) == (2, 18)


def test_comments_and_multiline_lists():
    text = """# leading comment
class a finite {
  x: 1,   # trailing comment
  y: 2
}
edges complete_minus_D  # all edges
"""
    spec = parse_spec(text)
    assert spec.finite_labels == ("x", "y")


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_round_trip_random_specs(seed):
    spec = random_finite_spec(np.random.default_rng(seed))
    assert parse_spec(format_spec(spec)) == spec
