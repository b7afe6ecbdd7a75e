import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rftflow.expr import const
from rftflow.generators import random_finite_spec
from rftflow.quotient import GraphError, build_quotient, refine_partition, tree_level_check
from rftflow.spec import EdgeDecl, FiniteClass, RftSpec, SpecError, complete_graph, load_spec, parse_spec

EXAMPLE1_ONE_CLASS = """
class v family k from 3 height 2*ln(1.25*k)
edges complete_minus_D
forbid { (v[3], v[3]), (v[3], v[4]), (v[3], v[5]), (v[4], v[3]), (v[5], v[3]) }
root v[3]
"""


def keys(blocks):
    return {b.key() for b in blocks}


def test_example1_single_class_input():
    blocks = refine_partition(parse_spec(EXAMPLE1_ONE_CLASS))
    assert [b.describe() for b in blocks] == ["{v[3]}", "{v[4], v[5]}", "v[k>=6]"]


def test_example1_bundled():
    assert [b.describe() for b in refine_partition(load_spec("example1"))] == [
        "{3}", "{4, 5}", "rest[k>=6]"]


def test_example2_eight_classes():
    assert [b.describe() for b in refine_partition(load_spec("example2"))] == [
        "{2}", "{3}", "{pos[4], pos[5]}", "pos[k>=6]",
        "{-2}", "{-3}", "{neg[4], neg[5]}", "neg[k>=6]"]


def test_complete_graph_one_class():
    blocks = refine_partition(complete_graph(5))
    assert len(blocks) == 1 and len(blocks[0].labels) == 5


def test_refinement_merges_across_declared_classes():
    spec = parse_spec("class a finite { x: 1 }\nclass b finite { y: 2 }\nedges complete_minus_D")
    assert keys(refine_partition(spec)) == {frozenset({"x", "y"})}


def _respec(spec, blocks):
    """Declare each finite block as its own class (all-finite specs)."""
    classes = tuple(
        FiniteClass(f"p{i}", tuple((lab, const(spec.height_of(lab))) for lab in b.labels))
        for i, b in enumerate(blocks)
    )
    return RftSpec(classes, spec.edges, spec.root)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_idempotent_and_order_independent(seed):
    rng = np.random.default_rng(seed)
    spec = random_finite_spec(rng)
    blocks = refine_partition(spec)
    assert keys(refine_partition(_respec(spec, blocks))) == keys(blocks)
    perm = rng.permutation(len(spec.classes))
    shuffled = RftSpec(tuple(spec.classes[i] for i in perm), spec.edges, spec.root)
    assert keys(refine_partition(shuffled)) == keys(blocks)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_blocks_have_all_or_nothing_edges(seed):
    spec = random_finite_spec(np.random.default_rng(seed))
    blocks = refine_partition(spec)
    for a in blocks:
        for b in blocks:
            edges = {spec.has_edge(u, v) for u in a.labels for v in b.labels}
            assert len(edges) == 1


def test_example1_quotient():
    q = build_quotient(load_spec("example1"), "3")
    assert q.m == 2 and q.ell == 1
    assert q.describe() == ["{3}", "{4, 5}", "rest[k>=6]"]
    adj = q.adj
    assert adj[0].tolist() == [False, False, True]
    assert adj[1].tolist() == [False, True, True]
    assert adj[2].tolist() == [True, True, True]


def test_self_loop_quotient():
    q = build_quotient(parse_spec("class a finite { a: 1 }"), "a")
    assert q.m == 0 and q.adj.tolist() == [[True]]
    assert tree_level_check(q) == ({0: 0}, True)


def test_example2_quotient():
    q = build_quotient(load_spec("example2"), "2")
    assert q.m == 7
    i = q.describe().index("{-2}")
    names = q.describe()
    assert {names[j] for j in q.followers(i)} == {"{2}", "{3}", "{pos[4], pos[5]}", "pos[k>=6]"}


def test_bands_order():
    q = build_quotient(load_spec("subsystem3"))
    assert q.bands == (0, 1, 1, 1, 3)
    q = build_quotient(complete_graph(3), "v1")
    assert q.bands == (0, 3) and q.ell == 0


def test_tree_level_example1():
    levels, ok = tree_level_check(build_quotient(load_spec("example1")))
    assert ok and max(levels.values()) == 2


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_tree_level_bound_on_random_specs(seed):
    spec = random_finite_spec(np.random.default_rng(seed))
    for root in spec.finite_labels:
        assert tree_level_check(build_quotient(spec, root))[1]


def test_root_errors():
    with pytest.raises(SpecError):
        build_quotient(load_spec("example1"), "99")
    with pytest.raises(SpecError):
        build_quotient(load_spec("example3"), "spokes[10]")   # ten copies


def test_disconnected_graph_rejected():
    spec = parse_spec("class a finite { x: 1, y: 1 }\nedges complete_minus_D\nforbid { (x, y) }")
    with pytest.raises(GraphError):
        refine_partition(spec)


def test_named_family_member_root():
    q = build_quotient(parse_spec(EXAMPLE1_ONE_CLASS))
    assert q.root == "v[3]" and q.m == 2
