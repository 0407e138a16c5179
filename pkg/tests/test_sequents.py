import pytest
from hypothesis import given, settings, strategies as st

from glproof.formula import Atom, parse_formula
from glproof.proofio import (
    SequentSyntaxError,
    parse_gentzen_sequent,
    parse_labeled_sequent,
    parse_lns,
)
from glproof.sequents import (
    BadPath,
    GentzenSequent,
    LabeledSequent,
    LinearNestedSequent,
    NotATree,
    format_address,
    parse_address,
    path_projection,
    tree_root,
    tree_view,
)


def test_tree_root_examples():
    assert tree_root(parse_labeled_sequent("xRy; x: p |- y: q")) == "x"
    assert tree_root(parse_labeled_sequent("x: p |- x: q")) == "x"
    with pytest.raises(NotATree) as e:
        tree_root(parse_labeled_sequent("xRy; yRx; |-"))
    assert e.value.diagnosis == "cycle"


def test_tree_root_diagnoses():
    with pytest.raises(NotATree) as e:
        tree_root(parse_labeled_sequent("xRy; zRw; |-"))
    assert e.value.diagnosis == "multi-root"
    with pytest.raises(NotATree) as e:
        tree_root(parse_labeled_sequent("xRy; z: p |- z: p"))
    assert e.value.diagnosis == "dangling-label"
    with pytest.raises(NotATree) as e:
        tree_root(parse_labeled_sequent("x: p |- y: q"))
    assert e.value.diagnosis == "disconnected"
    with pytest.raises(NotATree) as e:
        tree_root(parse_labeled_sequent("xRy; xRz; zRy; |-"))
    assert e.value.diagnosis == "cycle"


def test_path_projection_examples():
    flat = parse_labeled_sequent("x: p |- x: q")
    assert path_projection(flat, ["x"]) == parse_lns("p |- q")

    t = parse_labeled_sequent("xRy; x: p, y: q |- y: r")
    assert path_projection(t, ["x", "y"]) == parse_lns("p |- // q |- r")

    t3 = parse_labeled_sequent("xRy; xRz; x: p |- z: q")
    assert path_projection(t3, ["x", "y"]) == parse_lns("p |- //  |- ")

    with pytest.raises(BadPath):
        path_projection(t3, ["x"])  # x is not a leaf
    with pytest.raises(BadPath):
        path_projection(t3, ["y"])  # must start at the root


def test_tree_view():
    flat = parse_labeled_sequent("x: p |- x: q")
    v = tree_view(flat)
    assert v.node_count() == 1 and not v.children

    edge = parse_labeled_sequent("xRy; |-")
    v2 = tree_view(edge)
    assert v2.node_count() == 2
    assert v2.sequent == GentzenSequent((), ())

    t3 = parse_labeled_sequent("xRy; xRz; x: p |- z: q")
    v3 = tree_view(t3)
    assert v3.label == "x" and {c.label for c in v3.children} == {"y", "z"}
    assert v3.node_count() == len(t3.labels())


def test_multiset_canonicalization():
    a = parse_gentzen_sequent("q, p |- r")
    b = parse_gentzen_sequent("p, q |- r")
    assert a == b and hash(a) == hash(b)
    assert parse_gentzen_sequent("p, p |- ") != parse_gentzen_sequent("p |- ")


@settings(max_examples=100, deadline=None)
@given(st.lists(st.sampled_from(["p", "q", "~p", "p|q", "[]p"]), max_size=5),
       st.lists(st.sampled_from(["p", "q", "~p", "p|q", "[]p"]), max_size=5))
def test_multiset_union_commutative(xs, ys):
    fx = [parse_formula(s) for s in xs]
    fy = [parse_formula(s) for s in ys]
    assert GentzenSequent(fx + fy, ()) == GentzenSequent(fy + fx, ())


def test_lns_requires_component():
    with pytest.raises(ValueError):
        LinearNestedSequent([])
    g = parse_lns("p |- q // r |- s")
    assert len(g) == 2 and g.end == parse_gentzen_sequent("r |- s")


def test_sequent_round_trips():
    for text, parse in [
        ("p, q |- r", parse_gentzen_sequent),
        (" |- p | ~p", parse_gentzen_sequent),
        ("xRy; xRz; x: p, y: q |- z: r", parse_labeled_sequent),
        ("x: p |- x: q", parse_labeled_sequent),
        ("p |- q // r |- s //  |- p", parse_lns),
    ]:
        s = parse(text)
        assert parse(str(s)) == s


def test_labeled_sequent_rename_simultaneous():
    s = parse_labeled_sequent("xRy; x: p |- y: q")
    r = s.rename({"x": "y", "y": "x"})
    assert r == parse_labeled_sequent("yRx; y: p |- x: q")


def test_bad_sequent_syntax():
    with pytest.raises(SequentSyntaxError):
        parse_gentzen_sequent("p, q")
    with pytest.raises(SequentSyntaxError):
        parse_labeled_sequent("xSy; x: p |- ")
    with pytest.raises(SequentSyntaxError):
        parse_labeled_sequent("p |- q")  # labeled formulas need labels


def test_addresses():
    assert format_address(()) == "."
    assert format_address((0, 1, 2)) == "0/1/2"
    assert parse_address(".") == ()
    assert parse_address("0/1/2") == (0, 1, 2)
