from fractions import Fraction
from itertools import product

import pytest
from hypothesis import given, settings, strategies as st

from relat import library as L
from relat.domains import Bound
from relat.horn.ops import builtin_theory, is_model
from relat.structops import (GuardExceeded, find_generating_subset, find_isomorphism, internal_hom,
                             is_embedding, is_generated_by, iter_maps, manhattan, morphisms, presentation,
                             tensor)
from relat.structures import Fact, PreStructure

POS = builtin_theory("pos")
MET = builtin_theory("met")


@st.composite
def posets(draw, max_points=3):
    n = draw(st.integers(0, max_points))
    pts = [f"p{i}" for i in range(n)]
    pairs = [(a, b) for a in pts for b in pts if a < b]
    chosen = draw(st.lists(st.sampled_from(pairs), unique=True)) if pairs else []
    return L.pos_model(pts, chosen)


def brute_maps(X, Y):
    out = []
    for imgs in product(Y.carrier, repeat=len(X.carrier)):
        m = dict(zip(X.carrier, imgs))
        if all(Y.covers(f.symbol, tuple(m[a] for a in f.args), f.bound) for f in X.facts):
            out.append(imgs)
    return sorted(out)


@settings(max_examples=40, deadline=None)
@given(posets(), posets())
def test_hom_enumeration_matches_brute_force(X, Y):
    assert sorted(iter_maps(X, Y)) == brute_maps(X, Y)


@settings(max_examples=25, deadline=None)
@given(posets(2), posets(2))
def test_internal_hom_is_pointwise_and_a_model(X, Y):
    H = internal_hom(X, Y, POS)
    assert is_model(POS, H)
    for f, g in product(H.carrier, repeat=2):
        pointwise = all(Y.covers("le", (a, b)) for a, b in zip(f, g))
        assert H.covers("le", (f, g)) == pointwise


def test_tensor_of_metrics_is_manhattan():
    X = L.met_space(["a", "b"], {("a", "b"): Fraction(1, 4)})
    Y = L.met_space(["c", "d"], {("c", "d"): Fraction(1, 2)})
    T = tensor(X, Y)
    # the bare tensor only has one-coordinate edges
    assert not T.covers("eq", (("a", "c"), ("b", "d")), Bound(Fraction(3, 4)))
    M = manhattan(MET, X, Y)
    assert M.covers("eq", (("a", "c"), ("b", "d")), Bound(Fraction(3, 4)))
    assert not M.covers("eq", (("a", "c"), ("b", "d")), Bound(Fraction(2, 3)))


def test_guard_stops_enumeration():
    X = PreStructure([f"x{i}" for i in range(6)], [])
    Y = PreStructure([f"y{i}" for i in range(6)], [])
    with pytest.raises(GuardExceeded):
        list(iter_maps(X, Y, guard=100))


def test_guard_from_environment(monkeypatch):
    monkeypatch.setenv("RELAT_GUARD", "10")
    X = PreStructure(["a", "b", "c"], [])
    with pytest.raises(GuardExceeded):
        morphisms(X, X)


def test_isomorphism_and_embedding():
    A = L.pos_model(["a", "b", "c"], [("a", "b"), ("b", "c")])
    B = L.pos_model(["z", "y", "x"], [("x", "y"), ("y", "z")])
    iso = find_isomorphism(A, B)
    assert iso == {"a": "x", "b": "y", "c": "z"}
    assert find_isomorphism(A, L.pos_model(["a", "b", "c"], [("a", "b")])) is None
    m = morphisms(L.pos_model(["u", "v"], [("u", "v")]), A)
    assert any(is_embedding(h) for h in m)
    assert not all(is_embedding(h) for h in m)


def test_generating_subsets():
    A = L.pos_model(["a", "b", "c"], [("a", "b"), ("b", "c")])
    w = find_generating_subset(POS, A, 3)
    assert w.bound == 2
    pres = presentation(POS, A)
    assert set(pres) == {Fact("le", ("a", "b")), Fact("le", ("b", "c"))}
    assert is_generated_by(POS, A, pres)
    assert not is_generated_by(POS, A, pres[:1])
    assert find_generating_subset(POS, A, 1) is None
