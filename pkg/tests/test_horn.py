from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from relat.domains import Bound, FiniteLattice
from relat.horn.ops import (FuelExhausted, builtin_theory, check_derivation, close, entails, is_model,
                            metric_to_structure, reflect, saturate, structure_to_metric)
from relat.horn.theory import TheoryError
from relat.structures import Fact, PreStructure, StructureError

from test_acceptance import floyd_warshall

POS = builtin_theory("pos")
MET = builtin_theory("met")


@st.composite
def weighted_graphs(draw):
    n = draw(st.integers(1, 5))
    edges = draw(st.lists(st.tuples(st.integers(0, n - 1), st.integers(0, n - 1), st.integers(0, 8)),
                          max_size=8))
    return n, [(i, j, Fraction(k, 8)) for i, j, k in edges if i != j]


@settings(max_examples=60, deadline=None)
@given(weighted_graphs())
def test_metric_closure_is_capped_shortest_path(g):
    n, edges = g
    pts = [f"p{i}" for i in range(n)]
    w: dict = {}
    for i, j, v in edges:
        key = (min(i, j), max(i, j))
        w[key] = min(w.get(key, v), v)
    facts = [Fact("eq", (pts[i], pts[j]), Bound(v)) for i, j, v in edges]
    best: dict = {}
    for f in saturate(MET, PreStructure(pts, facts)):
        if f.symbol == "eq":
            key = (pts.index(f.args[0]), pts.index(f.args[1]))
            best[key] = min(best.get(key, f.bound.value), f.bound.value)
    want = floyd_warshall(n, w)
    assert all(best.get((i, j)) == want[i][j] for i in range(n) for j in range(n))


def test_cycle_collapses_under_antisymmetry():
    X = PreStructure(["a", "b", "c"], [Fact("le", ("a", "b")), Fact("le", ("b", "c")), Fact("le", ("c", "a"))])
    R, q = reflect(POS, X)
    assert len(R.carrier) == 1
    assert len(set(q.values())) == 1
    assert not is_model(POS, X)


def test_zero_distance_identifies_points():
    X = PreStructure(["a", "b", "c"], [Fact("eq", ("a", "b"), Bound(Fraction(0))),
                                       Fact("eq", ("b", "c"), Bound(Fraction(1, 2)))])
    R, q = reflect(MET, X)
    assert q["a"] == q["b"] != q["c"]
    assert R.covers("eq", (q["a"], q["c"]), Bound(Fraction(1, 2)))


def test_entailment_returns_checked_derivation():
    base = [Fact("le", ("a", "b")), Fact("le", ("b", "c"))]
    d = entails(POS, base, Fact("le", ("a", "c"), None))
    assert d is not None and check_derivation(d, POS, base)
    assert entails(POS, base, Fact("le", ("c", "a"), None)) is None


def test_entailment_metric_triangle():
    base = [Fact("eq", ("a", "b"), Bound(Fraction(1, 4))), Fact("eq", ("b", "c"), Bound(Fraction(1, 4)))]
    d = entails(MET, base, Fact("eq", ("c", "a"), Bound(Fraction(1, 2))))
    assert d is not None and check_derivation(d, MET, base)
    assert entails(MET, base, Fact("eq", ("a", "c"), Bound(Fraction(1, 3)))) is None


def test_fuel_bounds_rounds():
    chain = [Fact("le", (f"a{i}", f"a{i + 1}")) for i in range(6)]
    with pytest.raises(FuelExhausted):
        entails(POS, chain, Fact("le", ("a0", "a6"), None), fuel=0)
    assert entails(POS, chain, Fact("le", ("a0", "a6"), None), fuel=50) is not None


def test_close_refuses_identification():
    with pytest.raises(StructureError):
        close(POS, ["a", "b"], [Fact("le", ("a", "b")), Fact("le", ("b", "a"))])


def test_metric_roundtrip():
    pts = ["a", "b", "c"]
    half, q = Fraction(1, 2), Fraction(1, 4)
    m = [[0, q, half], [q, 0, q], [half, q, 0]]
    m = [[Fraction(v) for v in row] for row in m]
    S = metric_to_structure(pts, m)
    assert is_model(MET, S)
    got_pts, got = structure_to_metric(S)
    assert list(got_pts) == pts and got == m


def test_lattice_valued_theory_upward_closed():
    lat = FiniteLattice.from_table("three", ["lo", "mid", "hi"], [("lo", "mid"), ("mid", "hi")])
    th = builtin_theory("lvalued", lat)
    X = PreStructure(["a", "b"], [Fact("alpha", ("a", "b"), lat.principal("lo"))])
    R, _ = reflect(th, X)
    assert R.covers("alpha", ("a", "b"), lat.principal("hi"))
    assert not R.covers("alpha", ("b", "a"), lat.principal("hi"))


def test_partial_theory_is_functional():
    th = builtin_theory("partial", {"f": 1})
    X = PreStructure(["a", "b", "c"], [Fact("alpha_f", ("a", "b")), Fact("alpha_f", ("a", "c"))])
    R, q = reflect(th, X)
    assert q["b"] == q["c"] and len(R.carrier) == 2


def test_unknown_builtin():
    with pytest.raises(TheoryError):
        builtin_theory("groups")
