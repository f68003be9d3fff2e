from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from relat import library as L
from relat.cli.syntax import (ParseError, format_algebra, format_judgement, format_structure, format_term,
                              format_theory, format_variety, load_algebra, load_structure, load_theory,
                              load_variety, parse_algebra, parse_goal, parse_structure, parse_theory,
                              parse_variety)
from relat.domains import Bound, FiniteLattice
from relat.horn.ops import builtin_theory
from relat.structures import Fact, PreStructure
from relat.terms import App, Def, Rel, Var


def same_variety(a, b):
    return (a.theory == b.theory and sorted(a.ops) == sorted(b.ops)
            and all(a.ops[k].arity == b.ops[k].arity for k in a.ops) and a.axioms == b.axioms)


@pytest.mark.parametrize("name", ["set", "pos", "met"])
def test_builtin_theories_roundtrip(name):
    th = builtin_theory(name)
    assert parse_theory(format_theory(th)) == th


def test_theory_files_equal_builtins(fixtures_dir):
    assert load_theory(str(fixtures_dir / "pos.rt")) == builtin_theory("pos")
    assert load_theory(str(fixtures_dir / "met.rt")) == builtin_theory("met")
    assert load_theory("pos") == builtin_theory("pos")


def test_lattice_and_partial_theories_roundtrip():
    lat = FiniteLattice.from_table("three", ["lo", "mid", "hi"], [("lo", "mid"), ("mid", "hi")])
    for th in (builtin_theory("lvalued", lat), builtin_theory("partial", {"f": 1, "g": 2})):
        assert parse_theory(format_theory(th)) == th


@pytest.mark.parametrize("stem, make", [
    ("semilattice", L.semilattice),
    ("met_join", L.met_join),
    ("cauchy", L.cauchy),
])
def test_variety_files_match_library(fixtures_dir, stem, make):
    V = load_variety(fixtures_dir / f"{stem}.rv")
    assert same_variety(V, make())
    again = parse_variety(format_variety(V), path=fixtures_dir / "again.rv")
    assert same_variety(again, V)


@st.composite
def metric_structures(draw):
    n = draw(st.integers(1, 4))
    pts = [f"p{i}" for i in range(n)]
    facts = []
    for i in range(n):
        for j in range(n):
            if draw(st.booleans()):
                k = draw(st.integers(0, 8))
                facts.append(Fact("eq", (pts[i], pts[j]), Bound(Fraction(k, 8), k == 8 or draw(st.booleans()))))
    return PreStructure(pts, facts)


@settings(max_examples=40, deadline=None)
@given(metric_structures())
def test_structure_roundtrip(X):
    th = builtin_theory("met")
    Y = parse_structure(format_structure(X, "s", "met"), th)
    assert Y == X


def test_algebra_roundtrip(fixtures_dir):
    V = L.semilattice()
    A = load_algebra(fixtures_dir / "chain.ra", V)
    B = parse_algebra(format_algebra(A, "chain"), V)
    assert A.key() == B.key()


def test_goals_and_terms():
    V = L.semilattice()
    X = L.pos_model(["x", "y"])
    g = parse_goal("le(join{x->x, y->y}, join(y, x))", V, X)
    j = App("join", [("x", Var("x")), ("y", Var("y"))])
    assert g == Rel("le", (j, App("join", [("x", Var("y")), ("y", Var("x"))])))
    assert parse_goal(format_judgement(g), V, X) == g
    assert parse_goal("def(" + format_term(j) + ")", V, X) == Def(j)
    eq = parse_goal("join(x, y) = join(y, x)", V, X)
    assert eq[0] == "="


@pytest.mark.parametrize("goal, fragment", [
    ("le(x, meet(x, y))", "meet"),
    ("le(x, z)", "z"),
    ("le(x, join(x))", "join"),
    ("lt(x, y)", "lt"),
])
def test_goal_errors(goal, fragment):
    V = L.semilattice()
    X = L.pos_model(["x", "y"])
    with pytest.raises(ParseError) as info:
        parse_goal(goal, V, X)
    assert info.value.col is not None and fragment in info.value.message


def test_undeclared_point_reports_position(fixtures_dir):
    with pytest.raises(ParseError) as info:
        load_structure(fixtures_dir / "bad_point.rs", builtin_theory("pos"))
    e = info.value
    assert (e.line, e.col) == (3, 11) and "c" in e.message
    assert str(e).startswith(str(fixtures_dir / "bad_point.rs") + ":3:11:")


def test_out_of_range_index(fixtures_dir):
    with pytest.raises(ParseError) as info:
        load_structure(fixtures_dir / "bad_range.rs", builtin_theory("met"))
    assert "3/2" in info.value.message and info.value.line == 3


def test_theory_errors():
    with pytest.raises(ParseError):
        parse_theory("rel le 2\n")
    with pytest.raises(ParseError):
        parse_theory("theory t\nrel le 2\nrel le 2\n")
    with pytest.raises(ParseError):
        parse_theory("theory t\nrel le 2\naxiom a: le(x,y) => lt(x,y)\n")
