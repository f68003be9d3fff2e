from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from relat.domains import UNIT, Bound, DomainError, FiniteLattice, as_rational, format_rational

rationals = st.fractions(min_value=0, max_value=1, max_denominator=12)
bounds = st.builds(lambda v, c: Bound(v, c or v == 1), rationals, st.booleans())


def test_as_rational_parses_forms():
    assert as_rational("3/4") == Fraction(3, 4)
    assert as_rational(1) == Fraction(1)
    assert as_rational(" 0 ") == 0
    assert format_rational(Fraction(2, 4)) == "1/2"


@pytest.mark.parametrize("bad", ["3/2", "-1/4", "x", "1/0", True, 2.5])
def test_as_rational_rejects(bad):
    with pytest.raises(DomainError):
        as_rational(bad)


def test_open_one_is_empty():
    with pytest.raises(DomainError):
        Bound(Fraction(1), False)


@given(bounds, rationals)
def test_admits_matches_upset(b, q):
    inside = q > b.value or (b.closed and q == b.value)
    assert b.admits(q) == inside


@given(bounds, bounds, st.lists(rationals, min_size=1, max_size=6))
def test_covers_is_upset_inclusion(a, b, probes):
    # probing the up-sets at the endpoints and random points
    pts = probes + [a.value, b.value, (a.value + b.value) / 2]
    if a.covers(b):
        assert all(a.admits(q) for q in pts if b.admits(q))
    else:
        assert any(b.admits(q) and not a.admits(q) for q in pts)


@given(bounds, bounds)
def test_intersect_is_the_weaker(a, b):
    (m,) = UNIT.intersect((a,), (b,))
    assert a.covers(m) and b.covers(m)
    assert m in (a, b)


@given(st.lists(bounds, max_size=4))
def test_add_is_capped_sum(gens):
    s = UNIT.add(gens)
    total = sum((g.value for g in gens), Fraction(0))
    assert s.value == min(total, Fraction(1))
    if total < 1:
        assert s.closed == all(g.closed for g in gens)


def test_limit_closes_open_generator():
    assert UNIT.limit((Bound(Fraction(1, 3), False),)) == Bound(Fraction(1, 3))
    assert UNIT.limit((Bound(Fraction(1, 3)),)) is None
    assert UNIT.strict(Bound(Fraction(1))) == ()


def diamond():
    return FiniteLattice.from_table("diamond", ["bot", "l", "r", "top"],
                                    [("bot", "l"), ("bot", "r"), ("l", "top"), ("r", "top")])


def test_lattice_meets_and_bottom():
    d = diamond()
    assert d.meet("l", "r") == "bot"
    assert d.meet("l", "top") == "l"
    assert d.leq("bot", "top")
    assert d.bottom().element == "bot"
    assert d.principal("l").covers(d.principal("top"))
    assert not d.principal("l").covers(d.principal("r"))


def test_lattice_rejects_missing_meet_and_wrong_table():
    with pytest.raises(DomainError):
        FiniteLattice.from_table("vee", ["a", "b", "top"], [("a", "top"), ("b", "top")])
    with pytest.raises(DomainError):
        FiniteLattice.from_table("d", ["bot", "l", "r", "top"],
                                 [("bot", "l"), ("bot", "r"), ("l", "top"), ("r", "top")], {("l", "r"): "top"})
    with pytest.raises(DomainError):
        FiniteLattice.from_table("cyc", ["a", "b"], [("a", "b"), ("b", "a")])
