from fractions import Fraction
from itertools import combinations

import pytest

from relat import library as L
from relat.algebra import in_variety, is_homomorphism
from relat.free import (NotStabilized, all_homomorphisms, check_monad_laws, free_algebra, is_free_model,
                        resplit, universal_extension)
from relat.structops import compose
from relat.terms import App, Var, subterms

from test_algebra import chain_algebra

SL = L.semilattice()


def downsets_of_joins(X):
    """Free join-semilattice over a finite poset: a join is its down-closure."""
    pts = X.carrier
    below = {p: frozenset(q for q in pts if X.covers("le", (q, p))) for p in pts}
    out = set()
    for k in range(1, len(pts) + 1):
        for S in combinations(pts, k):
            out.add(frozenset().union(*(below[p] for p in S)))
    return out


@pytest.mark.parametrize("X", [
    L.pos_model([]),
    L.pos_model(["x"]),
    L.pos_model(["x", "y"]),
    L.pos_model(["x", "y"], [("x", "y")]),
    L.pos_model(["x", "y", "z"], [("x", "z")]),
], ids=["empty", "point", "antichain", "chain", "vee"])
def test_semilattice_classes_match_downsets(X):
    F = free_algebra(SL, X, 3)
    assert F.stabilized and F.total and is_free_model(F)
    assert len(F.classes) == len(downsets_of_joins(X))
    assert in_variety(F.algebra)
    # every class has a single down-closure of its leaves
    for members in F.classes.values():
        keys = set()
        for t in members:
            leaves = {s.point for s in subterms(t) if isinstance(s, Var)}
            keys.add(frozenset().union(*(frozenset(q for q in X.carrier if X.covers("le", (q, p))) for p in leaves)))
        assert len(keys) == 1


def test_free_order_is_inclusion_of_downsets():
    X = L.pos_model(["x", "y"])
    F = free_algebra(SL, X, 3)
    j = F.cls(App("join", [("x", Var("x")), ("y", Var("y"))]))
    x = F.cls(Var("x"))
    assert F.carrier.covers("le", (x, j))
    assert not F.carrier.covers("le", (j, x))


def test_unique_extension_into_chain():
    X = L.pos_model(["x", "y"])
    F = free_algebra(SL, X, 3)
    A = chain_algebra()
    for f in ({"x": "a", "y": "b"}, {"x": "b", "y": "b"}):
        h = universal_extension(F, f, A)
        assert is_homomorphism(h, F.algebra, A)
        gens = tuple(f[p] for p in X.carrier)
        assert compose(h, F.unit).images == gens
        assert [g.images for g in all_homomorphisms(F, A) if compose(g, F.unit).images == gens] == [h.images]


def test_resplit_keeps_the_quotient():
    X = L.pos_model(["x", "y"])
    F = free_algebra(SL, X, 3)
    choice = {r: ms[-1] for r, ms in F.classes.items()}
    G = resplit(F, choice)
    assert sorted(map(len, G.classes.values())) == sorted(map(len, F.classes.values()))
    assert set(G.classes) == set(choice.values())
    assert G.total and in_variety(G.algebra)


def test_partial_operation_free_algebra():
    MJ = L.met_join()
    X = L.met_space(["x", "y"], {("x", "y"): Fraction(1, 2)})
    F = free_algebra(MJ, X, 3)
    assert F.stabilized and len(F.classes) == 3
    far = L.met_space(["x", "y"], {("x", "y"): Fraction(3, 4)})
    G = free_algebra(MJ, far, 3)
    assert G.stabilized and len(G.classes) == 2


def test_unary_without_axioms_never_stabilizes():
    V = L.met_free_unary()
    X = L.met_space(["x"], {})
    F = free_algebra(V, X, 2)
    assert not F.stabilized
    with pytest.raises(NotStabilized):
        universal_extension(F, {"x": "x"}, F.algebra)
    with pytest.raises(NotStabilized):
        check_monad_laws(V, [X], 2)


def test_monad_laws_small():
    rep = check_monad_laws(SL, [L.pos_model([]), L.pos_model(["x"]), L.pos_model(["x", "y"])], 3)
    assert rep.ok and rep.assoc_checks > 0 and rep.enrichment.functorial
