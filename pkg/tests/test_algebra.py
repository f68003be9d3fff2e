from fractions import Fraction
from itertools import permutations, product

import pytest

from relat import library as L
from relat.algebra import (OpSymbol, SigmaAlgebra, SigmaRelation, Variety, VarietyError, enumerate_algebras,
                           evaluate, find_violation, in_variety, is_homomorphism, product_algebra,
                           subalgebra_check)
from relat.horn.ops import builtin_theory
from relat.structops import Morphism, iter_maps
from relat.structures import Fact
from relat.terms import App, Rel, Var

POS = builtin_theory("pos")


def small_posets(n_max):
    """Partial orders on ``range(n)`` as sets of strict pairs, up to isomorphism."""
    out = []
    for n in range(n_max + 1):
        pairs = [(a, b) for a in range(n) for b in range(n) if a != b]
        seen = set()
        for mask in range(1 << len(pairs)):
            lt = {p for i, p in enumerate(pairs) if mask >> i & 1}
            if any((b, a) in lt for a, b in lt):
                continue
            if any((a, c) not in lt for a, b in lt for b2, c in lt if b == b2 and a != c):
                continue
            canon = min(tuple(sorted((s[a], s[b]) for a, b in lt)) for s in permutations(range(n)))
            if canon not in seen:
                seen.add(canon)
                out.append((n, lt))
    return out


def lub_exists(n, lt):
    le = lambda a, b: a == b or (a, b) in lt
    for a, b in product(range(n), repeat=2):
        ups = [c for c in range(n) if le(a, c) and le(b, c)]
        if not [c for c in ups if all(le(c, d) for d in ups)]:
            return False
    return True


def test_semilattice_algebras_are_the_finite_join_semilattices():
    want = sum(1 for n, lt in small_posets(3) if lub_exists(n, lt))
    got = enumerate_algebras(L.semilattice(), 3)
    assert len(got) == want == 5
    assert all(in_variety(A) for A in got)


def unary_pos():
    return Variety(POS, (OpSymbol("f", L.pos_model(["a"])),), (), name="unary")


def test_unary_algebras_up_to_isomorphism():
    # monotone self-maps of each poset, modulo conjugation by automorphisms
    want = 0
    for n, lt in small_posets(2):
        le = lambda a, b: a == b or (a, b) in lt
        autos = [s for s in permutations(range(n)) if all((s[a], s[b]) in lt for a, b in lt)]
        maps = {m for m in product(range(n), repeat=n)
                if all(le(m[a], m[b]) for a in range(n) for b in range(n) if le(a, b))}
        orbits = {min(tuple(s[m[s.index(i)]] for i in range(n)) for s in autos) for m in maps}
        want += len(orbits)
    assert len(enumerate_algebras(unary_pos(), 2)) == want == 8


def chain_algebra():
    C = L.pos_model(["a", "b"], [("a", "b")])
    table = {(p, q): ("b" if "b" in (p, q) else "a") for p in "ab" for q in "ab"}
    return SigmaAlgebra(L.semilattice(), C, {"join": table})


def test_chain_is_a_semilattice_and_meet_is_not():
    V = L.semilattice()
    A = chain_algebra()
    assert in_variety(A)
    meet = {(p, q): ("a" if "a" in (p, q) else "b") for p in "ab" for q in "ab"}
    B = SigmaAlgebra(V, A.carrier, {"join": meet})
    assert not in_variety(B)
    assert find_violation(B, V.axioms[0]) is not None


def test_table_validation():
    V = L.semilattice()
    C = chain_algebra().carrier
    with pytest.raises(VarietyError):
        SigmaAlgebra(V, C, {"join": {("a", "a"): "a"}})
    with pytest.raises(VarietyError):
        SigmaAlgebra(V, C, {"join": {(p, q): "z" for p in "ab" for q in "ab"}})
    # a non-expansive violation for the distance-constrained operation
    mj = L.met_join()
    X = L.met_space(["p", "q", "r"], {("p", "q"): Fraction(1, 4), ("p", "r"): Fraction(1, 2),
                                      ("q", "r"): Fraction(1, 2)})
    good = {k: k[0] for k in iter_maps(mj.op("c").arity, X)}
    SigmaAlgebra(mj, X, {"c": good}, check=True)
    bad = dict(good)
    bad[("p", "p")] = "r"
    bad[("p", "q")] = "q"
    with pytest.raises(VarietyError):
        SigmaAlgebra(mj, X, {"c": bad})


def test_evaluation_partial_and_total():
    A = chain_algebra()
    t = App("join", [("x", Var("x")), ("y", App("join", [("x", Var("y")), ("y", Var("x"))]))])
    assert evaluate(A, {"x": "a", "y": "b"}, t) == "b"
    mj = L.met_join()
    X = L.met_space(["p", "q"], {("p", "q"): Fraction(3, 4)})
    table = {k: k[0] for k in [("p", "p"), ("q", "q")]}
    B = SigmaAlgebra(mj, X, {"c": table})
    far = App("c", [("a", Var("x")), ("b", Var("y"))])
    assert evaluate(B, {"x": "p", "y": "q"}, far) is None
    assert evaluate(B, {"x": "p", "y": "p"}, far) == "p"


def test_products_and_subalgebras():
    A = chain_algebra()
    P = product_algebra([A, A])
    assert len(P.carrier.carrier) == 4 and in_variety(P)
    proj = Morphism(P.carrier, A.carrier, tuple(p[0] for p in P.carrier.carrier))
    assert is_homomorphism(proj, P, A)
    assert subalgebra_check(P, [("a", "a"), ("b", "b")]) is not None
    assert subalgebra_check(P, [("a", "b"), ("b", "a")]) is None


def test_variety_validation():
    two = L.pos_model(["x", "y"])
    j = App("join", [("x", Var("x")), ("y", Var("y"))])
    with pytest.raises(VarietyError):
        Variety(POS, (OpSymbol("join", two), OpSymbol("join", two)))
    with pytest.raises(VarietyError):
        Variety(POS, (OpSymbol("join", two),), (SigmaRelation(two, Rel("le", (Var("z"), j))),))
    chain = L.pos_model(["x", "y"], [("x", "y")])
    with pytest.raises(VarietyError):
        Variety(POS, (OpSymbol("join", two),), (SigmaRelation(chain, Rel("le", (Var("x"), j)), ()),))
    with pytest.raises(VarietyError):
        Variety(POS, (OpSymbol("join", two),),
                (SigmaRelation(two, Rel("le", (Var("x"), j)), (Fact("le", ("x", "y")),)),))
