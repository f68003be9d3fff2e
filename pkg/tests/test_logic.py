import random
from fractions import Fraction

import pytest

from relat import library as L
from relat.algebra import VarietyError, satisfies_judgement
from relat.domains import Bound
from relat.horn.ops import FuelExhausted
from relat.logic import (JudgementBank, LogicError, admissible_arity, admissible_subterm, admissible_substitute,
                         derive, derive_equal, query)
from relat.proofs import Proof, check_proof, proof_error
from relat.structures import Fact
from relat.terms import App, Def, Rel, Var


def join(s, t):
    return App("join", [("x", s), ("y", t)])


def c(s, t):
    return App("c", [("a", s), ("b", t)])


x, y = Var("x"), Var("y")
SL = L.semilattice()
MJ = L.met_join()
DISCRETE = L.pos_model(["x", "y"])
CHAIN = L.pos_model(["x", "y"], [("x", "y")])
HALF = L.met_space(["x", "y"], {("x", "y"): Fraction(1, 2)})


def test_upper_bound_and_least():
    p = derive(SL, DISCRETE, Rel("le", (x, join(x, y))), 3)
    assert p is not None and check_proof(p, SL)
    q = derive(SL, CHAIN, Rel("le", (join(x, y), y)), 3)
    assert q is not None and check_proof(q, SL)
    r = query(SL, DISCRETE, Rel("le", (join(x, y), y)), 3)
    assert r.proof is None and r.status == "absent"


def test_commutativity_from_least_upper_bound():
    proofs = derive_equal(SL, DISCRETE, join(x, y), join(y, x), 3)
    assert proofs and all(check_proof(p, SL) for p in proofs)
    assert derive_equal(SL, DISCRETE, join(x, y), x, 3) is None


def test_partial_operation_needs_arity():
    near = derive(MJ, HALF, Def(c(x, y)), 2)
    assert near is not None and check_proof(near, MJ)
    far = L.met_space(["x", "y"], {("x", "y"): Fraction(3, 4)})
    assert derive(MJ, far, Def(c(x, y)), 2) is None


def test_met_join_commutes():
    g = Rel("eq", (c(x, y), c(y, x)), Bound(Fraction(0)))
    p = derive(MJ, HALF, g, 3)
    assert p is not None and check_proof(p, MJ)
    assert p.rule in ("Ax", "Up", "RelAx")


def test_nonexpansive_bound_on_images():
    # c(x, x) is x, and c(x, y) sits within 1/2 of it by (Mor)
    g = Rel("eq", (c(x, x), c(x, y)), Bound(Fraction(1, 2)))
    p = derive(MJ, HALF, g, 2)
    assert p is not None and check_proof(p, MJ)
    assert derive(MJ, HALF, Rel("eq", (c(x, x), c(x, y)), Bound(Fraction(1, 4))), 2) is None


def test_focused_search_agrees_with_bank():
    rng = random.Random(7)
    bank = JudgementBank(SL, CHAIN, 2)
    terms = bank.terms()
    for _ in range(30):
        g = Rel("le", (rng.choice(terms), rng.choice(terms)))
        plain = derive(SL, CHAIN, g, 2)
        focused = derive(SL, CHAIN, g, 2, focus=True)
        assert (plain is None) == (focused is None)
        if focused is not None:
            assert check_proof(focused, SL)


def test_cauchy_limit_within_distance():
    V = L.cauchy()
    X = L.cauchy_context()
    lim = L.lim_term()
    p = derive(V, X, Rel("eq", (lim, Var("x5")), Bound(Fraction(1, 4))), 2, focus=True)
    assert p is not None and check_proof(p, V)
    r = query(V, X, Rel("eq", (lim, Var("x2")), Bound(Fraction(1, 8))), 2, focus=True)
    assert r.proof is None
    # a model of the variety refutes the stronger bound outright
    A = L.cauchy_countermodel()
    assert not satisfies_judgement(A, X, Rel("eq", (lim, Var("x2")), Bound(Fraction(1, 8))))


def test_fuel():
    with pytest.raises(FuelExhausted):
        JudgementBank(SL, DISCRETE, 3, fuel=1)


def test_goal_checks():
    with pytest.raises(LogicError):
        derive(SL, DISCRETE, Rel("=", (x, y)), 2)
    with pytest.raises(VarietyError):
        derive(SL, DISCRETE, Rel("le", (x, Var("z"))), 2)


def test_admissible_arity_and_subterm():
    p = derive(MJ, HALF, Def(c(x, y)), 2)
    e = Fact("eq", ("a", "b"), Bound(Fraction(3, 4)))
    q = admissible_arity(p, e, MJ)
    assert q.claim == Rel("eq", (x, y), Bound(Fraction(3, 4))) and check_proof(q, MJ)
    big = derive(SL, DISCRETE, Rel("le", (x, join(x, join(y, x)))), 3)
    for u in (join(y, x), x, y, join(x, join(y, x))):
        d = admissible_subterm(big, u, SL)
        assert d.claim == Def(u) and check_proof(d, SL)
    with pytest.raises(LogicError):
        admissible_subterm(big, join(y, y), SL)


def test_admissible_substitution():
    p = derive(SL, DISCRETE, Rel("le", (x, join(x, y))), 3)
    X = L.pos_model(["a", "b"])
    a, b = Var("a"), Var("b")
    tau = {"x": a, "y": join(a, b)}
    prem = [derive(SL, X, Def(a), 3), derive(SL, X, Def(join(a, b)), 3)]
    prem += [derive(SL, X, Rel(f.symbol, tuple(tau[v] for v in f.args), f.bound), 3) for f in DISCRETE.facts]
    q = admissible_substitute(tau, prem, p, SL, X)
    assert q.claim == Rel("le", (a, join(a, join(a, b))))
    assert check_proof(q, SL)
    with pytest.raises(LogicError):
        admissible_substitute(tau, prem[:1], p, SL, X)


def test_checker_rejects_tampering():
    p = derive(SL, CHAIN, Rel("le", (join(x, y), y)), 3)
    assert proof_error(p, SL) is None
    wrong = Proof(p.context, Rel("le", (y, join(x, y))), p.rule, p.data, p.premises)
    assert proof_error(wrong, SL) is not None
    swapped = Proof(DISCRETE, p.claim, p.rule, p.data, p.premises)
    assert proof_error(swapped, SL) is not None
