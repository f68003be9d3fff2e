import pytest

from relat import library as L
from relat.algebra import in_variety
from relat.extract import (MonadOracle, OracleError, canonical_algebra, evaluation_shortcut, free_monad_oracle,
                           identity_oracle, induce_theory, verify_roundtrip)
from relat.free import NotStabilized
from relat.horn.ops import builtin_theory
from relat.structops import Morphism

POS = builtin_theory("pos")
POINT = L.pos_model(["p"])
PAIR = L.pos_model(["p", "q"])
CHAIN = L.pos_model(["p", "q"], [("p", "q")])


def test_identity_monad_induces_projection_theory():
    M = identity_oracle(POS, [POINT, PAIR, CHAIN])
    assert M.report.ok
    IT = induce_theory(M, [POINT])
    # one operation, its reflexive edge, one substitution instance, one unit law (both directions of le)
    assert len(IT.signature) == 1
    assert [len(IT.families[k]) for k in (1, 2, 3)] == [1, 2, 2]
    for X in (POINT, PAIR, CHAIN):
        C = canonical_algebra(M, IT, X)
        assert in_variety(C)
        assert evaluation_shortcut(IT, 0, X) == []


def test_law_breaking_oracle_is_refused():
    def const_extend(f):
        TX = f.source
        return Morphism(TX, f.target, (f.target.carrier[0],) * len(TX.carrier))

    with pytest.raises(OracleError):
        MonadOracle(POS, [PAIR], lambda X: X, lambda X: Morphism(X, X, X.carrier), const_extend)


def test_objects_outside_the_universe():
    M = identity_oracle(POS, [POINT])
    with pytest.raises(OracleError):
        M.T(PAIR)


def test_free_semilattice_roundtrip_single_arity():
    rep = verify_roundtrip(L.semilattice(), [PAIR], 3, carrier_bound=2)
    assert rep.ok and rep.canonical_ok == [True]
    assert rep.algebras > 0 and rep.generator_maps > 0


def test_unstable_monad_has_no_oracle():
    with pytest.raises(NotStabilized):
        free_monad_oracle(L.met_free_unary(), [L.met_space(["x"], {})], 2)
