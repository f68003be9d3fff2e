"""From a monad (given in Kleisli form) to a variety, at finite scale.

A ``MonadOracle`` supplies, for the models of a finite universe, the object
map ``X -> TX``, the unit and the extension ``f -> f*``.  ``induce_theory``
reads off the operations (one per element of ``TΓ`` for each chosen arity
``Γ``) and the three axiom families; ``canonical_algebra`` makes each ``TX``
an algebra of the result via ``σ(f) := f*(σ)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product

from .algebra import (
    OpSymbol,
    SigmaAlgebra,
    SigmaRelation,
    Variety,
    VarietyError,
    enumerate_algebras,
    evaluate,
    in_variety,
    is_homomorphism,
)
from .free import NotStabilized, free_algebra, free_functor, kleisli_extension
from .horn.ops import as_model
from .horn.theory import HornTheory
from .structops import (
    EnrichmentReport,
    Functor,
    GuardExceeded,
    Morphism,
    check_enriched,
    compose,
    get_guard,
    identity,
    iter_maps,
    morphisms,
    presentation,
)
from .structures import Model
from .terms import App, Rel, Var


class OracleError(ValueError):
    """The oracle breaks a Kleisli law or is asked about an object outside its universe."""


class MonadOracle:
    """A Kleisli triple on a finite universe of models.

    ``obj(X)`` returns ``TX``; ``unit(X)`` a morphism ``X -> TX``;
    ``extend(f)`` a morphism ``TX -> TY`` for ``f: X -> TY``.  Results are
    memoized per object and per map.
    """

    def __init__(self, theory: HornTheory, universe, obj, unit, extend, *, name: str = "",
                 validate: bool = True, guard=None):
        self.theory = theory
        self.universe = [as_model(theory, X) for X in universe]
        self.name = name
        self._obj, self._unit, self._extend = obj, unit, extend
        self._T: dict = {}
        self._eta: dict = {}
        self._ext: dict = {}
        self.guard = guard
        self.report = None
        if validate:
            self.report = self.validate()
            if not self.report.ok:
                raise OracleError(f"oracle violates a Kleisli law: {self.report.violations[:3]}")

    def _check(self, X):
        if not any(X == U for U in self.universe):
            raise OracleError(f"{X} is not in the oracle's universe")

    def T(self, X) -> Model:
        self._check(X)
        if X not in self._T:
            self._T[X] = self._obj(X)
        return self._T[X]

    def unit(self, X) -> Morphism:
        self._check(X)
        if X not in self._eta:
            self._eta[X] = self._unit(X)
        return self._eta[X]

    def owner(self, carrier) -> Model:
        for X in self.universe:
            if self.T(X) == carrier:
                return X
        raise OracleError("target is not TY for an object Y of the universe")

    def extend(self, f: Morphism) -> Morphism:
        key = (f.source, f.target, f.images)
        if key not in self._ext:
            self._check(f.source)
            self._ext[key] = self._extend(f)
        return self._ext[key]

    def functor(self) -> Functor:
        def mor(h: Morphism):
            return self.extend(compose(self.unit(h.target), h))

        return Functor(self.T, mor)

    def validate(self) -> "KleisliReport":
        return kleisli_report(self)


@dataclass
class KleisliReport:
    unit_checks: int = 0
    left_checks: int = 0
    assoc_checks: int = 0
    violations: list = field(default_factory=list)
    enrichment: EnrichmentReport | None = None

    @property
    def ok(self) -> bool:
        return not self.violations and (self.enrichment is None or self.enrichment.ok)


def kleisli_report(M: MonadOracle) -> KleisliReport:
    """The three Kleisli laws on every composable pair of the universe, and enrichment."""
    rep = KleisliReport()
    U = M.universe
    for X in U:
        rep.unit_checks += 1
        if M.extend(M.unit(X)).images != identity(M.T(X)).images:
            rep.violations.append(("unit", X))
    for X, Y in product(U, repeat=2):
        fs = morphisms(X, M.T(Y), M.guard)
        for f in fs:
            rep.left_checks += 1
            fs_ = M.extend(f)
            if not fs_.is_valid():
                rep.violations.append(("not relation-preserving", X, Y, f))
            if compose(fs_, M.unit(X)).images != f.images:
                rep.violations.append(("left", X, Y, f))
        for Z in U:
            for g in morphisms(Y, M.T(Z), M.guard):
                gs = M.extend(g)
                for f in fs:
                    rep.assoc_checks += 1
                    if compose(gs, M.extend(f)).images != M.extend(compose(gs, f)).images:
                        rep.violations.append(("assoc", X, Y, Z, f, g))
    rep.enrichment = check_enriched(M.functor(), U, M.theory, M.guard)
    return rep


def identity_oracle(theory: HornTheory, universe) -> MonadOracle:
    return MonadOracle(theory, universe, lambda X: X, identity, lambda f: f, name="identity")


def free_monad_oracle(V: Variety, universe, depth: int, guard=None) -> MonadOracle:
    """The free-algebra monad of ``V`` restricted to ``universe``."""
    universe = [as_model(V.theory, X) for X in universe]
    for X in universe:
        F = free_algebra(V, X, depth, guard=guard)
        if not F.stabilized:
            raise NotStabilized(f"free algebra over {X} did not stabilize at depth {depth}")
    return MonadOracle(
        V.theory, universe,
        lambda X: free_algebra(V, X, depth).carrier,
        lambda X: free_algebra(V, X, depth).unit,
        lambda f: kleisli_extension(V, f, depth),
        name=f"free({V.name})", guard=guard,
    )


# ---------------------------------------------------------------------------
# the induced theory


@dataclass(frozen=True)
class OpInfo:
    arity_index: int
    element: object


@dataclass
class InducedTheory:
    oracle: MonadOracle
    arities: tuple
    signature: tuple  # OpSymbol, in (arity index, element order)
    info: dict  # op name -> OpInfo
    families: dict  # 1, 2, 3 -> tuple of SigmaRelation
    variety: Variety

    def op_name(self, gi: int, element) -> str:
        for name, inf in self.info.items():
            if inf.arity_index == gi and inf.element == element:
                return name
        raise KeyError(element)

    def op_term(self, gi: int, element) -> App:
        """``σ(u_Γ)``: the operation applied to the generic point of its arity."""
        G = self.arities[gi]
        return App(self.op_name(gi, element), [(p, Var(p)) for p in G.carrier])

    @property
    def axioms(self) -> tuple:
        return self.variety.axioms


def _eq_relations(theory: HornTheory, s, t, ctx, pres, name: str) -> list:
    atoms = theory.eq_atoms(s, t)
    if not atoms:
        raise VarietyError("equality axioms need an Eq witness in the ambient theory")
    return [SigmaRelation(ctx, Rel(sym, args, gen), pres, name=f"{name}/{i}")
            for i, (sym, args, gen) in enumerate(atoms)]


def induce_theory(M: MonadOracle, arities, guard=None) -> InducedTheory:
    """Operations ``|TΓ|`` per arity ``Γ`` and the three axiom families."""
    theory = M.theory
    arities = tuple(as_model(theory, G) for G in arities)
    for G in arities:
        M._check(G)
    info: dict = {}
    sig = []
    names: dict = {}
    for gi, G in enumerate(arities):
        for k, el in enumerate(M.T(G).carrier):
            name = f"t{gi}_{k}"
            info[name] = OpInfo(gi, el)
            names[(gi, el)] = name
            sig.append(OpSymbol(name, G))

    def term(gi, el):
        G = arities[gi]
        return App(names[(gi, el)], [(p, Var(p)) for p in G.carrier])

    pres = {gi: presentation(theory, G) for gi, G in enumerate(arities)}
    fam1, fam2, fam3 = [], [], []
    for gi, G in enumerate(arities):
        TG = M.T(G)
        for f in sorted(TG.facts, key=lambda f: f.sort_key()):
            fam1.append(SigmaRelation(G, Rel(f.symbol, tuple(term(gi, a) for a in f.args), f.bound),
                                      pres[gi], name=f"edge:{gi}:{f}"))
    limit = get_guard(guard)
    for di, D in enumerate(arities):
        TD = M.T(D)
        for gi, G in enumerate(arities):
            TG = M.T(G)
            if len(D.carrier) and len(TG.carrier) ** len(D.carrier) > limit:
                raise GuardExceeded(f"{len(TG.carrier)}^{len(D.carrier)} maps exceed the guard {limit}")
            for f in morphisms(D, TG, guard):
                fstar = M.extend(f)
                for sigma in TD.carrier:
                    lhs = term(gi, fstar(sigma))
                    rhs = App(names[(di, sigma)], [(d, term(gi, f(d))) for d in D.carrier])
                    fam2.extend(_eq_relations(theory, lhs, rhs, G, pres[gi],
                                              f"subst:{di}->{gi}:{sigma}:{f.images}"))
    for gi, G in enumerate(arities):
        eta = M.unit(G)
        for x in G.carrier:
            fam3.extend(_eq_relations(theory, term(gi, eta(x)), Var(x), G, pres[gi], f"unit:{gi}:{x}"))
    V = Variety(theory, sig, tuple(fam1 + fam2 + fam3), name=f"induced({M.name})")
    return InducedTheory(M, arities, tuple(sig), info, {1: tuple(fam1), 2: tuple(fam2), 3: tuple(fam3)}, V)


def canonical_algebra(M: MonadOracle, IT: InducedTheory, X) -> SigmaAlgebra:
    """``TX`` with ``σ(f) := f*(σ)`` for every induced operation ``σ``."""
    X = as_model(M.theory, X)
    TX = M.T(X)
    tables = {}
    for op in IT.signature:
        inf = IT.info[op.name]
        G = IT.arities[inf.arity_index]
        table = {}
        for imgs in iter_maps(G, TX, M.guard):
            f = Morphism(G, TX, imgs)
            table[imgs] = M.extend(f)(inf.element)
        tables[op.name] = table
    return SigmaAlgebra(IT.variety, TX, tables)


# ---------------------------------------------------------------------------
# roundtrip


@dataclass
class RoundtripReport:
    arities: int
    canonical_ok: list = field(default_factory=list)  # per arity: in the induced variety
    algebras: int = 0
    generator_maps: int = 0
    violations: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(self.canonical_ok) and not self.violations


def extension_along(IT: InducedTheory, gi: int, A: SigmaAlgebra, f: dict) -> Morphism:
    """``f̄(σ) := σ_A(f)`` for ``f: Γ -> A``, as a map ``TΓ -> A``."""
    G = IT.arities[gi]
    TG = IT.oracle.T(G)
    key = tuple(f[p] for p in G.carrier)
    return Morphism(TG, A.carrier, tuple(A.tables[IT.op_name(gi, s)][key] for s in TG.carrier))


def verify_roundtrip(V: Variety, arities, depth: int, *, carrier_bound: int = 3, palette=None,
                     guard=None) -> RoundtripReport:
    """Induced theory of ``V``'s free-algebra monad: canonical algebras and universal extensions."""
    arities = [as_model(V.theory, G) for G in arities]
    M = free_monad_oracle(V, arities, depth, guard)
    IT = induce_theory(M, arities, guard)
    rep = RoundtripReport(len(arities))
    canon = []
    for G in arities:
        C = canonical_algebra(M, IT, G)
        canon.append(C)
        rep.canonical_ok.append(in_variety(C, guard))
    algebras = enumerate_algebras(IT.variety, carrier_bound, palette, guard)
    rep.algebras = len(algebras)
    for A in algebras:
        for gi, G in enumerate(arities):
            C = canon[gi]
            eta = M.unit(G)
            homs = [Morphism(C.carrier, A.carrier, imgs) for imgs in iter_maps(C.carrier, A.carrier, guard)]
            homs = [h for h in homs if is_homomorphism(h, C, A)]
            for imgs in iter_maps(G, A.carrier, guard):
                rep.generator_maps += 1
                f = dict(zip(G.carrier, imgs))
                fbar = extension_along(IT, gi, A, f)
                if not is_homomorphism(fbar, C, A):
                    rep.violations.append(("not a homomorphism", gi, A, imgs))
                    continue
                if compose(fbar, eta).images != imgs:
                    rep.violations.append(("does not extend", gi, A, imgs))
                ext = [h for h in homs if compose(h, eta).images == imgs]
                if len(ext) != 1 or ext[0].images != fbar.images:
                    rep.violations.append(("not unique", gi, A, imgs, len(ext)))
    return rep


def evaluation_shortcut(IT: InducedTheory, gi: int, X, guard=None) -> list:
    """Pairs ``(f, σ)`` where evaluating ``σ(u_Γ)`` along ``f: Γ -> TX`` differs from ``f*(σ)``."""
    M = IT.oracle
    G = IT.arities[gi]
    C = canonical_algebra(M, IT, X)
    bad = []
    for imgs in iter_maps(G, C.carrier, guard):
        f = Morphism(G, C.carrier, imgs)
        fs = M.extend(f)
        for s in M.T(G).carrier:
            if evaluate(C, f.mapping, IT.op_term(gi, s)) != fs(s):
                bad.append((imgs, s))
    return bad
